#include "vgm/kernels.hpp"

#include <cstdlib>

namespace vgm::kernels {
namespace {

using Fn = double (*)(const double*, const double*, std::size_t);

struct Backend {
    Fn fn;
    std::string name;
};

Backend resolve() {
    const char* off = std::getenv("VGM_DISABLE_SIMD");
    if (off && off[0] != '\0' && off[0] != '0')
        return {&detail::squared_l2_diff_scalar, "scalar"};
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__AVX2__)
    if (__builtin_cpu_supports("avx2"))
        return {&detail::squared_l2_diff_avx2, "avx2"};
#endif
#if defined(__aarch64__)
    return {&detail::squared_l2_diff_neon, "neon"};
#endif
    return {&detail::squared_l2_diff_scalar, "scalar"};
}

const Backend& backend() {
    static const Backend b = resolve();
    return b;
}

}  // namespace

double squared_l2_diff(const double* a, const double* b, std::size_t n) {
    return backend().fn(a, b, n);
}

const std::string& active_backend() { return backend().name; }

}  // namespace vgm::kernels
