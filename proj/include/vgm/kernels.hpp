#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Arithmetic inner loops shared by the energy and solver code. The dispatched
// entry points pick a SIMD backend (AVX2 on x86-64, NEON on aarch64) at
// runtime when the CPU supports it and fall back to the scalar reference
// otherwise. Set VGM_DISABLE_SIMD=1 in the environment to force scalar.
//
// SIMD variants may reassociate the accumulation, so results can differ from
// the scalar reference by a few ulps; the equivalence tests bound that gap.

namespace vgm::kernels {

// sum_i (a[i] - b[i])^2
double squared_l2_diff(const double* a, const double* b, std::size_t n);

inline double squared_l2_diff(const std::vector<double>& a,
                              const std::vector<double>& b) {
    return squared_l2_diff(a.data(), b.data(), a.size());
}

// Name of the backend the dispatcher selected: "scalar", "avx2" or "neon".
const std::string& active_backend();

namespace detail {
double squared_l2_diff_scalar(const double* a, const double* b, std::size_t n);
#if defined(__x86_64__) || defined(_M_X64)
double squared_l2_diff_avx2(const double* a, const double* b, std::size_t n);
#endif
#if defined(__aarch64__)
double squared_l2_diff_neon(const double* a, const double* b, std::size_t n);
#endif
}  // namespace detail

}  // namespace vgm::kernels
