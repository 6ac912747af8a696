#include "vgm/kernels.hpp"

namespace vgm::kernels::detail {

double squared_l2_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace vgm::kernels::detail
