#include "doctest.h"

#include <cmath>

#include "test_util.hpp"
#include "vgm/kernels.hpp"

using namespace vgm;

TEST_SUITE_BEGIN("kernels");

TEST_CASE("dispatched kernel matches the scalar reference") {
    testutil::Rng rng{17};
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.below(40);  // covers empty, odd tails and full lanes
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = rng.uniform(-100.0, 100.0);
            b[i] = rng.uniform(-100.0, 100.0);
        }
        const double ref = kernels::detail::squared_l2_diff_scalar(a.data(), b.data(), n);
        const double got = kernels::squared_l2_diff(a.data(), b.data(), n);
        CHECK(got == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("hand values") {
    const std::vector<double> a{1.0, 2.0};
    const std::vector<double> b{2.0, 4.0};
    CHECK(kernels::squared_l2_diff(a, b) == doctest::Approx(5.0));
    CHECK(kernels::squared_l2_diff(a, a) == 0.0);
    CHECK(kernels::squared_l2_diff(a.data(), b.data(), 0) == 0.0);
}

TEST_CASE("backend is reported") {
    const std::string& name = kernels::active_backend();
    CHECK((name == "scalar" || name == "avx2" || name == "neon"));
}

TEST_SUITE_END();
