#include "doctest.h"

#include <cmath>

#include "test_util.hpp"
#include "vgm/labeling.hpp"

using namespace vgm;

namespace {

// Random labeling problem with optional distinctness, nonnegative costs.
LabelingProblem random_problem(testutil::Rng& rng, int vars, int labels, bool distinct) {
    LabelingProblem p;
    p.distinct_real_labels = distinct;
    p.labels.resize(vars);
    p.unary.resize(vars);
    for (int v = 0; v < vars; ++v) {
        for (int a = 0; a < labels; ++a) p.labels[v].push_back(a);
        if (distinct) p.labels[v].push_back(-1);
        for (std::size_t a = 0; a < p.labels[v].size(); ++a)
            p.unary[v].push_back(rng.uniform(0.0, 2.0));
    }
    for (int u = 0; u < vars; ++u)
        for (int v = 0; v < vars; ++v) {
            if (u == v || rng.uniform01() < 0.5) continue;
            LabelingProblem::PairTerm pt;
            pt.u = u;
            pt.v = v;
            pt.cost.resize(p.labels[u].size() * p.labels[v].size());
            for (double& c : pt.cost) c = rng.uniform(0.0, 2.0);
            p.pairs.push_back(std::move(pt));
        }
    return p;
}

double enumerate_min(const LabelingProblem& p) {
    std::vector<int> idx(p.labels.size(), 0);
    double best = std::numeric_limits<double>::infinity();
    bool done = p.labels.empty();
    while (!done) {
        best = std::min(best, p.energy_of(idx));
        int v = static_cast<int>(idx.size()) - 1;
        for (; v >= 0; --v) {
            if (++idx[v] < static_cast<int>(p.labels[v].size())) break;
            idx[v] = 0;
        }
        done = v < 0;
    }
    return best;
}

}  // namespace

TEST_SUITE_BEGIN("labeling");

TEST_CASE("exact solver matches plain enumeration") {
    testutil::Rng rng{21};
    for (int trial = 0; trial < 40; ++trial) {
        const bool distinct = trial % 2 == 0;
        const auto p = random_problem(rng, 1 + rng.below(3), 2 + rng.below(3), distinct);
        const auto sol = solve_exact(p);
        CHECK(sol.exact);
        CHECK(sol.energy == doctest::Approx(enumerate_min(p)).epsilon(1e-12));
        CHECK(sol.energy == doctest::Approx(p.energy_of(sol.label_index)).epsilon(1e-12));
    }
}

TEST_CASE("icm never beats exact and is deterministic") {
    testutil::Rng rng{22};
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_problem(rng, 1 + rng.below(3), 2 + rng.below(3), true);
        const auto exact = solve_exact(p);
        const auto icm_a = solve_icm(p, 8, 99);
        const auto icm_b = solve_icm(p, 8, 99);
        CHECK(icm_a.energy >= exact.energy - 1e-12);
        CHECK(icm_a.label_value == icm_b.label_value);
        // more restarts can only improve the best energy
        const auto icm_more = solve_icm(p, 16, 99);
        CHECK(icm_more.energy <= icm_a.energy + 1e-12);
    }
}

TEST_CASE("budget guard") {
    LabelingProblem p;
    p.labels.assign(30, std::vector<int>(100, 0));
    for (auto& ls : p.labels)
        for (int i = 0; i < 100; ++i) ls[i] = i;
    p.unary.assign(30, std::vector<double>(100, 0.0));
    CHECK_FALSE(exact_feasible(p));
    CHECK_THROWS_AS(solve_exact(p), std::length_error);
}

TEST_CASE("distinctness is enforced structurally") {
    testutil::Rng rng{23};
    for (int trial = 0; trial < 10; ++trial) {
        auto p = random_problem(rng, 3, 3, true);
        for (const auto& sol : {solve_exact(p), solve_icm(p, 4, 7)}) {
            std::vector<int> seen;
            for (int value : sol.label_value) {
                if (value < 0) continue;
                CHECK(std::find(seen.begin(), seen.end(), value) == seen.end());
                seen.push_back(value);
            }
        }
    }
}

TEST_SUITE_END();
