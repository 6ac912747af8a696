#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vgm/margin_trainer.hpp"

using namespace vgm;

namespace {

MarginSample sample(std::initializer_list<double> xs, bool positive) {
    return {Vec(xs), positive};
}

// Random feature-space instance with <= 6 samples, compared against the
// active-set QP oracle.
struct TinyInstance {
    std::vector<MarginSample> pos, neg;
    double c;
};

TinyInstance random_instance(testutil::Rng& rng) {
    TinyInstance inst;
    const int dim = 1 + rng.below(3);
    const int n_pos = 1 + rng.below(3);
    const int n_neg = 1 + rng.below(3);
    inst.c = rng.uniform(0.5, 4.0);
    for (int i = 0; i < n_pos; ++i)
        inst.pos.push_back({testutil::random_vec(rng, dim, 0.0, 2.0), true});
    for (int i = 0; i < n_neg; ++i)
        inst.neg.push_back({testutil::random_vec(rng, dim, 0.0, 6.0), false});
    return inst;
}

double oracle_objective(const TinyInstance& inst) {
    std::vector<Vec> x;
    std::vector<int> y;
    Vec cost;
    for (const auto& s : inst.pos) {
        x.push_back(s.features);
        y.push_back(-1);
        cost.push_back(inst.c / inst.pos.size());
    }
    for (const auto& s : inst.neg) {
        x.push_back(s.features);
        y.push_back(+1);
        cost.push_back(inst.c / inst.neg.size());
    }
    return oracle::QpOracle::solve(x, y, cost);
}

}  // namespace

TEST_SUITE_BEGIN("margin_trainer");

TEST_CASE("extract_features") {
    Pattern p;
    p.schema = testutil::simple_schema(2, 1);
    p.params = MatchParams::uniform_init(p.schema);
    p.node_attrs[p.fresh_id()] = {Vec{1.0, 2.0}};
    p.node_attrs[p.fresh_id()] = {Vec{0.0, 0.0}};

    Arg arg;
    arg.id = "a";
    arg.schema = p.schema;
    arg.nodes = {{Vec{1.0, 2.0}}, {Vec{0.0, 0.0}}, {Vec{3.0, 2.0}}};
    arg.pairwise.resize(6);
    for (int x1 = 0; x1 < 3; ++x1)
        for (int x2 = 0; x2 < 3; ++x2)
            if (x1 != x2) arg.pairwise[Arg::pair_index(x1, x2, 3)] = {Vec{1.0}};

    SUBCASE("perfect match gives the all-zero vector") {
        p.edge_attrs[{0, 1}] = {Vec{1.0}};
        Assignment a{"a", {{0, 0}, {1, 1}}};
        const Vec f = extract_features(p, arg, a);
        CHECK(f == Vec{0.0, 0.0});
    }
    SUBCASE("one matched node with squared diff 4") {
        Assignment a{"a", {{0, 2}, {1, kNone}}};  // [1,2] vs [3,2]: 4
        const Vec f = extract_features(p, arg, a);
        CHECK(f[0] == doctest::Approx(4.0));
        CHECK(f[1] == 0.0);  // edgeless: pairwise entry 0 by convention
    }
    SUBCASE("fully none assignment is degenerate") {
        Assignment a{"a", {{0, kNone}, {1, kNone}}};
        CHECK_THROWS_AS(extract_features(p, arg, a), DegenerateSample);
    }
    SUBCASE("features are unweighted and skip unmatched edge ends") {
        p.edge_attrs[{0, 1}] = {Vec{0.0}};  // |0-1|^2 = 1 when both matched
        Assignment both{"a", {{0, 0}, {1, 1}}};
        CHECK(extract_features(p, arg, both)[1] == doctest::Approx(1.0));
        Assignment half{"a", {{0, 0}, {1, kNone}}};
        CHECK(extract_features(p, arg, half)[1] == 0.0);
    }
}

TEST_CASE("train on separable 1-D data") {
    std::vector<MarginSample> pos{sample({0.0}, true), sample({0.5}, true)};
    std::vector<MarginSample> neg{sample({10.0}, false), sample({11.0}, false)};
    const TrainResult r = train(pos, neg, 10.0);
    CHECK(r.converged);
    CHECK(r.w[0] > 0.0);
    // zero slack: every constraint satisfied with margin
    for (const auto& s : pos) CHECK(r.w[0] * s.features[0] - r.bias <= -1.0 + 1e-6);
    for (const auto& s : neg) CHECK(r.w[0] * s.features[0] - r.bias >= 1.0 - 1e-6);
    // maximum-margin solution: w = 2/(gap), objective = ||w||^2
    CHECK(r.w[0] == doctest::Approx(2.0 / 9.5).epsilon(1e-4));
    CHECK(r.objective == doctest::Approx(r.w[0] * r.w[0]).epsilon(1e-6));
}

TEST_CASE("identical positives and negatives: slack floor, oracle agreement") {
    std::vector<MarginSample> pos{sample({1.0, 2.0}, true), sample({1.0, 2.0}, true)};
    std::vector<MarginSample> neg{sample({1.0, 2.0}, false)};
    const TrainResult r = train(pos, neg, 2.0);
    // total slack it pays is at least one unit per class at any (w, b)
    CHECK(r.objective == doctest::Approx(2.0 * 2.0).epsilon(1e-4));  // 2C
    TinyInstance inst{pos, neg, 2.0};
    CHECK(r.objective == doctest::Approx(oracle_objective(inst)).epsilon(1e-4));
}

TEST_CASE("duplicated dataset keeps the same solution") {
    std::vector<MarginSample> pos{sample({0.2, 0.1}, true), sample({0.4, 0.3}, true)};
    std::vector<MarginSample> neg{sample({3.0, 2.0}, false), sample({2.0, 4.0}, false)};
    const TrainResult base = train(pos, neg, 1.5);
    std::vector<MarginSample> pos2 = pos;
    pos2.insert(pos2.end(), pos.begin(), pos.end());
    std::vector<MarginSample> neg2 = neg;
    neg2.insert(neg2.end(), neg.begin(), neg.end());
    const TrainResult doubled = train(pos2, neg2, 1.5);
    for (std::size_t i = 0; i < base.w.size(); ++i)
        CHECK(doubled.w[i] == doctest::Approx(base.w[i]).epsilon(1e-6));
    CHECK(doubled.bias == doctest::Approx(base.bias).epsilon(1e-6));
}

TEST_CASE("objective matches the QP oracle on random tiny instances") {
    testutil::Rng rng{51};
    for (int trial = 0; trial < 30; ++trial) {
        const TinyInstance inst = random_instance(rng);
        const TrainResult r = train(inst.pos, inst.neg, inst.c);
        const double oracle_obj = oracle_objective(inst);
        CHECK(r.objective ==
              doctest::Approx(oracle_obj).epsilon(1e-4).scale(std::max(1.0, oracle_obj)));
    }
}

TEST_CASE("scaling all features preserves the sign pattern of w") {
    std::vector<MarginSample> pos{sample({0.1, 1.0}, true), sample({0.2, 1.2}, true)};
    std::vector<MarginSample> neg{sample({2.0, 1.1}, false), sample({2.4, 0.9}, false)};
    const TrainResult base = train(pos, neg, 2.0);
    auto scale = [](std::vector<MarginSample> samples) {
        for (auto& s : samples)
            for (double& x : s.features) x *= 3.0;
        return samples;
    };
    const TrainResult scaled = train(scale(pos), scale(neg), 2.0);
    for (std::size_t i = 0; i < base.w.size(); ++i) {
        const auto sign = [](double v) { return v > 1e-9 ? 1 : (v < -1e-9 ? -1 : 0); };
        CHECK(sign(base.w[i]) == sign(scaled.w[i]));
    }
}

TEST_CASE("train input validation") {
    std::vector<MarginSample> pos{sample({1.0}, true)};
    std::vector<MarginSample> empty;
    CHECK_THROWS_AS(train(pos, empty, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(train(pos, pos, 0.0), std::invalid_argument);
}

TEST_CASE("postprocess_and_blend") {
    SUBCASE("worked example: [-1,3] blended into [0.5,0.5]") {
        const Vec out = postprocess_and_blend({-1.0, 3.0}, {0.5, 0.5}, 0.5);
        CHECK(out[0] == 0.25);  // exact
        CHECK(out[1] == 0.75);
    }
    SUBCASE("lambda 0 keeps the previous weights") {
        const Vec out = postprocess_and_blend({-1.0, 3.0}, {0.25, 0.75}, 0.0);
        CHECK(out == Vec{0.25, 0.75});
    }
    SUBCASE("lambda 1 with an already-normalized input is the identity") {
        const Vec out = postprocess_and_blend({0.3, 0.7}, {0.5, 0.5}, 1.0);
        CHECK(out[0] == doctest::Approx(0.3));
        CHECK(out[1] == doctest::Approx(0.7));
    }
    SUBCASE("all-negative raw weights keep the previous vector") {
        const Vec out = postprocess_and_blend({-1.0, -2.0}, {0.6, 0.4}, 0.5);
        CHECK(out == Vec{0.6, 0.4});
    }
    SUBCASE("output is always on the simplex") {
        testutil::Rng rng{52};
        for (int trial = 0; trial < 50; ++trial) {
            const int dim = 1 + rng.below(5);
            Vec raw(dim), prev(dim);
            double prev_sum = 0.0;
            for (int i = 0; i < dim; ++i) {
                raw[i] = rng.uniform(-2.0, 2.0);
                prev[i] = rng.uniform01() + 1e-3;
                prev_sum += prev[i];
            }
            for (double& x : prev) x /= prev_sum;
            const Vec out = postprocess_and_blend(raw, prev, rng.uniform01());
            double sum = 0.0;
            for (double x : out) {
                CHECK(x >= 0.0);
                sum += x;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_SUITE_END();
