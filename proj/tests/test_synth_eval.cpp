#include "doctest.h"

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vgm/energy.hpp"
#include "vgm/eval.hpp"
#include "vgm/matcher.hpp"
#include "vgm/synth.hpp"

using namespace vgm;

namespace {

SyntheticSpec base_spec() {
    SyntheticSpec spec;
    spec.schema = testutil::simple_schema(2, 1);
    spec.pattern_size = 3;
    spec.n_background = 5;
    spec.n_positive = 4;
    spec.n_negative = 3;
    spec.noise_sigma = 0.0;
    spec.occlusion_prob = 0.0;
    spec.attr_min = 0.0;
    spec.attr_max = 10.0;
    spec.rng_seed = 77;
    return spec;
}

}  // namespace

TEST_SUITE_BEGIN("synth_eval");

TEST_CASE("zero-noise generation embeds the prototype exactly") {
    const SyntheticData data = generate(base_spec());
    REQUIRE(data.positives.size() == 4);
    REQUIRE(data.negatives.size() == 3);
    for (std::size_t k = 0; k < data.positives.size(); ++k) {
        const auto& corr = data.truth.correspondences[k];
        Assignment a{data.positives[k].id, {}};
        for (const auto& [p, x] : corr) a.map[p] = x;
        CHECK(total_match_energy(data.truth.plant, data.positives[k], a) ==
              doctest::Approx(0.0));
        // the matcher also finds the plant at zero energy
        const MatchResult m = match_exact(data.truth.plant, data.positives[k]);
        CHECK(m.energy == doctest::Approx(0.0));
    }
}

TEST_CASE("determinism: identical spec and seed give identical files") {
    const SyntheticData a = generate(base_spec());
    const SyntheticData b = generate(base_spec());
    for (std::size_t k = 0; k < a.positives.size(); ++k)
        CHECK(arg_to_json(a.positives[k]) == arg_to_json(b.positives[k]));
    CHECK(truth_to_json(a.truth) == truth_to_json(b.truth));
    SyntheticSpec other = base_spec();
    other.rng_seed = 78;
    const SyntheticData c = generate(other);
    CHECK(arg_to_json(a.positives[0]) != arg_to_json(c.positives[0]));
}

TEST_CASE("occlusion rate matches the binomial expectation") {
    SyntheticSpec spec = base_spec();
    spec.pattern_size = 4;
    spec.n_positive = 1000;
    spec.occlusion_prob = 0.7;
    const SyntheticData data = generate(spec);
    long survivors = 0;
    for (const auto& corr : data.truth.correspondences)
        for (const auto& [_, x] : corr) survivors += x != kOccluded;
    const double n = 1000.0 * 4;
    const double expected = n * 0.3;
    const double sigma3 = 3.0 * std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(survivors - expected) < sigma3);
}

TEST_CASE("negatives carry no correspondences and truth round-trips") {
    const SyntheticData data = generate(base_spec());
    CHECK(data.truth.correspondences.size() == data.positives.size());
    const GroundTruth back = truth_from_json(truth_to_json(data.truth));
    CHECK(back.plant == data.truth.plant);
    CHECK(back.correspondences == data.truth.correspondences);
}

TEST_CASE("score_recovery") {
    const SyntheticData data = generate(base_spec());
    std::vector<Assignment> perfect;
    for (std::size_t k = 0; k < data.positives.size(); ++k) {
        Assignment a{data.positives[k].id, {}};
        for (const auto& [p, x] : data.truth.correspondences[k]) a.map[p] = x;
        perfect.push_back(a);
    }
    SUBCASE("perfect recovery") {
        const RecoveryReport r = score_recovery(data.truth.plant, perfect, data.truth);
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 1.0);
        CHECK(r.size_error == 0);
    }
    SUBCASE("plant minus one node: recall (n-1)/n") {
        Pattern reduced = data.truth.plant;
        reduced.node_attrs.erase(2);
        for (auto it = reduced.edge_attrs.begin(); it != reduced.edge_attrs.end();)
            it = (it->first.first == 2 || it->first.second == 2) ? reduced.edge_attrs.erase(it)
                                                                 : std::next(it);
        std::vector<Assignment> partial = perfect;
        for (auto& a : partial) a.map.erase(2);
        const RecoveryReport r = score_recovery(reduced, partial, data.truth);
        CHECK(r.recall == doctest::Approx(2.0 / 3.0));
        CHECK(r.size_error == -1);
    }
    SUBCASE("background matches hurt precision") {
        std::vector<Assignment> noisy = perfect;
        // send pattern node 0 to a background node everywhere
        for (std::size_t k = 0; k < noisy.size(); ++k) {
            const auto& corr = data.truth.correspondences[k];
            std::vector<char> is_plant(data.positives[k].node_count(), 0);
            for (const auto& [_, x] : corr)
                if (x != kOccluded) is_plant[x] = 1;
            for (int x = 0; x < data.positives[k].node_count(); ++x)
                if (!is_plant[x]) {
                    noisy[k].map[0] = x;
                    break;
                }
        }
        const RecoveryReport r = score_recovery(data.truth.plant, noisy, data.truth);
        CHECK(r.precision == doctest::Approx(2.0 / 3.0));
        CHECK(r.majority_vote.at(0) == kNone);
        CHECK(r.recall == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("count mismatch throws") {
        std::vector<Assignment> short_list(perfect.begin(), perfect.end() - 1);
        CHECK_THROWS_AS(score_recovery(data.truth.plant, short_list, data.truth),
                        std::invalid_argument);
    }
}

TEST_CASE("pattern_fuzziness") {
    const SyntheticData data = generate(base_spec());
    std::vector<Assignment> perfect;
    for (std::size_t k = 0; k < data.positives.size(); ++k) {
        Assignment a{data.positives[k].id, {}};
        for (const auto& [p, x] : data.truth.correspondences[k]) a.map[p] = x;
        perfect.push_back(a);
    }
    SUBCASE("zero noise plant has zero fuzziness") {
        CHECK(pattern_fuzziness(data.truth.plant, data.positives, perfect) ==
              doctest::Approx(0.0));
    }
    SUBCASE("identity with the objective") {
        testutil::Rng rng{61};
        Pattern p = testutil::random_pattern(rng, base_spec().schema, 3, 0.5);
        std::vector<Assignment> rnd;
        for (std::size_t k = 0; k < data.positives.size(); ++k)
            rnd.push_back(testutil::random_assignment(
                rng, p, data.positives[k].node_count(), 0.2, data.positives[k].id));
        const double tau = 0.7;
        const double fuzz = pattern_fuzziness(p, data.positives, rnd);
        const double obj = pattern_objective(p, data.positives, rnd, tau);
        CHECK(fuzz == doctest::Approx(obj / p.node_count() + tau).epsilon(1e-9));
    }
    SUBCASE("mean of per-node means") {
        // two nodes with energies 1 and 3 -> fuzziness 2
        Pattern p;
        p.schema = testutil::simple_schema();
        p.params.w_unary = {1.0};
        p.params.w_pairwise = {1.0};
        p.params.p_none = 1.0;
        p.node_attrs[p.fresh_id()] = {Vec{0.0}};
        p.node_attrs[p.fresh_id()] = {Vec{0.0}};
        Arg arg;
        arg.id = "x";
        arg.schema = p.schema;
        arg.nodes = {{Vec{1.0}}, {Vec{std::sqrt(3.0)}}};
        arg.pairwise.resize(2);
        arg.pairwise[0] = {Vec{0.0}};
        arg.pairwise[1] = {Vec{0.0}};
        std::vector<Arg> args{arg};
        std::vector<Assignment> asg{{"x", {{0, 0}, {1, 1}}}};
        CHECK(pattern_fuzziness(p, args, asg) == doctest::Approx(2.0));
    }
}

TEST_CASE("energy_ratio") {
    const SyntheticData data = generate(base_spec());
    MiningConfig cfg;
    cfg.rng_seed = 3;
    SUBCASE("perfect positives give ratio 0") {
        CHECK(energy_ratio(data.truth.plant, data.positives, data.negatives, cfg) ==
              doctest::Approx(0.0));
    }
    SUBCASE("identical test sets give exactly 1") {
        Pattern plant = data.truth.plant;
        plant.params.p_none = 4.0;  // keep energies finite and nonzero
        plant.params.q_none = 4.0;
        CHECK(energy_ratio(plant, data.negatives, data.negatives, cfg) == doctest::Approx(1.0));
    }
    SUBCASE("small noise keeps the ratio below 1") {
        SyntheticSpec spec = base_spec();
        spec.noise_sigma = 0.05;
        const SyntheticData noisy = generate(spec);
        Pattern plant = noisy.truth.plant;
        plant.params.p_none = 100.0;
        plant.params.q_none = 100.0;
        CHECK(energy_ratio(plant, noisy.positives, noisy.negatives, cfg) < 1.0);
    }
    SUBCASE("empty test set throws") {
        std::vector<Arg> empty;
        CHECK_THROWS_AS(energy_ratio(data.truth.plant, data.positives, empty, cfg),
                        std::invalid_argument);
    }
}

TEST_CASE("detection_score") {
    const SyntheticData data = generate(base_spec());
    Assignment a{data.positives[0].id, {}};
    for (const auto& [p, x] : data.truth.correspondences[0]) a.map[p] = x;
    SUBCASE("perfect full match scores zeta") {
        CHECK(detection_score(data.truth.plant, data.positives[0], a, 10.0) ==
              doctest::Approx(10.0));
    }
    SUBCASE("degenerate all-none with zero penalties scores 0") {
        Pattern p = data.truth.plant;
        p.params.p_none = 1e-300;  // effectively zero but valid
        p.params.q_none = 1e-300;
        Assignment none{data.positives[0].id, {}};
        for (NodeId s : p.node_ids()) none.map[s] = kNone;
        CHECK(detection_score(p, data.positives[0], none, 10.0) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("coverage strictly improves the score at equal energy") {
        // matching one more node with zero attribute cost adds zeta/|V|
        Pattern p = data.truth.plant;
        Assignment partial = a;
        partial.map[2] = kNone;
        p.params.p_none = 1e-300;
        p.params.q_none = 1e-300;
        const double less = detection_score(p, data.positives[0], partial, 10.0);
        const double more = detection_score(p, data.positives[0], a, 10.0);
        CHECK(more > less);
    }
}

TEST_CASE("average_precision") {
    SUBCASE("perfect separation gives 1") {
        const std::vector<double> pos{5.0, 4.0, 3.0};
        const std::vector<double> neg{2.0, 1.0};
        CHECK(average_precision(pos, neg) == doctest::Approx(1.0));
    }
    SUBCASE("fully inverted 1v1 gives 0.5") {
        const std::vector<double> pos{0.0};
        const std::vector<double> neg{1.0};
        CHECK(average_precision(pos, neg) == doctest::Approx(0.5));
    }
    SUBCASE("ties are pessimistic") {
        const std::vector<double> pos{1.0};
        const std::vector<double> neg{1.0};
        CHECK(average_precision(pos, neg) == doctest::Approx(0.5));
    }
    SUBCASE("monotone-transform invariance and rank-walk oracle agreement") {
        testutil::Rng rng{62};
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> pos, neg;
            for (int i = 0; i < 1 + rng.below(6); ++i) pos.push_back(rng.uniform(-3, 3));
            for (int i = 0; i < 1 + rng.below(6); ++i) neg.push_back(rng.uniform(-3, 3));
            const double ap = average_precision(pos, neg);
            CHECK(ap >= 0.0);
            CHECK(ap <= 1.0);
            CHECK(ap == doctest::Approx(oracle::rank_walk_ap(pos, neg)).epsilon(1e-12));
            auto squash = [](std::vector<double> v) {
                for (double& x : v) x = std::tanh(x) * 2.0 + 7.0;
                return v;
            };
            CHECK(average_precision(squash(pos), squash(neg)) ==
                  doctest::Approx(ap).epsilon(1e-12));
        }
    }
    SUBCASE("empty inputs throw") {
        const std::vector<double> pos{1.0};
        const std::vector<double> empty;
        CHECK_THROWS_AS(average_precision(pos, empty), std::invalid_argument);
    }
}

TEST_CASE("mean_out_degree and metrics csv") {
    Pattern p;
    p.schema = testutil::simple_schema();
    p.params = MatchParams::uniform_init(p.schema);
    for (int i = 0; i < 3; ++i) p.node_attrs[p.fresh_id()] = {Vec{0.0}};
    SUBCASE("edgeless") { CHECK(mean_out_degree(p) == 0.0); }
    SUBCASE("hand count: 3 edges over 3 nodes") {
        p.edge_attrs[{0, 1}] = {Vec{0.0}};
        p.edge_attrs[{1, 0}] = {Vec{0.0}};
        p.edge_attrs[{1, 2}] = {Vec{0.0}};
        CHECK(mean_out_degree(p) == doctest::Approx(1.0));
    }
    SUBCASE("complete directed pattern has degree |V|-1") {
        for (int s = 0; s < 3; ++s)
            for (int t = 0; t < 3; ++t)
                if (s != t) p.edge_attrs[{s, t}] = {Vec{0.0}};
        CHECK(mean_out_degree(p) == doctest::Approx(2.0));
    }
    SUBCASE("csv layout") {
        MetricsRow row;
        row.tau = 0.5;
        row.d = kInfiniteDegree;
        row.pattern_size = 4;
        std::ostringstream ss;
        write_metrics_csv(ss, {&row, 1});
        CHECK(ss.str().find("tau,d,pattern_size") != std::string::npos);
        CHECK(ss.str().find("0.5,inf,4") != std::string::npos);
    }
}

TEST_SUITE_END();
