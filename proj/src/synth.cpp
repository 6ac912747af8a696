#include "vgm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vgm {

namespace {

using json = nlohmann::json;

// Self-contained stream RNG so generated files do not depend on the standard
// library's distribution implementations.
struct Stream {
    std::uint64_t state;
    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double normal(double sigma) {
        // Box-Muller; two fresh uniforms per draw keeps the stream simple.
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }
};

Stream stream_for(std::uint64_t seed, std::uint64_t kind, std::uint64_t index) {
    Stream s{seed ^ (0xd1342543de82ef95ULL * (kind + 1)) ^ (0xaf251af3b0f025b5ULL * (index + 1))};
    s.next_u64();
    return s;
}

Vec draw_uniform_vec(Stream& rng, int dim, double lo, double hi) {
    Vec v(dim);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

Vec perturb(Stream& rng, const Vec& base, double sigma) {
    Vec v = base;
    for (double& x : v) x += rng.normal(sigma);
    return v;
}

}  // namespace

void SyntheticSpec::validate() const {
    schema.validate();
    if (pattern_size < 1) throw ValueError("synthetic spec: pattern_size must be >= 1");
    if (n_background < 0) throw ValueError("synthetic spec: n_background must be >= 0");
    if (pattern_size + n_background < 2)
        throw ValueError("synthetic spec: pattern_size + n_background must be >= 2");
    if (n_positive < 1) throw ValueError("synthetic spec: n_positive must be >= 1");
    if (n_negative < 0) throw ValueError("synthetic spec: n_negative must be >= 0");
    if (!(noise_sigma >= 0.0)) throw ValueError("synthetic spec: noise_sigma must be >= 0");
    if (!(occlusion_prob >= 0.0 && occlusion_prob < 1.0))
        throw ValueError("synthetic spec: occlusion_prob must be in [0,1)");
    if (!(attr_min < attr_max)) throw ValueError("synthetic spec: attr_min must be < attr_max");
}

SyntheticData generate(const SyntheticSpec& spec) {
    spec.validate();
    const int np = spec.schema.unary_types();
    const int nq = spec.schema.pairwise_types();

    // Noise-free prototype with a complete directed edge set.
    Stream plant_rng = stream_for(spec.rng_seed, 0, 0);
    Pattern plant;
    plant.id = "plant";
    plant.schema = spec.schema;
    plant.params = MatchParams::uniform_init(spec.schema);
    for (int p = 0; p < spec.pattern_size; ++p) {
        std::vector<Vec> attrs;
        for (int i = 0; i < np; ++i)
            attrs.push_back(draw_uniform_vec(plant_rng, spec.schema.unary_dims[i],
                                             spec.attr_min, spec.attr_max));
        plant.node_attrs[plant.fresh_id()] = std::move(attrs);
    }
    for (int s = 0; s < spec.pattern_size; ++s)
        for (int t = 0; t < spec.pattern_size; ++t) {
            if (s == t) continue;
            std::vector<Vec> attrs;
            for (int j = 0; j < nq; ++j)
                attrs.push_back(draw_uniform_vec(plant_rng, spec.schema.pairwise_dims[j],
                                                 spec.attr_min, spec.attr_max));
            plant.edge_attrs[{s, t}] = std::move(attrs);
        }

    SyntheticData data;
    data.truth.plant = plant;

    for (int k = 0; k < spec.n_positive; ++k) {
        Stream rng = stream_for(spec.rng_seed, 1, k);

        std::vector<char> survives(spec.pattern_size, 1);
        int survivors = 0;
        do {
            survivors = 0;
            for (int p = 0; p < spec.pattern_size; ++p) {
                survives[p] = rng.uniform01() >= spec.occlusion_prob;
                survivors += survives[p];
            }
        } while (survivors == 0 && spec.n_background == 0);

        // roles[i] = plant node id, or kNone for a background node.
        std::vector<int> roles;
        for (int p = 0; p < spec.pattern_size; ++p)
            if (survives[p]) roles.push_back(p);
        roles.insert(roles.end(), spec.n_background, kNone);
        for (std::size_t i = roles.size(); i > 1; --i)
            std::swap(roles[i - 1], roles[rng.below(i)]);

        Arg arg;
        arg.id = "pos_" + std::to_string(k);
        arg.schema = spec.schema;
        const int n = static_cast<int>(roles.size());
        for (int x = 0; x < n; ++x) {
            std::vector<Vec> attrs;
            for (int i = 0; i < np; ++i) {
                if (roles[x] != kNone)
                    attrs.push_back(perturb(rng, plant.node_attrs.at(roles[x])[i],
                                            spec.noise_sigma));
                else
                    attrs.push_back(draw_uniform_vec(rng, spec.schema.unary_dims[i],
                                                     spec.attr_min, spec.attr_max));
            }
            arg.nodes.push_back(std::move(attrs));
        }
        arg.pairwise.resize(static_cast<std::size_t>(n) * (n - 1));
        for (int x1 = 0; x1 < n; ++x1)
            for (int x2 = 0; x2 < n; ++x2) {
                if (x1 == x2) continue;
                std::vector<Vec> attrs;
                for (int j = 0; j < nq; ++j) {
                    if (roles[x1] != kNone && roles[x2] != kNone)
                        attrs.push_back(perturb(
                            rng, plant.edge_attrs.at({roles[x1], roles[x2]})[j],
                            spec.noise_sigma));
                    else
                        attrs.push_back(draw_uniform_vec(rng, spec.schema.pairwise_dims[j],
                                                         spec.attr_min, spec.attr_max));
                }
                arg.pairwise[Arg::pair_index(x1, x2, n)] = std::move(attrs);
            }

        std::map<NodeId, int> corr;
        for (int p = 0; p < spec.pattern_size; ++p) corr[p] = kOccluded;
        for (int x = 0; x < n; ++x)
            if (roles[x] != kNone) corr[roles[x]] = x;
        data.truth.correspondences.push_back(std::move(corr));
        data.positives.push_back(std::move(arg));
    }

    for (int l = 0; l < spec.n_negative; ++l) {
        Stream rng = stream_for(spec.rng_seed, 2, l);
        Arg arg;
        arg.id = "neg_" + std::to_string(l);
        arg.schema = spec.schema;
        const int n = spec.pattern_size + spec.n_background;
        for (int x = 0; x < n; ++x) {
            std::vector<Vec> attrs;
            for (int i = 0; i < np; ++i)
                attrs.push_back(draw_uniform_vec(rng, spec.schema.unary_dims[i], spec.attr_min,
                                                 spec.attr_max));
            arg.nodes.push_back(std::move(attrs));
        }
        arg.pairwise.resize(static_cast<std::size_t>(n) * (n - 1));
        for (int x1 = 0; x1 < n; ++x1)
            for (int x2 = 0; x2 < n; ++x2) {
                if (x1 == x2) continue;
                std::vector<Vec> attrs;
                for (int j = 0; j < nq; ++j)
                    attrs.push_back(draw_uniform_vec(rng, spec.schema.pairwise_dims[j],
                                                     spec.attr_min, spec.attr_max));
                arg.pairwise[Arg::pair_index(x1, x2, n)] = std::move(attrs);
            }
        data.negatives.push_back(std::move(arg));
    }

    return data;
}

RecoveryReport score_recovery(const Pattern& mined, std::span<const Assignment> assignments,
                              const GroundTruth& truth) {
    if (assignments.size() != truth.correspondences.size())
        throw std::invalid_argument("score_recovery: assignment/ARG count mismatch");
    RecoveryReport report;
    report.size_error = mined.node_count() - truth.plant.node_count();

    // inverse[k]: ARG node index -> plant node id
    std::vector<std::map<int, NodeId>> inverse(truth.correspondences.size());
    for (std::size_t k = 0; k < truth.correspondences.size(); ++k)
        for (const auto& [p, x] : truth.correspondences[k])
            if (x != kOccluded) inverse[k][x] = p;

    long real_matches = 0, planted_matches = 0;
    for (const auto& [s, _] : mined.node_attrs) {
        std::map<NodeId, int> votes;  // plant id -> count
        int background_votes = 0;
        for (std::size_t k = 0; k < assignments.size(); ++k) {
            const int x = assignments[k].target(s);
            if (x == kNone) continue;
            ++real_matches;
            auto hit = inverse[k].find(x);
            if (hit != inverse[k].end()) {
                ++planted_matches;
                ++votes[hit->second];
            } else {
                ++background_votes;
            }
        }
        NodeId winner = kNone;
        int best = background_votes;
        for (const auto& [p, count] : votes)
            if (count > best) {
                best = count;
                winner = p;
            }
        report.majority_vote[s] = winner;
    }

    report.precision = real_matches == 0
                           ? 0.0
                           : static_cast<double>(planted_matches) / real_matches;
    std::vector<NodeId> covered;
    for (const auto& [_, p] : report.majority_vote)
        if (p != kNone && std::find(covered.begin(), covered.end(), p) == covered.end())
            covered.push_back(p);
    report.recall = static_cast<double>(covered.size()) / truth.plant.node_count();
    return report;
}

std::string truth_to_json(const GroundTruth& truth) {
    json corr = json::array();
    for (const auto& m : truth.correspondences) {
        json per_arg = json::array();
        for (const auto& [p, x] : m)
            per_arg.push_back(json{{"node", p}, {"target", x == kOccluded ? json("occluded") : json(x)}});
        corr.push_back(per_arg);
    }
    json j{{"plant", json::parse(pattern_to_json(truth.plant))}, {"correspondences", corr}};
    return j.dump(2) + "\n";
}

GroundTruth truth_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("truth file: malformed JSON");
    GroundTruth truth;
    try {
        truth.plant = pattern_from_json(j.at("plant").dump());
        for (const json& per_arg : j.at("correspondences")) {
            std::map<NodeId, int> m;
            for (const json& entry : per_arg) {
                const NodeId p = entry.at("node").get<NodeId>();
                const json& t = entry.at("target");
                m[p] = t.is_string() ? kOccluded : t.get<int>();
            }
            truth.correspondences.push_back(std::move(m));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("truth file: ") + e.what());
    }
    return truth;
}

void save_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << truth_to_json(truth);
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

GroundTruth load_truth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return truth_from_json(ss.str());
}

}  // namespace vgm
