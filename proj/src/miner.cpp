#include "vgm/miner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "vgm/energy.hpp"
#include "vgm/kernels.hpp"
#include "vgm/margin_trainer.hpp"
#include "vgm/matcher.hpp"

namespace vgm {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double weighted_sq_diff(const Vec& weights, const std::vector<Vec>& a,
                        const std::vector<Vec>& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        e += weights[i] * kernels::squared_l2_diff(a[i], b[i]);
    return e;
}

// Attributes used for a possibly-tentative edge (s,t): the stored ones when
// the edge exists, otherwise the matched-pair mean.
std::optional<std::vector<Vec>> resolve_edge_attrs(const Pattern& pattern, NodeId s, NodeId t,
                                                   std::span<const Arg> args,
                                                   std::span<const Assignment> assignments) {
    auto it = pattern.edge_attrs.find({s, t});
    if (it != pattern.edge_attrs.end()) return it->second;
    return estimate_pair_attrs(pattern, s, t, args, assignments);
}

// sum over ARGs of the (unnormalized) pairwise penalty of edge (s,t).
double edge_q_sum(const Pattern& pattern, NodeId s, NodeId t,
                  const std::optional<std::vector<Vec>>& attrs, std::span<const Arg> args,
                  std::span<const Assignment> assignments) {
    double sum = 0.0;
    for (std::size_t k = 0; k < args.size(); ++k) {
        const int xs = assignments[k].target(s);
        const int xt = assignments[k].target(t);
        if (xs == kNone || xt == kNone) {
            sum += pattern.params.q_none;
        } else {
            sum += weighted_sq_diff(pattern.params.w_pairwise, *attrs,
                                    args[k].pair_attrs(xs, xt));
        }
    }
    return sum;
}

double mean_unary(const Pattern& pattern, NodeId s, std::span<const Arg> args,
                  std::span<const Assignment> assignments) {
    double sum = 0.0;
    for (std::size_t k = 0; k < args.size(); ++k)
        sum += unary_penalty(pattern, s, args[k], assignments[k].target(s));
    return sum / static_cast<double>(args.size());
}

std::vector<Vec> zero_attrs(const std::vector<int>& dims) {
    std::vector<Vec> attrs;
    attrs.reserve(dims.size());
    for (int d : dims) attrs.emplace_back(d, 0.0);
    return attrs;
}

}  // namespace

Pattern estimate_attributes(const Pattern& pattern, std::span<const Arg> args,
                            std::span<const Assignment> assignments) {
    if (args.size() != assignments.size())
        throw std::invalid_argument("estimate_attributes: one assignment per ARG required");
    Pattern out = pattern;
    const int np = pattern.schema.unary_types();
    for (auto& [s, attrs] : out.node_attrs) {
        int count = 0;
        std::vector<Vec> sums;
        for (std::size_t k = 0; k < args.size(); ++k) {
            const int xs = assignments[k].target(s);
            if (xs == kNone) continue;
            const auto& inst = args[k].nodes[xs];
            if (count == 0) {
                sums = inst;
            } else {
                for (int i = 0; i < np; ++i)
                    for (std::size_t c = 0; c < sums[i].size(); ++c) sums[i][c] += inst[i][c];
            }
            ++count;
        }
        if (count == 0) continue;  // mean undefined, keep previous value
        for (auto& v : sums)
            for (double& x : v) x /= count;
        attrs = std::move(sums);
    }
    const int nq = pattern.schema.pairwise_types();
    for (auto& [edge, attrs] : out.edge_attrs) {
        int count = 0;
        std::vector<Vec> sums;
        for (std::size_t k = 0; k < args.size(); ++k) {
            const int xs = assignments[k].target(edge.first);
            const int xt = assignments[k].target(edge.second);
            if (xs == kNone || xt == kNone) continue;
            const auto& inst = args[k].pair_attrs(xs, xt);
            if (count == 0) {
                sums = inst;
            } else {
                for (int j = 0; j < nq; ++j)
                    for (std::size_t c = 0; c < sums[j].size(); ++c) sums[j][c] += inst[j][c];
            }
            ++count;
        }
        if (count == 0) continue;
        for (auto& v : sums)
            for (double& x : v) x /= count;
        attrs = std::move(sums);
    }
    return out;
}

std::optional<std::vector<Vec>> estimate_pair_attrs(const Pattern&, NodeId s, NodeId t,
                                                    std::span<const Arg> args,
                                                    std::span<const Assignment> assignments) {
    std::vector<Vec> sums;
    int count = 0;
    for (std::size_t k = 0; k < args.size(); ++k) {
        const int xs = assignments[k].target(s);
        const int xt = assignments[k].target(t);
        if (xs == kNone || xt == kNone) continue;
        const auto& inst = args[k].pair_attrs(xs, xt);
        if (count == 0) {
            sums = inst;
        } else {
            for (std::size_t j = 0; j < sums.size(); ++j)
                for (std::size_t c = 0; c < sums[j].size(); ++c) sums[j][c] += inst[j][c];
        }
        ++count;
    }
    if (count == 0) return std::nullopt;
    for (auto& v : sums)
        for (double& x : v) x /= count;
    return sums;
}

std::vector<Edge> tentative_edge_set(const Pattern& pattern, NodeId s,
                                     std::span<const Arg> args,
                                     std::span<const Assignment> assignments, int d) {
    const auto ids = pattern.node_ids();
    if (ids.size() < 2) return {};
    const int d1 = std::min<long long>(d, static_cast<long long>(ids.size()) - 1);

    std::vector<std::pair<double, NodeId>> scored;
    for (NodeId t : ids) {
        if (t == s) continue;
        const auto attrs = resolve_edge_attrs(pattern, s, t, args, assignments);
        scored.push_back({edge_q_sum(pattern, s, t, attrs, args, assignments) / d1, t});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    std::vector<Edge> edges;
    for (int i = 0; i < d1; ++i) edges.push_back({s, scored[i].second});
    return edges;
}

MiningState delete_worst_node(MiningState state, std::span<const Arg> args, double tau, int d) {
    const Pattern& pattern = state.pattern;
    const auto ids = pattern.node_ids();
    if (ids.size() < 2) return state;

    NodeId worst = kNone;
    double worst_gain = 0.0;
    for (NodeId s : ids) {
        const auto edges = tentative_edge_set(pattern, s, args, state.assignments, d);
        const int deg = static_cast<int>(edges.size());
        // Mean node energy of s under its tentative edge set.
        double energy = 0.0;
        for (std::size_t k = 0; k < args.size(); ++k) {
            const int xs = state.assignments[k].target(s);
            double e = unary_penalty(pattern, s, args[k], xs);
            for (const Edge& edge : edges) {
                const auto attrs =
                    resolve_edge_attrs(pattern, edge.first, edge.second, args, state.assignments);
                const int xt = state.assignments[k].target(edge.second);
                if (xs == kNone || xt == kNone)
                    e += pattern.params.q_none / deg;
                else
                    e += weighted_sq_diff(pattern.params.w_pairwise, *attrs,
                                          args[k].pair_attrs(xs, xt)) /
                         deg;
            }
            energy += e;
        }
        energy /= static_cast<double>(args.size());
        const double gain = tau - energy;  // objective change if s is removed
        if (gain < worst_gain) {
            worst_gain = gain;
            worst = s;
        }
    }
    if (worst == kNone) return state;

    state.pattern.node_attrs.erase(worst);
    for (auto it = state.pattern.edge_attrs.begin(); it != state.pattern.edge_attrs.end();) {
        if (it->first.first == worst || it->first.second == worst)
            it = state.pattern.edge_attrs.erase(it);
        else
            ++it;
    }
    for (auto& assignment : state.assignments) assignment.map.erase(worst);
    return state;
}

LabelingProblem build_discovery_problem(const Pattern& pattern, std::span<const Arg> args,
                                        std::span<const Assignment> assignments,
                                        std::span<const int> participating,
                                        const std::vector<std::vector<int>>& candidates,
                                        std::span<const NodeId> refined_edges, int d) {
    const auto ids = pattern.node_ids();
    const double n_pos = static_cast<double>(args.size());
    const int d2 = static_cast<int>(
        std::min<long long>(d, static_cast<long long>(ids.size())));
    const double ey_size = refined_edges.empty() ? static_cast<double>(d2)
                                                 : static_cast<double>(refined_edges.size());

    // matched_count[t] = number of ARGs where pattern node t has a real label
    std::map<NodeId, double> matched_count;
    for (NodeId t : ids) {
        double c = 0.0;
        for (const auto& assignment : assignments) c += assignment.is_matched(t);
        matched_count[t] = c;
    }

    const Vec& wq = pattern.params.w_pairwise;
    const Vec& wp = pattern.params.w_unary;
    const double q_none = pattern.params.q_none;

    // Pairwise-consistency cost of mapping the new node to `a` in ARG k and
    // `b` in ARG l, seen across existing node t.
    auto m_term = [&](int k, int l, int a, int b, NodeId t) {
        const int xtk = assignments[k].target(t);
        const int xtl = assignments[l].target(t);
        if (xtk != kNone && xtl != kNone) {
            double num = 0.0;
            const auto& ak = args[k].pair_attrs(a, xtk);
            const auto& al = args[l].pair_attrs(b, xtl);
            for (std::size_t j = 0; j < wq.size(); ++j)
                num += wq[j] * kernels::squared_l2_diff(ak[j], al[j]);
            return num / (2.0 * ey_size * n_pos * matched_count.at(t));
        }
        return q_none / (ey_size * n_pos * (n_pos + matched_count.at(t)));
    };

    auto pair_cost = [&](int k, int l, int a, int b) {
        double structural = 0.0;
        if (refined_edges.empty()) {
            std::vector<double> ms;
            ms.reserve(ids.size());
            for (NodeId t : ids) ms.push_back(m_term(k, l, a, b, t));
            std::sort(ms.begin(), ms.end());
            for (int i = 0; i < d2; ++i) structural += ms[i];
        } else {
            for (NodeId t : refined_edges) structural += m_term(k, l, a, b, t);
        }
        double appearance = 0.0;
        for (std::size_t i = 0; i < wp.size(); ++i)
            appearance += wp[i] * kernels::squared_l2_diff(args[k].nodes[a][i],
                                                           args[l].nodes[b][i]);
        return structural + appearance / (2.0 * n_pos * n_pos);
    };

    LabelingProblem problem;
    const int vars = static_cast<int>(participating.size());
    problem.labels.resize(vars);
    problem.unary.resize(vars);
    for (int vi = 0; vi < vars; ++vi) {
        const int k = participating[vi];
        problem.labels[vi] = candidates[k];
        problem.unary[vi].resize(candidates[k].size());
        for (std::size_t a = 0; a < candidates[k].size(); ++a)
            problem.unary[vi][a] = pair_cost(k, k, candidates[k][a], candidates[k][a]);
    }
    for (int vi = 0; vi < vars; ++vi)
        for (int vj = 0; vj < vars; ++vj) {
            if (vi == vj) continue;
            const int k = participating[vi];
            const int l = participating[vj];
            LabelingProblem::PairTerm pt;
            pt.u = vi;
            pt.v = vj;
            pt.cost.resize(candidates[k].size() * candidates[l].size());
            for (std::size_t a = 0; a < candidates[k].size(); ++a)
                for (std::size_t b = 0; b < candidates[l].size(); ++b)
                    pt.cost[a * candidates[l].size() + b] =
                        pair_cost(k, l, candidates[k][a], candidates[l][b]);
            problem.pairs.push_back(std::move(pt));
        }
    return problem;
}

DiscoveryResult discover_node_detail(const Pattern& pattern, std::span<const Arg> args,
                                     std::span<const Assignment> assignments,
                                     const MiningConfig& cfg) {
    DiscoveryResult result;
    result.node = pattern.next_id;
    const auto ids = pattern.node_ids();
    const int d2 =
        static_cast<int>(std::min<long long>(cfg.d, static_cast<long long>(ids.size())));

    // Candidate labels: ARG nodes not used by the current assignment. ARGs
    // with nothing left sit out and will map the new node to kNone.
    std::vector<std::vector<int>> candidates(args.size());
    for (std::size_t k = 0; k < args.size(); ++k) {
        std::vector<char> used(args[k].node_count(), 0);
        for (const auto& [_, x] : assignments[k].map)
            if (x != kNone) used[x] = 1;
        for (int x = 0; x < args[k].node_count(); ++x)
            if (!used[x]) candidates[k].push_back(x);
        if (!candidates[k].empty()) result.participating.push_back(static_cast<int>(k));
    }
    if (result.participating.empty()) return result;

    auto solve = [&](const LabelingProblem& problem, std::uint64_t salt) {
        if (cfg.solver == SolverKind::kExact && exact_feasible(problem, kExactSearchBudget))
            return solve_exact(problem, kExactSearchBudget);
        return solve_icm(problem, cfg.restarts, mix_seed(cfg.rng_seed, salt));
    };

    // Step 1: rough labels with the edge set optimized inside each term.
    const LabelingProblem step1 = build_discovery_problem(pattern, args, assignments,
                                                          result.participating, candidates,
                                                          {}, cfg.d);
    const LabelingResult sol1 = solve(step1, 0xd15c0);
    result.step1_labels = sol1.label_value;
    result.step1_energy = sol1.energy;

    auto label_of_arg = [&](const std::vector<int>& labels, std::size_t k) {
        for (std::size_t vi = 0; vi < result.participating.size(); ++vi)
            if (result.participating[vi] == static_cast<int>(k)) return labels[vi];
        return kNone;
    };

    // Mean matched pair attributes between the candidate node and t.
    auto estimate_yt_attrs = [&](const std::vector<int>& labels, NodeId t) {
        std::vector<Vec> sums;
        int count = 0;
        for (std::size_t k = 0; k < args.size(); ++k) {
            const int xy = label_of_arg(labels, k);
            const int xt = assignments[k].target(t);
            if (xy == kNone || xt == kNone) continue;
            const auto& inst = args[k].pair_attrs(xy, xt);
            if (count == 0) {
                sums = inst;
            } else {
                for (std::size_t j = 0; j < sums.size(); ++j)
                    for (std::size_t c = 0; c < sums[j].size(); ++c) sums[j][c] += inst[j][c];
            }
            ++count;
        }
        if (count == 0) return std::optional<std::vector<Vec>>{};
        for (auto& v : sums)
            for (double& x : v) x /= count;
        return std::optional<std::vector<Vec>>{std::move(sums)};
    };

    // Step 2: conservative edge set, ranked by summed pairwise penalty.
    std::vector<std::pair<double, NodeId>> scored;
    for (NodeId t : ids) {
        const auto attrs = estimate_yt_attrs(result.step1_labels, t);
        double sum = 0.0;
        for (std::size_t k = 0; k < args.size(); ++k) {
            const int xy = label_of_arg(result.step1_labels, k);
            const int xt = assignments[k].target(t);
            if (xy == kNone || xt == kNone)
                sum += pattern.params.q_none / d2;
            else
                sum += weighted_sq_diff(pattern.params.w_pairwise, *attrs,
                                        args[k].pair_attrs(xy, xt)) /
                       d2;
        }
        scored.push_back({sum, t});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    for (int i = 0; i < d2; ++i) result.edge_targets.push_back(scored[i].second);

    // Step 3: refine labels with the edge set fixed.
    const LabelingProblem step3 = build_discovery_problem(pattern, args, assignments,
                                                          result.participating, candidates,
                                                          result.edge_targets, cfg.d);
    const LabelingResult sol3 = solve(step3, 0x2ef1);
    result.step3_labels = sol3.label_value;
    result.step3_energy = sol3.energy;

    // Step 4: estimate the candidate's attributes from the refined labels.
    const int np = pattern.schema.unary_types();
    std::vector<Vec> unary_sums;
    int unary_count = 0;
    for (std::size_t k = 0; k < args.size(); ++k) {
        const int xy = label_of_arg(result.step3_labels, k);
        if (xy == kNone) continue;
        const auto& inst = args[k].nodes[xy];
        if (unary_count == 0) {
            unary_sums = inst;
        } else {
            for (int i = 0; i < np; ++i)
                for (std::size_t c = 0; c < unary_sums[i].size(); ++c)
                    unary_sums[i][c] += inst[i][c];
        }
        ++unary_count;
    }
    for (auto& v : unary_sums)
        for (double& x : v) x /= unary_count;
    result.node_attrs = std::move(unary_sums);
    for (NodeId t : result.edge_targets) {
        auto attrs = estimate_yt_attrs(result.step3_labels, t);
        result.edge_attr_map[t] =
            attrs ? std::move(*attrs) : zero_attrs(pattern.schema.pairwise_dims);
    }

    // Acceptance gate: mean node energy of the candidate under its new edges.
    double energy_sum = 0.0;
    for (std::size_t k = 0; k < args.size(); ++k) {
        const int xy = label_of_arg(result.step3_labels, k);
        double e = (xy == kNone)
                       ? pattern.params.p_none
                       : [&] {
                             double u = 0.0;
                             for (int i = 0; i < np; ++i)
                                 u += pattern.params.w_unary[i] *
                                      kernels::squared_l2_diff(result.node_attrs[i],
                                                               args[k].nodes[xy][i]);
                             return u;
                         }();
        for (NodeId t : result.edge_targets) {
            const int xt = assignments[k].target(t);
            if (xy == kNone || xt == kNone)
                e += pattern.params.q_none / d2;
            else
                e += weighted_sq_diff(pattern.params.w_pairwise, result.edge_attr_map.at(t),
                                      args[k].pair_attrs(xy, xt)) /
                     d2;
        }
        energy_sum += e;
    }
    result.mean_energy = energy_sum / static_cast<double>(args.size());
    result.added = result.mean_energy < cfg.tau;
    return result;
}

MiningState discover_node(MiningState state, std::span<const Arg> args,
                          const MiningConfig& cfg) {
    const DiscoveryResult detail =
        discover_node_detail(state.pattern, args, state.assignments, cfg);
    if (!detail.added) return state;

    const NodeId y = state.pattern.fresh_id();
    state.pattern.node_attrs[y] = detail.node_attrs;
    for (const auto& [t, attrs] : detail.edge_attr_map) state.pattern.edge_attrs[{y, t}] = attrs;
    for (std::size_t k = 0; k < state.assignments.size(); ++k) {
        int label = kNone;
        for (std::size_t vi = 0; vi < detail.participating.size(); ++vi)
            if (detail.participating[vi] == static_cast<int>(k)) label = detail.step3_labels[vi];
        state.assignments[k].map[y] = label;
    }
    return state;
}

MiningState fill_edges(MiningState state, std::span<const Arg> args, double tau) {
    const Pattern& pattern = state.pattern;
    const auto ids = pattern.node_ids();
    const double n_pos = static_cast<double>(args.size());

    std::map<Edge, std::vector<Vec>> new_edges;
    for (NodeId s : ids) {
        struct Candidate {
            double score;  // unnormalized summed pairwise penalty
            NodeId t;
            std::optional<std::vector<Vec>> attrs;
        };
        std::vector<Candidate> cands;
        for (NodeId t : ids) {
            if (t == s) continue;
            auto attrs = resolve_edge_attrs(pattern, s, t, args, state.assignments);
            const double score = edge_q_sum(pattern, s, t, attrs, args, state.assignments);
            cands.push_back({score, t, std::move(attrs)});
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.score != b.score) return a.score < b.score;
            return a.t < b.t;
        });

        const double unary_mean = mean_unary(pattern, s, args, state.assignments);
        double kept_sum = 0.0;
        int kept = 0;
        for (const Candidate& c : cands) {
            const double energy = unary_mean + (kept_sum + c.score) / (n_pos * (kept + 1));
            if (!(energy < tau)) break;  // the offending edge is not kept
            kept_sum += c.score;
            ++kept;
            new_edges[{s, c.t}] =
                c.attrs ? *c.attrs : zero_attrs(pattern.schema.pairwise_dims);
        }
    }
    state.pattern.edge_attrs = std::move(new_edges);
    return state;
}

MatchParams update_none_penalties(const Pattern& pattern, std::span<const Arg> pos_args,
                                  std::span<const Arg> neg_args,
                                  std::span<const Assignment> pos_assignments,
                                  std::span<const Assignment> neg_assignments, double alpha) {
    auto accumulate = [&](std::span<const Arg> args, std::span<const Assignment> assignments,
                          double& p_mean, double& q_mean) {
        double p_sum = 0.0, q_sum = 0.0;
        long count = 0;
        for (std::size_t k = 0; k < args.size(); ++k) {
            for (const auto& [s, _] : pattern.node_attrs) {
                const int xs = assignments[k].target(s);
                if (xs == kNone) continue;
                ++count;
                p_sum += unary_penalty(pattern, s, args[k], xs);
                const auto targets = pattern.out_targets(s);
                const int deg = static_cast<int>(targets.size());
                for (NodeId t : targets) {
                    const int xt = assignments[k].target(t);
                    if (xt == kNone) continue;
                    q_sum += pairwise_penalty(pattern, {s, t}, args[k], xs, xt, deg);
                }
            }
        }
        if (count == 0) return false;
        p_mean = p_sum / count;
        q_mean = q_sum / count;
        return true;
    };

    MatchParams params = pattern.params;
    double p_pos = 0.0, q_pos = 0.0, p_neg = 0.0, q_neg = 0.0;
    if (!accumulate(pos_args, pos_assignments, p_pos, q_pos)) return params;
    if (!accumulate(neg_args, neg_assignments, p_neg, q_neg)) return params;

    // Penalties live in (0, +inf]; the interpolation can dip below zero when
    // positives match worse than negatives, so floor it.
    params.p_none = std::max(p_pos + alpha * (p_neg - p_pos), 1e-9);
    params.q_none = std::max(q_pos + alpha * (q_neg - q_pos), 1e-9);
    return params;
}

MineResult mine(const Pattern& init, std::span<const Arg> pos_args,
                std::span<const Arg> neg_args, const MiningConfig& cfg, std::ostream* log) {
    cfg.validate();
    init.validate();
    for (const Arg& arg : pos_args)
        if (arg.schema != init.schema)
            throw SchemaError("positive ARG '" + arg.id + "' does not match the pattern schema");
    for (const Arg& arg : neg_args)
        if (arg.schema != init.schema)
            throw SchemaError("negative ARG '" + arg.id + "' does not match the pattern schema");
    if (pos_args.empty()) throw std::invalid_argument("mine: need at least one positive ARG");

    MineResult result;
    MiningState& state = result.state;
    state.pattern = init;

    double prev_objective = 0.0;
    bool have_prev = false;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();

        // Op 1: match all positives, then apply the per-iteration quality
        // filters to decide which ARGs drive this iteration.
        const std::vector<MatchResult> matches = match_many(state.pattern, pos_args, cfg);
        state.assignments.clear();
        for (const MatchResult& m : matches) state.assignments.push_back(m.assignment);

        std::vector<std::size_t> active;
        const int v_before = state.pattern.node_count();
        for (std::size_t k = 0; k < pos_args.size(); ++k) {
            const double coverage =
                static_cast<double>(state.assignments[k].matched_count()) / v_before;
            if (coverage >= cfg.min_match_fraction) active.push_back(k);
        }
        if (active.empty())
            throw Error("mine: every positive ARG fell below min_match_fraction=" +
                        std::to_string(cfg.min_match_fraction) + " in iteration " +
                        std::to_string(iter));
        std::stable_sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
            return matches[a].energy < matches[b].energy;
        });
        const std::size_t keep = std::min<std::size_t>(
            active.size(),
            static_cast<std::size_t>(
                std::ceil(cfg.top_fraction * static_cast<double>(active.size()))));
        active.resize(std::max<std::size_t>(keep, 1));
        std::sort(active.begin(), active.end());

        std::vector<Arg> act_args;
        std::vector<Assignment> act_asg;
        for (std::size_t k : active) {
            act_args.push_back(pos_args[k]);
            act_asg.push_back(state.assignments[k]);
        }

        // Op 2
        state.pattern = estimate_attributes(state.pattern, act_args, act_asg);

        // Op 3
        NodeId deleted = kNone;
        {
            MiningState sub{state.pattern, act_asg, 0, {}};
            const auto before = state.pattern.node_ids();
            sub = delete_worst_node(std::move(sub), act_args, cfg.tau, cfg.d);
            for (NodeId s : before)
                if (!sub.pattern.has_node(s)) deleted = s;
            state.pattern = std::move(sub.pattern);
            act_asg = std::move(sub.assignments);
            if (deleted != kNone)
                for (auto& assignment : state.assignments) assignment.map.erase(deleted);
        }

        // Op 4
        NodeId added = kNone;
        {
            const DiscoveryResult detail =
                discover_node_detail(state.pattern, act_args, act_asg, cfg);
            if (detail.added) {
                added = state.pattern.fresh_id();
                state.pattern.node_attrs[added] = detail.node_attrs;
                for (const auto& [t, attrs] : detail.edge_attr_map)
                    state.pattern.edge_attrs[{added, t}] = attrs;
                std::map<std::size_t, int> label_by_active;
                for (std::size_t vi = 0; vi < detail.participating.size(); ++vi)
                    label_by_active[active[detail.participating[vi]]] = detail.step3_labels[vi];
                for (std::size_t k = 0; k < state.assignments.size(); ++k) {
                    auto hit = label_by_active.find(k);
                    state.assignments[k].map[added] =
                        hit == label_by_active.end() ? kNone : hit->second;
                }
                for (std::size_t i = 0; i < active.size(); ++i)
                    act_asg[i].map[added] = state.assignments[active[i]].map.at(added);
            }
        }

        // Op 5
        {
            MiningState sub{state.pattern, act_asg, 0, {}};
            sub = fill_edges(std::move(sub), act_args, cfg.tau);
            state.pattern = std::move(sub.pattern);
        }

        // Op 6: retrain weights and none penalties against the negatives.
        if (!neg_args.empty()) {
            Pattern probe = state.pattern;
            probe.params.p_none = kInf;
            probe.params.q_none = kInf;
            const std::vector<MatchResult> neg_matches = match_many(probe, neg_args, cfg);
            std::vector<Assignment> neg_asg;
            for (const MatchResult& m : neg_matches) neg_asg.push_back(m.assignment);

            std::vector<MarginSample> pos_samples, neg_samples;
            for (std::size_t i = 0; i < act_args.size(); ++i) {
                try {
                    pos_samples.push_back(
                        {extract_features(state.pattern, act_args[i], act_asg[i]), true});
                } catch (const DegenerateSample&) {
                }
            }
            for (std::size_t l = 0; l < neg_args.size(); ++l) {
                try {
                    neg_samples.push_back(
                        {extract_features(state.pattern, neg_args[l], neg_asg[l]), false});
                } catch (const DegenerateSample&) {
                }
            }
            if (!pos_samples.empty() && !neg_samples.empty()) {
                const TrainResult trained = train(pos_samples, neg_samples, cfg.c_svm);
                Vec prev = state.pattern.params.w_unary;
                prev.insert(prev.end(), state.pattern.params.w_pairwise.begin(),
                            state.pattern.params.w_pairwise.end());
                const Vec blended = postprocess_and_blend(trained.w, prev, cfg.lambda);
                const int np = state.pattern.schema.unary_types();
                state.pattern.params.w_unary.assign(blended.begin(), blended.begin() + np);
                state.pattern.params.w_pairwise.assign(blended.begin() + np, blended.end());
            }
            state.pattern.params = update_none_penalties(state.pattern, act_args, neg_args,
                                                         act_asg, neg_asg, cfg.alpha);
        }

        const double objective = pattern_objective(state.pattern, act_args, act_asg, cfg.tau);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        IterationRecord rec;
        rec.iteration = iter;
        rec.num_nodes = state.pattern.node_count();
        rec.num_edges = state.pattern.edge_count();
        rec.objective = objective;
        rec.added = added;
        rec.deleted = deleted;
        rec.wall_time_s = wall;
        rec.active_args = static_cast<int>(active.size());
        state.history.push_back(rec);
        state.iteration = iter + 1;

        if (log) {
            (*log) << "iter=" << iter << " nodes=" << rec.num_nodes
                   << " edges=" << rec.num_edges << " objective=" << rec.objective
                   << " added=" << (added == kNone ? std::string("-") : std::to_string(added))
                   << " deleted="
                   << (deleted == kNone ? std::string("-") : std::to_string(deleted))
                   << " active=" << rec.active_args << " wall_s=" << wall << '\n';
        }

        const bool structurally_stable = added == kNone && deleted == kNone;
        if (structurally_stable && have_prev &&
            std::abs(prev_objective - objective) < cfg.energy_tol) {
            result.converged = true;
            break;
        }
        prev_objective = objective;
        have_prev = true;
    }
    return result;
}

}  // namespace vgm
