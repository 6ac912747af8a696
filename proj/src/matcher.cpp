#include "vgm/matcher.hpp"

#include <stdexcept>

#include "vgm/energy.hpp"

namespace vgm {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

MatchResult package(const Pattern& pattern, const Arg& arg, const LabelingResult& sol) {
    const auto ids = pattern.node_ids();
    MatchResult res;
    res.assignment.arg_id = arg.id;
    for (std::size_t i = 0; i < ids.size(); ++i)
        res.assignment.map[ids[i]] = sol.label_value[i];
    res.energy = sol.energy;
    res.meta.iterations = sol.iterations;
    res.meta.exact = sol.exact;
    return res;
}

}  // namespace

LabelingProblem build_match_problem(const Pattern& pattern, const Arg& arg) {
    if (pattern.schema != arg.schema)
        throw SchemaError("pattern and ARG '" + arg.id + "' use different schemas");
    const auto ids = pattern.node_ids();
    const int m = static_cast<int>(ids.size());
    const int n = arg.node_count();

    LabelingProblem problem;
    problem.distinct_real_labels = true;
    problem.labels.resize(m);
    problem.unary.resize(m);

    std::vector<int> var_of_node(ids.empty() ? 0 : ids.back() + 1, -1);
    for (int i = 0; i < m; ++i) var_of_node[ids[i]] = i;

    std::vector<int> label_values(n + 1);
    for (int x = 0; x < n; ++x) label_values[x] = x;
    label_values[n] = kNone;

    for (int i = 0; i < m; ++i) {
        problem.labels[i] = label_values;
        problem.unary[i].resize(n + 1);
        for (int a = 0; a <= n; ++a)
            problem.unary[i][a] = unary_penalty(pattern, ids[i], arg, label_values[a]);
    }

    for (const auto& [edge, _] : pattern.edge_attrs) {
        const int deg = pattern.out_degree(edge.first);
        LabelingProblem::PairTerm pt;
        pt.u = var_of_node[edge.first];
        pt.v = var_of_node[edge.second];
        pt.cost.resize(static_cast<std::size_t>(n + 1) * (n + 1));
        for (int a = 0; a <= n; ++a)
            for (int b = 0; b <= n; ++b)
                pt.cost[a * (n + 1) + b] = pairwise_penalty(pattern, edge, arg, label_values[a],
                                                            label_values[b], deg);
        problem.pairs.push_back(std::move(pt));
    }
    return problem;
}

bool exact_match_feasible(const Pattern& pattern, const Arg& arg) {
    double space = 1.0;
    for (int i = 0; i < pattern.node_count(); ++i) {
        space *= arg.node_count() + 1;
        if (space > kExactSearchBudget) return false;
    }
    return true;
}

MatchResult match_exact(const Pattern& pattern, const Arg& arg) {
    const LabelingProblem problem = build_match_problem(pattern, arg);
    if (!exact_feasible(problem, kExactSearchBudget))
        throw std::length_error("match_exact: instance too large, use match_approx");
    return package(pattern, arg, solve_exact(problem, kExactSearchBudget));
}

MatchResult match_approx(const Pattern& pattern, const Arg& arg, int restarts,
                         std::uint64_t seed) {
    if (restarts < 1) throw std::invalid_argument("match_approx: restarts must be >= 1");
    const LabelingProblem problem = build_match_problem(pattern, arg);
    return package(pattern, arg, solve_icm(problem, restarts, seed));
}

std::vector<MatchResult> match_many(const Pattern& pattern, std::span<const Arg> args,
                                    const MiningConfig& cfg) {
    std::vector<MatchResult> results;
    results.reserve(args.size());
    for (std::size_t k = 0; k < args.size(); ++k) {
        const bool exact = cfg.solver == SolverKind::kExact && exact_match_feasible(pattern, args[k]);
        if (exact)
            results.push_back(match_exact(pattern, args[k]));
        else
            results.push_back(match_approx(pattern, args[k], cfg.restarts,
                                           mix_seed(cfg.rng_seed, k)));
    }
    return results;
}

}  // namespace vgm
