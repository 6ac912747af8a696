#pragma once

#include <span>

#include "vgm/arg_model.hpp"
#include "vgm/labeling.hpp"

// Graph matching: minimize the total match energy of one pattern against one
// ARG over all assignments that are injective on real labels and may use the
// occlusion label. Injectivity is enforced structurally in the solvers
// (candidate sets exclude labels already taken), so returned assignments are
// one-to-one on real nodes by construction.

namespace vgm {

struct SolverMeta {
    long iterations = 0;
    bool exact = false;
};

struct MatchResult {
    Assignment assignment;
    double energy = 0.0;
    SolverMeta meta;
};

// Enumeration budget for the exact solver: (n+1)^|V| <= this.
inline constexpr double kExactSearchBudget = 1e7;

// Builds the QAP cost tables for one pattern/ARG pair. Variables follow the
// pattern's node ids in ascending order; labels are the ARG node indices in
// ascending order followed by kNone (so ties break toward the lowest real
// label and kNone loses ties).
LabelingProblem build_match_problem(const Pattern& pattern, const Arg& arg);

bool exact_match_feasible(const Pattern& pattern, const Arg& arg);

// Globally minimal assignment; throws std::length_error when the instance
// exceeds the enumeration budget.
MatchResult match_exact(const Pattern& pattern, const Arg& arg);

// Coordinate-descent label updates from `restarts` random initializations;
// deterministic given the seed, never worse than any restart's start point.
MatchResult match_approx(const Pattern& pattern, const Arg& arg, int restarts,
                         std::uint64_t seed);

// Per-ARG independent matching in input order. With SolverKind::kExact the
// exact solver is used whenever the budget allows and the approximate solver
// otherwise; per-ARG seeds are derived from cfg.rng_seed and the ARG index.
std::vector<MatchResult> match_many(const Pattern& pattern, std::span<const Arg> args,
                                    const MiningConfig& cfg);

}  // namespace vgm
