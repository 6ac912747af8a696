#pragma once

#include <cstdint>
#include <vector>

// Generic minimizer for small discrete labeling problems with unary and
// pairwise cost tables. Backs both the graph-matching QAP and the
// node-discovery MRF. Costs must be >= 0 (branch-and-bound relies on it);
// +inf entries mark forbidden configurations.

namespace vgm {

struct LabelingProblem {
    // labels[v] = candidate label values of variable v, in preference order:
    // ties are broken toward the earlier label.
    std::vector<std::vector<int>> labels;
    // unary[v][a] = cost of labels[v][a]
    std::vector<std::vector<double>> unary;
    struct PairTerm {
        int u = 0;
        int v = 0;
        // cost[a * labels[v].size() + b]
        std::vector<double> cost;
    };
    std::vector<PairTerm> pairs;
    // When set, no two variables may take the same real label value;
    // negative label values (the occlusion label) are exempt.
    bool distinct_real_labels = false;

    int var_count() const { return static_cast<int>(labels.size()); }
    // Enumeration size: product of label-set sizes (saturating).
    double search_space() const;
    // Total cost of a full labeling given by label indices; +inf if the
    // distinctness constraint is violated.
    double energy_of(const std::vector<int>& label_index) const;
};

struct LabelingResult {
    std::vector<int> label_index;  // per variable, index into labels[v]
    std::vector<int> label_value;
    double energy = 0.0;
    long iterations = 0;  // nodes expanded / sweeps executed
    bool exact = false;
};

// True when exhaustive search fits the enumeration budget.
bool exact_feasible(const LabelingProblem& problem, double budget = 1e7);

// Depth-first branch and bound over all labelings. The first optimum in
// lexicographic label-preference order wins ties. Throws std::length_error
// when the budget is exceeded.
LabelingResult solve_exact(const LabelingProblem& problem, double budget = 1e7);

// Coordinate-descent sweeps (each variable in turn takes the label that
// minimizes its conditional cost) from `restarts` random initializations;
// deterministic given the seed.
LabelingResult solve_icm(const LabelingProblem& problem, int restarts, std::uint64_t seed);

}  // namespace vgm
