#pragma once

#include <iosfwd>
#include <optional>
#include <span>

#include "vgm/arg_model.hpp"
#include "vgm/labeling.hpp"

// The mining loop: starting from a rough template, one iteration matches the
// pattern to the positive ARGs, re-estimates attributes, deletes at most one
// redundant node, discovers at most one new node, rebuilds every node's
// outgoing edge set, and retrains the matching parameters. Iterations repeat
// until the node set is stable and the objective stops improving, or the
// iteration cap is hit.
//
// Pairwise terms for a candidate edge (s,t) use the pattern's stored
// attributes when the edge exists and the mean of the matched ARG pair
// attributes otherwise (the same mean attribute estimation would produce for
// that edge under the current assignments).

namespace vgm {

struct IterationRecord {
    int iteration = 0;
    int num_nodes = 0;
    int num_edges = 0;
    double objective = 0.0;
    NodeId added = kNone;    // kNone when nothing was added
    NodeId deleted = kNone;  // kNone when nothing was deleted
    double wall_time_s = 0.0;
    int active_args = 0;     // positives surviving the quality filters
};

struct MiningState {
    Pattern pattern;
    std::vector<Assignment> assignments;  // one per positive ARG
    int iteration = 0;
    std::vector<IterationRecord> history;
};

// Op 2: replace each unary attribute by the mean of its matched ARG node
// attributes and each edge attribute by the mean over ARGs where both
// endpoints are matched. Attributes with no matched instance keep their
// previous value. Structure and params are untouched.
Pattern estimate_attributes(const Pattern& pattern, std::span<const Arg> args,
                            std::span<const Assignment> assignments);

// Mean of the matched ARG pair attributes for (s,t), or nothing when no ARG
// has both endpoints matched.
std::optional<std::vector<Vec>> estimate_pair_attrs(const Pattern& pattern, NodeId s, NodeId t,
                                                    std::span<const Arg> args,
                                                    std::span<const Assignment> assignments);

// The min(d, |V|-1) outgoing edges of s with the smallest summed pairwise
// penalties under the current assignments (penalties normalized by that
// count); ties break toward the lower node id.
std::vector<Edge> tentative_edge_set(const Pattern& pattern, NodeId s,
                                     std::span<const Arg> args,
                                     std::span<const Assignment> assignments, int d);

// Op 3: evaluates every node under its tentative edge set and deletes the
// one whose removal lowers the objective most, if any does; incident edges
// in both directions go with it. Never touches a 1-node pattern.
MiningState delete_worst_node(MiningState state, std::span<const Arg> args, double tau, int d);

// Node discovery internals, exposed for verification. The joint label
// choice over ARGs is itself a labeling problem: one variable per
// participating ARG whose candidates are that ARG's unassigned nodes.
struct DiscoveryResult {
    bool added = false;
    NodeId node = kNone;
    std::vector<int> participating;      // indices into the ARG list
    std::vector<int> step1_labels;       // per participating ARG
    double step1_energy = 0.0;
    std::vector<NodeId> edge_targets;    // chosen E_y
    std::vector<int> step3_labels;
    double step3_energy = 0.0;
    double mean_energy = 0.0;            // mean node energy of the candidate
    std::vector<Vec> node_attrs;         // estimated attributes of the candidate
    std::map<NodeId, std::vector<Vec>> edge_attr_map;  // per edge target
};

// Cost tables of the label-estimation MRF. `refined_edges` empty builds the
// step-1 problem (the edge set is optimized inside each pairwise term);
// otherwise the step-3 problem with the fixed edge set.
LabelingProblem build_discovery_problem(const Pattern& pattern, std::span<const Arg> args,
                                        std::span<const Assignment> assignments,
                                        std::span<const int> participating,
                                        const std::vector<std::vector<int>>& candidates,
                                        std::span<const NodeId> refined_edges, int d);

DiscoveryResult discover_node_detail(const Pattern& pattern, std::span<const Arg> args,
                                     std::span<const Assignment> assignments,
                                     const MiningConfig& cfg);

// Op 4: runs the two-stage label estimation, fixes the new node's edges and
// attributes, and admits it when its mean node energy stays below tau. ARGs
// with no unassigned node sit out and map the new node to kNone.
MiningState discover_node(MiningState state, std::span<const Arg> args,
                          const MiningConfig& cfg);

// Op 5: rebuild each node's outgoing edges greedily in increasing order of
// summed pairwise penalty, stopping before the first addition that lifts the
// node's mean energy to tau or above.
MiningState fill_edges(MiningState state, std::span<const Arg> args, double tau);

// Eq.-(10)-style update: none penalties move from the positive means toward
// the negative means by factor alpha. Means are over matched instances only;
// with no finite positive instance the params come back unchanged.
MatchParams update_none_penalties(const Pattern& pattern, std::span<const Arg> pos_args,
                                  std::span<const Arg> neg_args,
                                  std::span<const Assignment> pos_assignments,
                                  std::span<const Assignment> neg_assignments, double alpha);

struct MineResult {
    MiningState state;
    bool converged = false;
};

// The full loop. Quality filters run on the positive set each iteration:
// ARGs whose match covers less than min_match_fraction of the pattern are
// dropped, then only the top_fraction with the lowest energies are kept;
// dropped ARGs re-enter next iteration. Per-iteration records stream to
// `log` when given. Throws Error when every positive is filtered out.
MineResult mine(const Pattern& init, std::span<const Arg> pos_args,
                std::span<const Arg> neg_args, const MiningConfig& cfg,
                std::ostream* log = nullptr);

}  // namespace vgm
