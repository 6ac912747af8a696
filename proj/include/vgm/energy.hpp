#pragma once

#include <span>

#include "vgm/arg_model.hpp"

// Matching-energy evaluation: the per-node energy decomposes into a unary
// penalty (weighted squared attribute differences, or the constant p_none
// when the node is occluded) plus pairwise penalties over the node's
// outgoing edges, each normalized by the out-degree. A many-to-one label
// configuration evaluates to +inf. All functions are pure.

namespace vgm {

struct NodeEnergyBreakdown {
    double unary = 0.0;
    double pairwise = 0.0;
    double total = 0.0;
};

// Weighted squared difference between the pattern's stored unary attributes
// of s and ARG node `target`; p_none when target == kNone.
double unary_penalty(const Pattern& pattern, NodeId s, const Arg& arg, int target);

// Pairwise term for edge (s,t) under labels (xs, xt), normalized by the
// caller-supplied out-degree of s. +inf when xs == xt are the same real
// node, q_none/out_degree_s when either endpoint is kNone.
double pairwise_penalty(const Pattern& pattern, const Edge& edge, const Arg& arg, int xs,
                        int xt, int out_degree_s);

// Same computation on explicit attribute vectors; used where the edge is
// tentative and its attributes are estimated rather than stored.
double pairwise_penalty_raw(const MatchParams& params, const std::vector<Vec>& edge_attrs,
                            const Arg& arg, int xs, int xt, int out_degree_s);
double unary_penalty_raw(const MatchParams& params, const std::vector<Vec>& node_attrs,
                         const Arg& arg, int target);

NodeEnergyBreakdown node_energy(const Pattern& pattern, NodeId s, const Arg& arg,
                                const Assignment& assignment);

// Mean of per-ARG node energies (Definition 2(a) inner mean).
double mean_node_energy(const Pattern& pattern, NodeId s, std::span<const Arg> args,
                        std::span<const Assignment> assignments);

// sum_s (mean_node_energy(s) - tau)
double pattern_objective(const Pattern& pattern, std::span<const Arg> args,
                         std::span<const Assignment> assignments, double tau);

// sum_s node_energy(s) for one ARG.
double total_match_energy(const Pattern& pattern, const Arg& arg,
                          const Assignment& assignment);

}  // namespace vgm
