#include "vgm/energy.hpp"

#include <stdexcept>

#include "vgm/kernels.hpp"

namespace vgm {

namespace {

void check_schema(const Pattern& pattern, const Arg& arg) {
    if (pattern.schema != arg.schema)
        throw SchemaError("pattern and ARG '" + arg.id + "' use different schemas");
}

}  // namespace

double unary_penalty_raw(const MatchParams& params, const std::vector<Vec>& node_attrs,
                         const Arg& arg, int target) {
    if (target == kNone) return params.p_none;
    const auto& arg_attrs = arg.nodes[target];
    double e = 0.0;
    for (std::size_t i = 0; i < node_attrs.size(); ++i)
        e += params.w_unary[i] * kernels::squared_l2_diff(node_attrs[i], arg_attrs[i]);
    return e;
}

double unary_penalty(const Pattern& pattern, NodeId s, const Arg& arg, int target) {
    check_schema(pattern, arg);
    return unary_penalty_raw(pattern.params, pattern.node_attrs.at(s), arg, target);
}

double pairwise_penalty_raw(const MatchParams& params, const std::vector<Vec>& edge_attrs,
                            const Arg& arg, int xs, int xt, int out_degree_s) {
    if (out_degree_s <= 0)
        throw std::logic_error("pairwise_penalty: out-degree must be positive");
    if (xs == kNone || xt == kNone) return params.q_none / out_degree_s;
    if (xs == xt) return kInf;  // many-to-one
    const auto& arg_attrs = arg.pair_attrs(xs, xt);
    double e = 0.0;
    for (std::size_t j = 0; j < edge_attrs.size(); ++j)
        e += params.w_pairwise[j] * kernels::squared_l2_diff(edge_attrs[j], arg_attrs[j]);
    return e / out_degree_s;
}

double pairwise_penalty(const Pattern& pattern, const Edge& edge, const Arg& arg, int xs,
                        int xt, int out_degree_s) {
    check_schema(pattern, arg);
    return pairwise_penalty_raw(pattern.params, pattern.edge_attrs.at(edge), arg, xs, xt,
                                out_degree_s);
}

NodeEnergyBreakdown node_energy(const Pattern& pattern, NodeId s, const Arg& arg,
                                const Assignment& assignment) {
    check_schema(pattern, arg);
    NodeEnergyBreakdown b;
    const int xs = assignment.target(s);
    b.unary = unary_penalty(pattern, s, arg, xs);
    const auto targets = pattern.out_targets(s);
    const int deg = static_cast<int>(targets.size());
    for (NodeId t : targets)
        b.pairwise += pairwise_penalty(pattern, {s, t}, arg, xs, assignment.target(t), deg);
    b.total = b.unary + b.pairwise;
    return b;
}

double mean_node_energy(const Pattern& pattern, NodeId s, std::span<const Arg> args,
                        std::span<const Assignment> assignments) {
    if (args.empty()) throw std::invalid_argument("mean_node_energy: empty ARG list");
    if (args.size() != assignments.size())
        throw std::invalid_argument("mean_node_energy: one assignment per ARG required");
    double sum = 0.0;
    for (std::size_t k = 0; k < args.size(); ++k)
        sum += node_energy(pattern, s, args[k], assignments[k]).total;
    return sum / static_cast<double>(args.size());
}

double pattern_objective(const Pattern& pattern, std::span<const Arg> args,
                         std::span<const Assignment> assignments, double tau) {
    double obj = 0.0;
    for (NodeId s : pattern.node_ids())
        obj += mean_node_energy(pattern, s, args, assignments) - tau;
    return obj;
}

double total_match_energy(const Pattern& pattern, const Arg& arg,
                          const Assignment& assignment) {
    double e = 0.0;
    for (NodeId s : pattern.node_ids()) e += node_energy(pattern, s, arg, assignment).total;
    return e;
}

}  // namespace vgm
