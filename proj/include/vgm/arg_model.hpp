#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Core data model: attributed relational graphs (complete directed graphs
// whose nodes carry unary attribute vectors and whose ordered node pairs
// carry pairwise attribute vectors), the evolving pattern, matching
// parameters, assignments and the mining configuration, plus JSON file I/O
// for all of them.

namespace vgm {

using Vec = std::vector<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed file text.
struct ParseError : Error {
    using Error::Error;
};
// Dimension mismatches, missing ordered pairs, unknown node references.
struct SchemaError : Error {
    using Error::Error;
};
// Non-finite numbers or out-of-range field values.
struct ValueError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

// Occlusion label: a pattern node with no counterpart in an ARG.
inline constexpr int kNone = -1;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum-degree value meaning "no limit".
inline constexpr int kInfiniteDegree = std::numeric_limits<int>::max();

struct AttributeSchema {
    std::vector<int> unary_dims;     // one entry per unary attribute type
    std::vector<int> pairwise_dims;  // one entry per pairwise attribute type

    int unary_types() const { return static_cast<int>(unary_dims.size()); }
    int pairwise_types() const { return static_cast<int>(pairwise_dims.size()); }

    void validate() const;
    bool operator==(const AttributeSchema&) const = default;
};

// One attributed relational graph. Pairwise attributes are stored densely
// over all ordered pairs (x1, x2), x1 != x2; (x1, x2) and (x2, x1) are
// independent records.
struct Arg {
    std::string id;
    AttributeSchema schema;
    // nodes[x][i] = i-th unary attribute vector of node x
    std::vector<std::vector<Vec>> nodes;
    // pairwise[pair_index(x1, x2, n)][j] = j-th pairwise attribute vector
    std::vector<std::vector<Vec>> pairwise;

    int node_count() const { return static_cast<int>(nodes.size()); }

    static std::size_t pair_index(int x1, int x2, int n);
    const std::vector<Vec>& pair_attrs(int x1, int x2) const;

    void validate() const;
    bool operator==(const Arg&) const = default;
};

// Attribute weights and occlusion penalties. The none penalties are genuine
// +inf at initialization so solvers can exclude forbidden labels exactly;
// after any training step the weights live on the L1 simplex.
struct MatchParams {
    Vec w_unary;
    Vec w_pairwise;
    double p_none = kInf;
    double q_none = kInf;

    static MatchParams uniform_init(const AttributeSchema& schema);
    // True while the none penalties are still at the +inf initialization.
    bool at_init() const;
    void validate(const AttributeSchema& schema) const;
    bool operator==(const MatchParams&) const = default;
};

// The evolving pattern: an incomplete directed attributed graph. Node ids
// are issued by the per-pattern counter `next_id` and never reused, so a
// node id stays stable across mining iterations.
struct Pattern {
    std::string id;
    AttributeSchema schema;
    std::map<NodeId, std::vector<Vec>> node_attrs;   // node set = keys
    std::map<Edge, std::vector<Vec>> edge_attrs;     // directed edge set = keys
    MatchParams params;
    NodeId next_id = 0;

    int node_count() const { return static_cast<int>(node_attrs.size()); }
    bool has_node(NodeId s) const { return node_attrs.count(s) != 0; }
    std::vector<NodeId> node_ids() const;
    bool has_edge(NodeId s, NodeId t) const { return edge_attrs.count({s, t}) != 0; }
    std::vector<NodeId> out_targets(NodeId s) const;
    int out_degree(NodeId s) const;
    int edge_count() const { return static_cast<int>(edge_attrs.size()); }
    NodeId fresh_id();

    void validate() const;
    bool operator==(const Pattern&) const = default;
};

// Per-ARG map from pattern node ids to ARG node indices (or kNone). Always
// injective over real targets.
struct Assignment {
    std::string arg_id;
    std::map<NodeId, int> map;

    int target(NodeId s) const;
    bool is_matched(NodeId s) const { return target(s) != kNone; }
    // Number of nodes mapped to a real ARG node.
    int matched_count() const;
    bool injective() const;
    bool operator==(const Assignment&) const = default;
};

enum class SolverKind { kExact, kApproximate };

struct MiningConfig {
    double tau = 1.0;                 // per-node fuzziness ceiling
    int d = 2;                        // minimum degree (kInfiniteDegree = no limit)
    double c_svm = 1.0;
    double lambda = 0.5;              // weight-blending factor
    double alpha = 1.0;               // none-penalty interpolation factor
    double zeta = 10.0;               // detection-score coverage bonus
    int max_iters = 20;
    double energy_tol = 1e-6;
    double min_match_fraction = 0.0;  // drop ARGs whose match covers less
    double top_fraction = 1.0;        // keep this fraction of lowest-energy ARGs
    std::uint64_t rng_seed = 0;
    SolverKind solver = SolverKind::kExact;  // exact falls back when too large
    int restarts = 20;

    void validate() const;
    bool operator==(const MiningConfig&) const = default;
};

// ---- File I/O ----------------------------------------------------------
//
// All formats are UTF-8 JSON; numbers use the shortest round-trip decimal
// rendering, and +inf penalties are serialized as the string "inf". See
// README.md for the exact schemas.

Arg load_arg(const std::filesystem::path& path);
void save_arg(const Arg& arg, const std::filesystem::path& path);

Pattern load_pattern(const std::filesystem::path& path);
void save_pattern(const Pattern& pattern, const std::filesystem::path& path);

MiningConfig load_config(const std::filesystem::path& path);
void save_config(const MiningConfig& cfg, const std::filesystem::path& path);

std::string arg_to_json(const Arg& arg);
Arg arg_from_json(const std::string& text);
std::string pattern_to_json(const Pattern& pattern);
Pattern pattern_from_json(const std::string& text);
std::string config_to_json(const MiningConfig& cfg);
MiningConfig config_from_json(const std::string& text);

}  // namespace vgm
