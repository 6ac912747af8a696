#pragma once

// Shared helpers for building random and hand-crafted test instances.

#include <cstdint>
#include <vector>

#include "vgm/arg_model.hpp"

namespace testutil {

using vgm::Arg;
using vgm::Assignment;
using vgm::AttributeSchema;
using vgm::MatchParams;
using vgm::NodeId;
using vgm::Pattern;
using vgm::Vec;

struct Rng {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

inline Vec random_vec(Rng& rng, int dim, double lo = 0.0, double hi = 1.0) {
    Vec v(dim);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline std::vector<Vec> random_attrs(Rng& rng, const std::vector<int>& dims, double lo = 0.0,
                                     double hi = 1.0) {
    std::vector<Vec> attrs;
    for (int d : dims) attrs.push_back(random_vec(rng, d, lo, hi));
    return attrs;
}

inline AttributeSchema random_schema(Rng& rng, int max_types = 2, int max_dim = 3) {
    AttributeSchema s;
    const int np = 1 + rng.below(max_types);
    const int nq = 1 + rng.below(max_types);
    for (int i = 0; i < np; ++i) s.unary_dims.push_back(1 + rng.below(max_dim));
    for (int j = 0; j < nq; ++j) s.pairwise_dims.push_back(1 + rng.below(max_dim));
    return s;
}

inline Arg random_arg(Rng& rng, const AttributeSchema& schema, int n,
                      const std::string& id = "arg") {
    Arg arg;
    arg.id = id;
    arg.schema = schema;
    for (int x = 0; x < n; ++x) arg.nodes.push_back(random_attrs(rng, schema.unary_dims));
    arg.pairwise.resize(static_cast<std::size_t>(n) * (n - 1));
    for (int x1 = 0; x1 < n; ++x1)
        for (int x2 = 0; x2 < n; ++x2) {
            if (x1 == x2) continue;
            arg.pairwise[Arg::pair_index(x1, x2, n)] = random_attrs(rng, schema.pairwise_dims);
        }
    return arg;
}

// Random pattern with `m` nodes, each directed edge kept with edge_prob.
inline Pattern random_pattern(Rng& rng, const AttributeSchema& schema, int m,
                              double edge_prob = 0.5, bool finite_params = true) {
    Pattern p;
    p.id = "pattern";
    p.schema = schema;
    p.params = MatchParams::uniform_init(schema);
    if (finite_params) {
        p.params.p_none = rng.uniform(0.2, 3.0);
        p.params.q_none = rng.uniform(0.2, 3.0);
    }
    for (int i = 0; i < m; ++i) p.node_attrs[p.fresh_id()] = random_attrs(rng, schema.unary_dims);
    for (int s = 0; s < m; ++s)
        for (int t = 0; t < m; ++t) {
            if (s == t) continue;
            if (rng.uniform01() < edge_prob)
                p.edge_attrs[{s, t}] = random_attrs(rng, schema.pairwise_dims);
        }
    return p;
}

// Random injective assignment; each node is occluded with none_prob.
inline Assignment random_assignment(Rng& rng, const Pattern& p, int arg_nodes,
                                    double none_prob, const std::string& arg_id = "arg") {
    Assignment a;
    a.arg_id = arg_id;
    std::vector<int> avail;
    for (int x = 0; x < arg_nodes; ++x) avail.push_back(x);
    for (NodeId s : p.node_ids()) {
        if (!avail.empty() && rng.uniform01() >= none_prob) {
            const int i = rng.below(static_cast<int>(avail.size()));
            a.map[s] = avail[i];
            avail.erase(avail.begin() + i);
        } else {
            a.map[s] = vgm::kNone;
        }
    }
    return a;
}

// 1-type schema with the given dims, handy for hand evaluations.
inline AttributeSchema simple_schema(int unary_dim = 1, int pairwise_dim = 1) {
    AttributeSchema s;
    s.unary_dims = {unary_dim};
    s.pairwise_dims = {pairwise_dim};
    return s;
}

}  // namespace testutil
