#include "vgm/arg_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vgm {

using json = nlohmann::json;

namespace {

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void check_attr_list(const std::vector<Vec>& attrs, const std::vector<int>& dims,
                     const std::string& what) {
    if (attrs.size() != dims.size())
        throw SchemaError(what + ": expected " + std::to_string(dims.size()) +
                          " attribute vectors, got " + std::to_string(attrs.size()));
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (static_cast<int>(attrs[i].size()) != dims[i])
            throw SchemaError(what + ": attribute " + std::to_string(i) + " has dimension " +
                              std::to_string(attrs[i].size()) + ", schema says " +
                              std::to_string(dims[i]));
        if (!all_finite(attrs[i]))
            throw ValueError(what + ": attribute " + std::to_string(i) + " has a non-finite value");
    }
}

}  // namespace

void AttributeSchema::validate() const {
    if (unary_dims.empty() || pairwise_dims.empty())
        throw SchemaError("schema needs at least one unary and one pairwise attribute type");
    for (int d : unary_dims)
        if (d < 1) throw SchemaError("unary attribute dimension must be >= 1");
    for (int d : pairwise_dims)
        if (d < 1) throw SchemaError("pairwise attribute dimension must be >= 1");
}

std::size_t Arg::pair_index(int x1, int x2, int n) {
    return static_cast<std::size_t>(x1) * (n - 1) + (x2 < x1 ? x2 : x2 - 1);
}

const std::vector<Vec>& Arg::pair_attrs(int x1, int x2) const {
    return pairwise[pair_index(x1, x2, node_count())];
}

void Arg::validate() const {
    schema.validate();
    const int n = node_count();
    if (n < 1) throw SchemaError("ARG '" + id + "' has no nodes");
    for (int x = 0; x < n; ++x)
        check_attr_list(nodes[x], schema.unary_dims, "ARG '" + id + "' node " + std::to_string(x));
    const std::size_t expected = static_cast<std::size_t>(n) * (n - 1);
    if (pairwise.size() != expected)
        throw SchemaError("ARG '" + id + "' has " + std::to_string(pairwise.size()) +
                          " ordered-pair records, expected " + std::to_string(expected));
    for (int x1 = 0; x1 < n; ++x1)
        for (int x2 = 0; x2 < n; ++x2) {
            if (x1 == x2) continue;
            check_attr_list(pairwise[pair_index(x1, x2, n)], schema.pairwise_dims,
                            "ARG '" + id + "' pair (" + std::to_string(x1) + "," +
                                std::to_string(x2) + ")");
        }
}

MatchParams MatchParams::uniform_init(const AttributeSchema& schema) {
    MatchParams p;
    const double w = 1.0 / (schema.unary_types() + schema.pairwise_types());
    p.w_unary.assign(schema.unary_types(), w);
    p.w_pairwise.assign(schema.pairwise_types(), w);
    p.p_none = kInf;
    p.q_none = kInf;
    return p;
}

bool MatchParams::at_init() const {
    return std::isinf(p_none) && std::isinf(q_none);
}

void MatchParams::validate(const AttributeSchema& schema) const {
    if (static_cast<int>(w_unary.size()) != schema.unary_types() ||
        static_cast<int>(w_pairwise.size()) != schema.pairwise_types())
        throw SchemaError("params: weight vector sizes do not match schema");
    double sum = 0.0;
    for (double w : w_unary) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValueError("params: unary weight out of range");
        sum += w;
    }
    for (double w : w_pairwise) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ValueError("params: pairwise weight out of range");
        sum += w;
    }
    if (!(p_none > 0.0)) throw ValueError("params: p_none must be in (0, +inf]");
    if (!(q_none > 0.0)) throw ValueError("params: q_none must be in (0, +inf]");
    if (std::isnan(p_none) || std::isnan(q_none)) throw ValueError("params: none penalty is NaN");
    // The simplex constraint only binds once the none penalties have been
    // trained away from the +inf initialization.
    if (!at_init() && std::abs(sum - 1.0) > 1e-9)
        throw ValueError("params: trained weights must sum to 1, got " + std::to_string(sum));
}

std::vector<NodeId> Pattern::node_ids() const {
    std::vector<NodeId> ids;
    ids.reserve(node_attrs.size());
    for (const auto& [s, _] : node_attrs) ids.push_back(s);
    return ids;
}

std::vector<NodeId> Pattern::out_targets(NodeId s) const {
    std::vector<NodeId> ts;
    for (auto it = edge_attrs.lower_bound({s, std::numeric_limits<NodeId>::min()});
         it != edge_attrs.end() && it->first.first == s; ++it)
        ts.push_back(it->first.second);
    return ts;
}

int Pattern::out_degree(NodeId s) const {
    int deg = 0;
    for (auto it = edge_attrs.lower_bound({s, std::numeric_limits<NodeId>::min()});
         it != edge_attrs.end() && it->first.first == s; ++it)
        ++deg;
    return deg;
}

NodeId Pattern::fresh_id() { return next_id++; }

void Pattern::validate() const {
    schema.validate();
    if (node_attrs.empty()) throw SchemaError("pattern '" + id + "' has no nodes");
    for (const auto& [s, attrs] : node_attrs) {
        if (s < 0) throw SchemaError("pattern node ids must be non-negative");
        if (s >= next_id) throw SchemaError("pattern node id outruns next_id counter");
        check_attr_list(attrs, schema.unary_dims, "pattern node " + std::to_string(s));
    }
    for (const auto& [e, attrs] : edge_attrs) {
        if (e.first == e.second) throw SchemaError("pattern has a self-loop");
        if (!has_node(e.first) || !has_node(e.second))
            throw SchemaError("pattern edge endpoint is not a pattern node");
        check_attr_list(attrs, schema.pairwise_dims,
                        "pattern edge (" + std::to_string(e.first) + "," +
                            std::to_string(e.second) + ")");
    }
    params.validate(schema);
}

int Assignment::target(NodeId s) const {
    auto it = map.find(s);
    if (it == map.end())
        throw SchemaError("assignment for ARG '" + arg_id + "' misses pattern node " +
                          std::to_string(s));
    return it->second;
}

int Assignment::matched_count() const {
    int c = 0;
    for (const auto& [_, x] : map) c += (x != kNone);
    return c;
}

bool Assignment::injective() const {
    std::vector<int> seen;
    seen.reserve(map.size());
    for (const auto& [_, x] : map) {
        if (x == kNone) continue;
        for (int y : seen)
            if (y == x) return false;
        seen.push_back(x);
    }
    return true;
}

void MiningConfig::validate() const {
    if (!(tau >= 0.0)) throw ValueError("config: tau must be >= 0");
    if (d < 1) throw ValueError("config: d must be >= 1");
    if (!(c_svm > 0.0)) throw ValueError("config: c_svm must be > 0");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValueError("config: lambda must be in [0,1]");
    if (!(alpha > 0.0)) throw ValueError("config: alpha must be > 0");
    if (!std::isfinite(zeta)) throw ValueError("config: zeta must be finite");
    if (max_iters < 0) throw ValueError("config: max_iters must be >= 0");
    if (!(energy_tol >= 0.0)) throw ValueError("config: energy_tol must be >= 0");
    if (!(min_match_fraction >= 0.0 && min_match_fraction <= 1.0))
        throw ValueError("config: min_match_fraction must be in [0,1]");
    if (!(top_fraction > 0.0 && top_fraction <= 1.0))
        throw ValueError("config: top_fraction must be in (0,1]");
    if (restarts < 1) throw ValueError("config: restarts must be >= 1");
}

// ---- JSON plumbing ------------------------------------------------------

namespace {

json dump_vecs(const std::vector<Vec>& vs) {
    json a = json::array();
    for (const Vec& v : vs) a.push_back(v);
    return a;
}

std::vector<Vec> parse_vecs(const json& a, const std::string& what) {
    if (!a.is_array()) throw ParseError(what + ": expected array of attribute vectors");
    std::vector<Vec> out;
    out.reserve(a.size());
    for (const json& jv : a) {
        if (!jv.is_array()) throw ParseError(what + ": expected numeric vector");
        Vec v;
        v.reserve(jv.size());
        for (const json& x : jv) {
            if (!x.is_number()) throw ParseError(what + ": vector entry is not a number");
            v.push_back(x.get<double>());
        }
        out.push_back(std::move(v));
    }
    return out;
}

json dump_penalty(double v) {
    if (std::isinf(v)) return json("inf");
    return json(v);
}

double parse_penalty(const json& j, const std::string& what) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInf;
        throw ParseError(what + ": unknown penalty token '" + j.get<std::string>() + "'");
    }
    if (!j.is_number()) throw ParseError(what + ": expected number or \"inf\"");
    return j.get<double>();
}

json dump_schema(const AttributeSchema& s) {
    return json{{"unary_dims", s.unary_dims}, {"pairwise_dims", s.pairwise_dims}};
}

AttributeSchema parse_schema(const json& j) {
    if (!j.is_object() || !j.contains("unary_dims") || !j.contains("pairwise_dims"))
        throw ParseError("schema: expected object with unary_dims and pairwise_dims");
    AttributeSchema s;
    s.unary_dims = j.at("unary_dims").get<std::vector<int>>();
    s.pairwise_dims = j.at("pairwise_dims").get<std::vector<int>>();
    return s;
}

json dump_params(const MatchParams& p) {
    return json{{"w_unary", p.w_unary},
                {"w_pairwise", p.w_pairwise},
                {"p_none", dump_penalty(p.p_none)},
                {"q_none", dump_penalty(p.q_none)}};
}

MatchParams parse_params(const json& j) {
    MatchParams p;
    p.w_unary = j.at("w_unary").get<Vec>();
    p.w_pairwise = j.at("w_pairwise").get<Vec>();
    p.p_none = parse_penalty(j.at("p_none"), "params.p_none");
    p.q_none = parse_penalty(j.at("q_none"), "params.q_none");
    return p;
}

json parse_text(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError(what + ": malformed JSON");
    return j;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
    return ss.str();
}

void spill(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace

std::string arg_to_json(const Arg& arg) {
    const int n = arg.node_count();
    json nodes = json::array();
    for (const auto& node : arg.nodes) nodes.push_back(json{{"unary", dump_vecs(node)}});
    json pairs = json::array();
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
            if (s == t) continue;
            pairs.push_back(
                json{{"s", s}, {"t", t}, {"attrs", dump_vecs(arg.pair_attrs(s, t))}});
        }
    json j{{"id", arg.id}, {"schema", dump_schema(arg.schema)}, {"nodes", nodes},
           {"pairwise", pairs}};
    return j.dump(2) + "\n";
}

Arg arg_from_json(const std::string& text) {
    const json j = parse_text(text, "ARG file");
    Arg arg;
    try {
        arg.id = j.at("id").get<std::string>();
        arg.schema = parse_schema(j.at("schema"));
        for (const json& jn : j.at("nodes"))
            arg.nodes.push_back(parse_vecs(jn.at("unary"), "ARG node"));
        const int n = arg.node_count();
        if (n < 1) throw SchemaError("ARG '" + arg.id + "' has no nodes");
        arg.pairwise.assign(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0), {});
        std::vector<char> seen(arg.pairwise.size(), 0);
        for (const json& jp : j.at("pairwise")) {
            const int s = jp.at("s").get<int>();
            const int t = jp.at("t").get<int>();
            if (s < 0 || s >= n || t < 0 || t >= n || s == t)
                throw SchemaError("ARG '" + arg.id + "' has an invalid pair (" +
                                  std::to_string(s) + "," + std::to_string(t) + ")");
            const std::size_t idx = Arg::pair_index(s, t, n);
            if (seen[idx])
                throw SchemaError("ARG '" + arg.id + "' repeats pair (" + std::to_string(s) +
                                  "," + std::to_string(t) + ")");
            seen[idx] = 1;
            arg.pairwise[idx] = parse_vecs(jp.at("attrs"), "ARG pair");
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i]) throw SchemaError("ARG '" + arg.id + "' is missing an ordered pair");
    } catch (const json::exception& e) {
        throw ParseError(std::string("ARG file: ") + e.what());
    }
    arg.validate();
    return arg;
}

Arg load_arg(const std::filesystem::path& path) { return arg_from_json(slurp(path)); }

void save_arg(const Arg& arg, const std::filesystem::path& path) {
    arg.validate();
    spill(path, arg_to_json(arg));
}

std::string pattern_to_json(const Pattern& p) {
    json nodes = json::array();
    json unary = json::array();
    for (const auto& [s, attrs] : p.node_attrs) {
        nodes.push_back(s);
        unary.push_back(json{{"node", s}, {"attrs", dump_vecs(attrs)}});
    }
    json edges = json::array();
    json pairwise = json::array();
    for (const auto& [e, attrs] : p.edge_attrs) {
        edges.push_back(json::array({e.first, e.second}));
        pairwise.push_back(json{{"s", e.first}, {"t", e.second}, {"attrs", dump_vecs(attrs)}});
    }
    json j{{"id", p.id},
           {"schema", dump_schema(p.schema)},
           {"nodes", nodes},
           {"unary_attrs", unary},
           {"edges", edges},
           {"pairwise_attrs", pairwise},
           {"params", dump_params(p.params)},
           {"next_id", p.next_id}};
    return j.dump(2) + "\n";
}

Pattern pattern_from_json(const std::string& text) {
    const json j = parse_text(text, "pattern file");
    Pattern p;
    try {
        p.id = j.at("id").get<std::string>();
        p.schema = parse_schema(j.at("schema"));
        std::vector<NodeId> ids = j.at("nodes").get<std::vector<NodeId>>();
        for (const json& ju : j.at("unary_attrs")) {
            const NodeId s = ju.at("node").get<NodeId>();
            if (p.node_attrs.count(s)) throw SchemaError("pattern repeats node " + std::to_string(s));
            p.node_attrs[s] = parse_vecs(ju.at("attrs"), "pattern node");
        }
        for (NodeId s : ids)
            if (!p.node_attrs.count(s))
                throw SchemaError("pattern node " + std::to_string(s) + " has no attributes");
        if (p.node_attrs.size() != ids.size())
            throw SchemaError("pattern unary_attrs does not match the node list");
        for (const json& jp : j.at("pairwise_attrs")) {
            const Edge e{jp.at("s").get<NodeId>(), jp.at("t").get<NodeId>()};
            if (p.edge_attrs.count(e)) throw SchemaError("pattern repeats an edge");
            p.edge_attrs[e] = parse_vecs(jp.at("attrs"), "pattern edge");
        }
        if (j.at("edges").size() != p.edge_attrs.size())
            throw SchemaError("pattern edges does not match pairwise_attrs");
        for (const json& je : j.at("edges")) {
            const Edge e{je.at(0).get<NodeId>(), je.at(1).get<NodeId>()};
            if (!p.edge_attrs.count(e))
                throw SchemaError("pattern edge list names an edge without attributes");
        }
        p.params = parse_params(j.at("params"));
        p.next_id = j.at("next_id").get<NodeId>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("pattern file: ") + e.what());
    }
    p.validate();
    return p;
}

Pattern load_pattern(const std::filesystem::path& path) {
    return pattern_from_json(slurp(path));
}

void save_pattern(const Pattern& pattern, const std::filesystem::path& path) {
    pattern.validate();
    spill(path, pattern_to_json(pattern));
}

std::string config_to_json(const MiningConfig& cfg) {
    json j{{"tau", cfg.tau},
           {"d", cfg.d == kInfiniteDegree ? json("inf") : json(cfg.d)},
           {"c_svm", cfg.c_svm},
           {"lambda", cfg.lambda},
           {"alpha", cfg.alpha},
           {"zeta", cfg.zeta},
           {"max_iters", cfg.max_iters},
           {"energy_tol", cfg.energy_tol},
           {"min_match_fraction", cfg.min_match_fraction},
           {"top_fraction", cfg.top_fraction},
           {"rng_seed", cfg.rng_seed},
           {"solver", cfg.solver == SolverKind::kExact ? "exact" : "approximate"},
           {"restarts", cfg.restarts}};
    return j.dump(2) + "\n";
}

MiningConfig config_from_json(const std::string& text) {
    const json j = parse_text(text, "config file");
    MiningConfig cfg;
    try {
        if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
        if (j.contains("d")) {
            const json& jd = j.at("d");
            if (jd.is_string()) {
                if (jd.get<std::string>() != "inf")
                    throw ParseError("config: d must be a positive integer or \"inf\"");
                cfg.d = kInfiniteDegree;
            } else {
                cfg.d = jd.get<int>();
            }
        }
        if (j.contains("c_svm")) cfg.c_svm = j.at("c_svm").get<double>();
        if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("zeta")) cfg.zeta = j.at("zeta").get<double>();
        if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
        if (j.contains("energy_tol")) cfg.energy_tol = j.at("energy_tol").get<double>();
        if (j.contains("min_match_fraction"))
            cfg.min_match_fraction = j.at("min_match_fraction").get<double>();
        if (j.contains("top_fraction")) cfg.top_fraction = j.at("top_fraction").get<double>();
        if (j.contains("rng_seed")) cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        if (j.contains("solver")) {
            const std::string s = j.at("solver").get<std::string>();
            if (s == "exact")
                cfg.solver = SolverKind::kExact;
            else if (s == "approximate")
                cfg.solver = SolverKind::kApproximate;
            else
                throw ParseError("config: solver must be \"exact\" or \"approximate\"");
        }
        if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("config file: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

MiningConfig load_config(const std::filesystem::path& path) {
    return config_from_json(slurp(path));
}

void save_config(const MiningConfig& cfg, const std::filesystem::path& path) {
    cfg.validate();
    spill(path, config_to_json(cfg));
}

}  // namespace vgm
