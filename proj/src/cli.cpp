#include "vgm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "vgm/energy.hpp"
#include "vgm/eval.hpp"
#include "vgm/matcher.hpp"
#include "vgm/miner.hpp"
#include "vgm/synth.hpp"

namespace vgm::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

// JSON has no inf; report fields that can be infinite go through this.
json json_number(double v) {
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    return json(v);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::vector<Arg> load_arg_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        const std::string name = entry.path().filename().string();
        if (name == "truth.json" || name == "manifest.json") continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValueError("no ARG files in '" + dir.string() + "'");
    std::vector<Arg> args;
    args.reserve(files.size());
    for (const auto& f : files) args.push_back(load_arg(f));
    return args;
}

std::string spec_to_json(const SyntheticSpec& spec) {
    json j{{"schema",
            json{{"unary_dims", spec.schema.unary_dims},
                 {"pairwise_dims", spec.schema.pairwise_dims}}},
           {"pattern_size", spec.pattern_size},
           {"n_background", spec.n_background},
           {"n_positive", spec.n_positive},
           {"n_negative", spec.n_negative},
           {"noise_sigma", spec.noise_sigma},
           {"occlusion_prob", spec.occlusion_prob},
           {"attr_min", spec.attr_min},
           {"attr_max", spec.attr_max},
           {"rng_seed", spec.rng_seed}};
    return j.dump();
}

SyntheticSpec parse_synth_spec(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw ParseError("synthetic spec: malformed JSON");
    SyntheticSpec spec;
    try {
        spec.schema.unary_dims = j.at("schema").at("unary_dims").get<std::vector<int>>();
        spec.schema.pairwise_dims = j.at("schema").at("pairwise_dims").get<std::vector<int>>();
        spec.pattern_size = j.at("pattern_size").get<int>();
        spec.n_background = j.at("n_background").get<int>();
        spec.n_positive = j.at("n_positive").get<int>();
        spec.n_negative = j.at("n_negative").get<int>();
        spec.noise_sigma = j.at("noise_sigma").get<double>();
        spec.occlusion_prob = j.at("occlusion_prob").get<double>();
        spec.attr_min = j.at("attr_min").get<double>();
        spec.attr_max = j.at("attr_max").get<double>();
        spec.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("synthetic spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

int cmd_generate(const fs::path& spec_path, const fs::path& out_dir,
                 std::optional<std::uint64_t> seed, std::ostream& out) {
    SyntheticSpec spec = parse_synth_spec(spec_path);
    if (seed) spec.rng_seed = *seed;
    const SyntheticData data = generate(spec);

    fs::create_directories(out_dir);
    json manifest;
    manifest["positives"] = json::array();
    manifest["negatives"] = json::array();
    char name[32];
    for (std::size_t k = 0; k < data.positives.size(); ++k) {
        std::snprintf(name, sizeof name, "pos_%03zu.json", k);
        save_arg(data.positives[k], out_dir / name);
        manifest["positives"].push_back(name);
    }
    for (std::size_t l = 0; l < data.negatives.size(); ++l) {
        std::snprintf(name, sizeof name, "neg_%03zu.json", l);
        save_arg(data.negatives[l], out_dir / name);
        manifest["negatives"].push_back(name);
    }
    save_truth(data.truth, out_dir / "truth.json");
    manifest["truth"] = "truth.json";
    manifest["spec_hash"] = fnv1a_hex(spec_to_json(spec));
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    out << "generated " << data.positives.size() << " positive and " << data.negatives.size()
        << " negative ARGs in " << out_dir.string() << '\n';
    return kExitOk;
}

json history_to_json(const MiningState& state) {
    json hist = json::array();
    for (const IterationRecord& r : state.history) {
        json rec{{"iteration", r.iteration},
                 {"nodes", r.num_nodes},
                 {"edges", r.num_edges},
                 {"objective", json_number(r.objective)},
                 {"active_args", r.active_args}};
        rec["added"] = r.added == kNone ? json(nullptr) : json(r.added);
        rec["deleted"] = r.deleted == kNone ? json(nullptr) : json(r.deleted);
        hist.push_back(rec);
    }
    return hist;
}

int cmd_mine(const fs::path& pos_dir, const fs::path& neg_dir, const fs::path& init_path,
             const MiningConfig& cfg, const fs::path& out_path, const fs::path& report_path,
             std::ostream& err) {
    const std::vector<Arg> pos = load_arg_dir(pos_dir);
    std::vector<Arg> neg;
    if (!neg_dir.empty()) neg = load_arg_dir(neg_dir);
    const Pattern init = load_pattern(init_path);

    const MineResult result = mine(init, pos, neg, cfg, &err);

    save_pattern(result.state.pattern, out_path);
    if (!report_path.empty()) {
        json report{{"converged", result.converged},
                    {"iterations", result.state.iteration},
                    {"config_hash", fnv1a_hex(config_to_json(cfg))},
                    {"final",
                     json{{"nodes", result.state.pattern.node_count()},
                          {"edges", result.state.pattern.edge_count()},
                          {"params",
                           json{{"w_unary", result.state.pattern.params.w_unary},
                                {"w_pairwise", result.state.pattern.params.w_pairwise},
                                {"p_none", json_number(result.state.pattern.params.p_none)},
                                {"q_none", json_number(result.state.pattern.params.q_none)}}}}},
                    {"history", history_to_json(result.state)}};
        write_file(report_path, report.dump(2) + "\n");
    }
    return result.converged ? kExitOk : kExitMaxIters;
}

int cmd_match(const fs::path& pattern_path, const fs::path& arg_path, const MiningConfig& cfg,
              std::ostream& out) {
    const Pattern pattern = load_pattern(pattern_path);
    const Arg arg = load_arg(arg_path);
    const std::vector<MatchResult> results = match_many(pattern, {&arg, 1}, cfg);
    const MatchResult& m = results.front();

    out << "arg " << arg.id << " (" << arg.node_count() << " nodes), pattern " << pattern.id
        << " (" << pattern.node_count() << " nodes), solver "
        << (m.meta.exact ? "exact" : "approximate") << "\n";
    out << "node  target  unary  pairwise  total\n";
    for (const auto& [s, _] : pattern.node_attrs) {
        const NodeEnergyBreakdown b = node_energy(pattern, s, arg, m.assignment);
        const int x = m.assignment.target(s);
        out << s << "  " << (x == kNone ? std::string("none") : std::to_string(x)) << "  "
            << b.unary << "  " << b.pairwise << "  " << b.total << "\n";
    }
    out << "total_energy " << m.energy << "\n";
    out << "detection_score " << detection_score(pattern, arg, m.assignment, cfg.zeta) << "\n";
    return kExitOk;
}

int cmd_eval(const fs::path& pattern_path, const fs::path& pos_dir, const fs::path& neg_dir,
             const MiningConfig& cfg, const fs::path& out_path, std::ostream& out) {
    const Pattern pattern = load_pattern(pattern_path);
    const std::vector<Arg> pos = load_arg_dir(pos_dir);
    const std::vector<Arg> neg = load_arg_dir(neg_dir);
    const MetricsRow row = evaluate_pattern(pattern, pos, neg, cfg);
    if (out_path.empty()) {
        write_metrics_csv(out, {&row, 1});
    } else {
        std::ostringstream ss;
        write_metrics_csv(ss, {&row, 1});
        write_file(out_path, ss.str());
    }
    return kExitOk;
}

int cmd_sweep(const fs::path& pos_dir, const fs::path& neg_dir, const fs::path& init_path,
              const MiningConfig& base_cfg, const std::vector<double>& taus,
              const std::vector<int>& ds, const fs::path& out_path, int jobs,
              std::ostream& out, std::ostream& err) {
    const std::vector<Arg> pos = load_arg_dir(pos_dir);
    std::vector<Arg> neg;
    if (!neg_dir.empty()) neg = load_arg_dir(neg_dir);
    const Pattern init = load_pattern(init_path);

    struct GridPoint {
        double tau;
        int d;
    };
    std::vector<GridPoint> grid;
    for (double tau : taus)
        for (int d : ds) grid.push_back({tau, d});

    std::vector<MetricsRow> rows(grid.size());
    std::vector<std::string> failures(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            MiningConfig cfg = base_cfg;
            cfg.tau = grid[i].tau;
            cfg.d = grid[i].d;
            try {
                const MineResult mined = mine(init, pos, neg, cfg, nullptr);
                rows[i] = evaluate_pattern(mined.state.pattern, pos, neg, cfg);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!failures[i].empty())
            throw Error("sweep point tau=" + std::to_string(grid[i].tau) + " d=" +
                        std::to_string(grid[i].d) + " failed: " + failures[i]);

    if (out_path.empty()) {
        write_metrics_csv(out, rows);
    } else {
        std::ostringstream ss;
        write_metrics_csv(ss, rows);
        write_file(out_path, ss.str());
        err << "wrote " << rows.size() << " rows to " << out_path.string() << '\n';
    }
    return kExitOk;
}

int parse_degree(const std::string& text) {
    if (text == "inf") return kInfiniteDegree;
    std::size_t used = 0;
    const int d = std::stoi(text, &used);
    if (used != text.size()) throw ValueError("invalid degree '" + text + "'");
    return d;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"mining of maximal-size visual attributed patterns from ARG collections"};
    app.require_subcommand(1);

    std::string spec_path, pos_dir, neg_dir, init_path, config_path, out_path, report_path;
    std::string pattern_path, arg_path;
    std::string tau_list, d_list;
    std::optional<double> tau_override;
    std::optional<std::string> d_override;
    std::optional<std::uint64_t> seed_override;
    int jobs = 1;

    auto* gen = app.add_subcommand("generate", "generate synthetic ARGs with a planted pattern");
    gen->add_option("--spec", spec_path, "synthetic spec file")->required();
    gen->add_option("--out", out_path, "output directory")->required();
    gen->add_option("--seed", seed_override, "override the spec rng_seed");

    auto* mine_cmd = app.add_subcommand("mine", "mine a pattern from positive/negative ARGs");
    mine_cmd->add_option("--pos", pos_dir, "directory of positive ARG files")->required();
    mine_cmd->add_option("--neg", neg_dir, "directory of negative ARG files");
    mine_cmd->add_option("--init", init_path, "initial pattern file")->required();
    mine_cmd->add_option("--config", config_path, "mining config file");
    mine_cmd->add_option("--out", out_path, "output pattern file")->required();
    mine_cmd->add_option("--report", report_path, "report file (JSON)");
    mine_cmd->add_option("--tau", tau_override, "override config tau");
    mine_cmd->add_option("--d", d_override, "override config d (integer or 'inf')");
    mine_cmd->add_option("--seed", seed_override, "override config rng_seed");

    auto* match_cmd = app.add_subcommand("match", "match a pattern against one ARG");
    match_cmd->add_option("--pattern", pattern_path, "pattern file")->required();
    match_cmd->add_option("--arg", arg_path, "ARG file")->required();
    match_cmd->add_option("--config", config_path, "config file (solver settings)");
    match_cmd->add_option("--seed", seed_override, "override config rng_seed");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a pattern on a test split");
    eval_cmd->add_option("--pattern", pattern_path, "pattern file")->required();
    eval_cmd->add_option("--pos", pos_dir, "directory of positive test ARGs")->required();
    eval_cmd->add_option("--neg", neg_dir, "directory of negative test ARGs")->required();
    eval_cmd->add_option("--config", config_path, "config file");
    eval_cmd->add_option("--out", out_path, "output CSV file (default: stdout)");
    eval_cmd->add_option("--seed", seed_override, "override config rng_seed");

    auto* sweep_cmd = app.add_subcommand("sweep", "mine+eval over a (tau, d) grid");
    sweep_cmd->add_option("--pos", pos_dir, "directory of positive ARG files")->required();
    sweep_cmd->add_option("--neg", neg_dir, "directory of negative ARG files");
    sweep_cmd->add_option("--init", init_path, "initial pattern file")->required();
    sweep_cmd->add_option("--config", config_path, "base config file");
    sweep_cmd->add_option("--tau", tau_list, "comma-separated tau values")->required();
    sweep_cmd->add_option("--d", d_list, "comma-separated d values (integers or 'inf')")
        ->required();
    sweep_cmd->add_option("--out", out_path, "output CSV file (default: stdout)");
    sweep_cmd->add_option("--jobs", jobs, "parallel grid workers")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", seed_override, "override config rng_seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        MiningConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (tau_override) cfg.tau = *tau_override;
        if (d_override) cfg.d = parse_degree(*d_override);
        if (seed_override) cfg.rng_seed = *seed_override;
        cfg.validate();

        if (gen->parsed()) return cmd_generate(spec_path, out_path, seed_override, out);
        if (mine_cmd->parsed())
            return cmd_mine(pos_dir, neg_dir, init_path, cfg, out_path, report_path, err);
        if (match_cmd->parsed()) return cmd_match(pattern_path, arg_path, cfg, out);
        if (eval_cmd->parsed())
            return cmd_eval(pattern_path, pos_dir, neg_dir, cfg, out_path, out);
        if (sweep_cmd->parsed()) {
            std::vector<double> taus;
            std::stringstream ts(tau_list);
            for (std::string item; std::getline(ts, item, ',');) taus.push_back(std::stod(item));
            std::vector<int> ds;
            std::stringstream dss(d_list);
            for (std::string item; std::getline(dss, item, ',');)
                ds.push_back(parse_degree(item));
            if (taus.empty() || ds.empty()) throw ValueError("sweep: empty tau or d grid");
            return cmd_sweep(pos_dir, neg_dir, init_path, cfg, taus, ds, out_path, jobs, out,
                             err);
        }
        err << "error: no subcommand\n";
        return kExitValidation;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace vgm::cli
