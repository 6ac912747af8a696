#include "vgm/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "vgm/energy.hpp"
#include "vgm/matcher.hpp"

namespace vgm {

double pattern_fuzziness(const Pattern& pattern, std::span<const Arg> args,
                         std::span<const Assignment> assignments) {
    const auto ids = pattern.node_ids();
    if (ids.empty()) throw std::invalid_argument("pattern_fuzziness: empty pattern");
    double sum = 0.0;
    for (NodeId s : ids) sum += mean_node_energy(pattern, s, args, assignments);
    return sum / static_cast<double>(ids.size());
}

double energy_ratio(const Pattern& pattern, std::span<const Arg> pos_test,
                    std::span<const Arg> neg_test, const MiningConfig& cfg) {
    if (pos_test.empty() || neg_test.empty())
        throw std::invalid_argument("energy_ratio: both test sets must be nonempty");
    double pos_mean = 0.0;
    for (const MatchResult& m : match_many(pattern, pos_test, cfg)) pos_mean += m.energy;
    pos_mean /= static_cast<double>(pos_test.size());
    double neg_mean = 0.0;
    for (const MatchResult& m : match_many(pattern, neg_test, cfg)) neg_mean += m.energy;
    neg_mean /= static_cast<double>(neg_test.size());
    if (neg_mean == 0.0) return pos_mean == 0.0 ? 0.0 : kInf;
    return pos_mean / neg_mean;
}

double detection_score(const Pattern& pattern, const Arg& arg, const Assignment& assignment,
                       double zeta) {
    const double energy = total_match_energy(pattern, arg, assignment);
    const double coverage =
        static_cast<double>(assignment.matched_count()) / pattern.node_count();
    return -(energy - zeta * coverage);
}

double average_precision(std::span<const double> scores_pos,
                         std::span<const double> scores_neg) {
    if (scores_pos.empty() || scores_neg.empty())
        throw std::invalid_argument("average_precision: empty score list");
    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> entries;
    entries.reserve(scores_pos.size() + scores_neg.size());
    for (double s : scores_pos) entries.push_back({s, true});
    for (double s : scores_neg) entries.push_back({s, false});
    // Descending score; on ties negatives come first (pessimistic for AP).
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.positive < b.positive;
    });
    double ap = 0.0;
    int hits = 0;
    for (std::size_t rank = 0; rank < entries.size(); ++rank) {
        if (!entries[rank].positive) continue;
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
    return ap / static_cast<double>(scores_pos.size());
}

double mean_out_degree(const Pattern& pattern) {
    if (pattern.node_count() == 0) throw std::invalid_argument("mean_out_degree: empty pattern");
    return static_cast<double>(pattern.edge_count()) / pattern.node_count();
}

MetricsRow evaluate_pattern(const Pattern& pattern, std::span<const Arg> pos_test,
                            std::span<const Arg> neg_test, const MiningConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    MetricsRow row;
    row.tau = cfg.tau;
    row.d = cfg.d;
    row.pattern_size = pattern.node_count();
    row.mean_out_degree = mean_out_degree(pattern);

    const std::vector<MatchResult> pos_matches = match_many(pattern, pos_test, cfg);
    std::vector<Assignment> pos_asg;
    std::vector<double> pos_scores;
    double pos_mean = 0.0;
    for (std::size_t k = 0; k < pos_matches.size(); ++k) {
        pos_asg.push_back(pos_matches[k].assignment);
        pos_scores.push_back(
            detection_score(pattern, pos_test[k], pos_matches[k].assignment, cfg.zeta));
        pos_mean += pos_matches[k].energy;
    }
    pos_mean /= static_cast<double>(pos_matches.size());
    row.fuzziness = pattern_fuzziness(pattern, pos_test, pos_asg);

    const std::vector<MatchResult> neg_matches = match_many(pattern, neg_test, cfg);
    std::vector<double> neg_scores;
    double neg_mean = 0.0;
    for (std::size_t l = 0; l < neg_matches.size(); ++l) {
        neg_scores.push_back(
            detection_score(pattern, neg_test[l], neg_matches[l].assignment, cfg.zeta));
        neg_mean += neg_matches[l].energy;
    }
    neg_mean /= static_cast<double>(neg_matches.size());
    row.energy_ratio = neg_mean == 0.0 ? (pos_mean == 0.0 ? 0.0 : kInf) : pos_mean / neg_mean;
    row.ap = average_precision(pos_scores, neg_scores);
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
    out << "tau,d,pattern_size,mean_out_degree,fuzziness,energy_ratio,ap,wall_time_s\n";
    for (const MetricsRow& r : rows) {
        out << r.tau << ',';
        if (r.d == kInfiniteDegree)
            out << "inf";
        else
            out << r.d;
        out << ',' << r.pattern_size << ',' << r.mean_out_degree << ',' << r.fuzziness << ','
            << r.energy_ratio << ',' << r.ap << ',' << r.wall_time_s << '\n';
    }
}

}  // namespace vgm
