#pragma once

#include <iosfwd>
#include <span>

#include "vgm/arg_model.hpp"

// Evaluation metrics: pattern fuzziness, positive/negative energy ratio,
// detection scores with their average precision, and edge density. Metric
// rows are exported as CSV for external plotting.

namespace vgm {

// Mean over pattern nodes of the mean per-ARG node energy.
double pattern_fuzziness(const Pattern& pattern, std::span<const Arg> args,
                         std::span<const Assignment> assignments);

// Mean positive match energy / mean negative match energy (lower is better).
// Matching follows the solver settings in cfg. Returns 0 when both means are
// zero and +inf when only the negative mean is.
double energy_ratio(const Pattern& pattern, std::span<const Arg> pos_test,
                    std::span<const Arg> neg_test, const MiningConfig& cfg);

// -(E - zeta * matched_fraction): higher means more pattern-like.
double detection_score(const Pattern& pattern, const Arg& arg, const Assignment& assignment,
                       double zeta);

// Area under the precision-recall curve of the descending-score ranking;
// equal scores rank positives after negatives (pessimistic).
double average_precision(std::span<const double> scores_pos,
                         std::span<const double> scores_neg);

// |E| / |V|
double mean_out_degree(const Pattern& pattern);

struct MetricsRow {
    double tau = 0.0;
    int d = 0;  // kInfiniteDegree renders as "inf"
    int pattern_size = 0;
    double mean_out_degree = 0.0;
    double fuzziness = 0.0;
    double energy_ratio = 0.0;
    double ap = 0.0;
    double wall_time_s = 0.0;
};

// Fuzziness/ratio/AP of one pattern against a test split, matched per cfg.
MetricsRow evaluate_pattern(const Pattern& pattern, std::span<const Arg> pos_test,
                            std::span<const Arg> neg_test, const MiningConfig& cfg);

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);

}  // namespace vgm
