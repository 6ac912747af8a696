#pragma once

#include <span>

#include "vgm/arg_model.hpp"

// Max-margin training of the attribute weights. One sample per ARG: the
// feature vector stacks the per-type mean squared attribute differences of
// the match (unary types first, then pairwise types). Positives must end up
// on the low-energy side of the hyperplane, negatives on the high side.

namespace vgm {

// Raised when a sample cannot be formed (every pattern node mapped to kNone).
struct DegenerateSample : Error {
    using Error::Error;
};

struct MarginSample {
    Vec features;  // unary_types + pairwise_types entries, all >= 0
    bool positive = false;
};

// a_P[i] = mean over matched nodes of ||F_i^s - F_i^{x_s}||^2;
// a_Q[j] = mean over matched nodes with at least one matched outgoing edge of
// the per-node mean of ||F_j^{st} - F_j^{x_s x_t}||^2. When no node has a
// qualifying edge the pairwise entries are 0, keeping the dimension stable.
Vec extract_features(const Pattern& pattern, const Arg& arg, const Assignment& assignment);

struct TrainResult {
    Vec w;
    double bias = 0.0;
    double objective = 0.0;  // ||w||^2 + (C/N+)*sum(xi+) + (C/N-)*sum(xi-)
    bool converged = false;
    long iterations = 0;
};

// Solves min ||w||^2 + (C/N+) sum xi+ + (C/N-) sum xi- subject to
//   -(w.a+ - b) >= 1 - xi+  and  (w.a- - b) >= 1 - xi-,  xi >= 0,
// via pairwise coordinate ascent on the dual (an SMO scheme); the bias is
// recovered exactly by minimizing the piecewise-linear primal in b.
TrainResult train(std::span<const MarginSample> pos, std::span<const MarginSample> neg,
                  double c);

// Clips negative entries of the raw SVM weights, L1-normalizes, then blends
// lambda*w + (1-lambda)*w_prev and renormalizes; if everything clips to zero
// w_prev is returned unchanged. The result lives on the probability simplex.
Vec postprocess_and_blend(const Vec& w_raw, const Vec& w_prev, double lambda);

}  // namespace vgm
