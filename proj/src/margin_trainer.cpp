#include "vgm/margin_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vgm/kernels.hpp"

namespace vgm {

Vec extract_features(const Pattern& pattern, const Arg& arg, const Assignment& assignment) {
    if (pattern.schema != arg.schema)
        throw SchemaError("pattern and ARG '" + arg.id + "' use different schemas");
    const int np = pattern.schema.unary_types();
    const int nq = pattern.schema.pairwise_types();
    Vec features(np + nq, 0.0);

    int matched = 0;
    for (const auto& [s, attrs] : pattern.node_attrs) {
        const int xs = assignment.target(s);
        if (xs == kNone) continue;
        ++matched;
        for (int i = 0; i < np; ++i)
            features[i] += kernels::squared_l2_diff(attrs[i], arg.nodes[xs][i]);
    }
    if (matched == 0)
        throw DegenerateSample("ARG '" + arg.id + "': every pattern node is mapped to none");
    for (int i = 0; i < np; ++i) features[i] /= matched;

    // Outer mean over nodes with at least one matched outgoing edge.
    Vec pair_sum(nq, 0.0);
    int qualifying_nodes = 0;
    for (const auto& [s, _] : pattern.node_attrs) {
        const int xs = assignment.target(s);
        if (xs == kNone) continue;
        Vec inner(nq, 0.0);
        int inner_count = 0;
        for (NodeId t : pattern.out_targets(s)) {
            const int xt = assignment.target(t);
            if (xt == kNone) continue;
            ++inner_count;
            const auto& edge_attrs = pattern.edge_attrs.at({s, t});
            const auto& arg_attrs = arg.pair_attrs(xs, xt);
            for (int j = 0; j < nq; ++j)
                inner[j] += kernels::squared_l2_diff(edge_attrs[j], arg_attrs[j]);
        }
        if (inner_count == 0) continue;
        ++qualifying_nodes;
        for (int j = 0; j < nq; ++j) pair_sum[j] += inner[j] / inner_count;
    }
    if (qualifying_nodes > 0)
        for (int j = 0; j < nq; ++j) features[np + j] = pair_sum[j] / qualifying_nodes;
    return features;
}

namespace {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Exact minimizer of the convex piecewise-linear hinge sum in b given w.
double best_bias(const std::vector<Vec>& x, const std::vector<int>& y, const Vec& cost,
                 const Vec& w) {
    const std::size_t n = x.size();
    std::vector<double> breaks(n);
    for (std::size_t i = 0; i < n; ++i) breaks[i] = dot(w, x[i]) - y[i];
    std::sort(breaks.begin(), breaks.end());
    auto hinge_sum = [&](double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += cost[i] * std::max(0.0, 1.0 - y[i] * (dot(w, x[i]) - b));
        return s;
    };
    double best_b = breaks[0];
    double best_v = hinge_sum(best_b);
    for (std::size_t i = 1; i < n; ++i) {
        const double v = hinge_sum(breaks[i]);
        if (v < best_v) {
            best_v = v;
            best_b = breaks[i];
        }
    }
    return best_b;
}

}  // namespace

TrainResult train(std::span<const MarginSample> pos, std::span<const MarginSample> neg,
                  double c) {
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("train: need at least one sample per class");
    if (!(c > 0.0)) throw std::invalid_argument("train: C must be > 0");

    const std::size_t dim = pos[0].features.size();
    std::vector<Vec> x;
    std::vector<int> y;       // -1 for positives (low-energy side), +1 for negatives
    Vec cost;                 // per-sample slack cost
    for (const auto& s : pos) {
        if (s.features.size() != dim) throw SchemaError("train: inconsistent feature size");
        x.push_back(s.features);
        y.push_back(-1);
        cost.push_back(c / static_cast<double>(pos.size()));
    }
    for (const auto& s : neg) {
        if (s.features.size() != dim) throw SchemaError("train: inconsistent feature size");
        x.push_back(s.features);
        y.push_back(+1);
        cost.push_back(c / static_cast<double>(neg.size()));
    }
    const std::size_t n = x.size();

    // Dual: max sum(alpha) - 1/4 ||sum alpha_i y_i x_i||^2,
    //       0 <= alpha_i <= cost_i, sum alpha_i y_i = 0; w = v/2.
    Vec alpha(n, 0.0);
    Vec v(dim, 0.0);  // sum alpha_i y_i x_i

    const long max_passes = 100000;
    const double tol = 1e-12;
    long pass = 0;
    bool converged = false;
    for (; pass < max_passes; ++pass) {
        double max_step = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                // beta_i += t, beta_j -= t keeps the equality constraint.
                double lo = -kInf, hi = kInf;
                if (y[i] > 0) {
                    lo = std::max(lo, -alpha[i]);
                    hi = std::min(hi, cost[i] - alpha[i]);
                } else {
                    lo = std::max(lo, alpha[i] - cost[i]);
                    hi = std::min(hi, alpha[i]);
                }
                if (y[j] > 0) {
                    lo = std::max(lo, alpha[j] - cost[j]);
                    hi = std::min(hi, alpha[j]);
                } else {
                    lo = std::max(lo, -alpha[j]);
                    hi = std::min(hi, cost[j] - alpha[j]);
                }
                if (!(lo < hi) && !(lo == hi)) continue;

                double diff_dot_v = 0.0, diff_sq = 0.0;
                for (std::size_t k = 0; k < dim; ++k) {
                    const double dk = x[i][k] - x[j][k];
                    diff_dot_v += dk * v[k];
                    diff_sq += dk * dk;
                }
                const double slope = (y[i] - y[j]) - 0.5 * diff_dot_v;
                double t;
                if (diff_sq > 1e-300) {
                    t = std::clamp(slope / (0.5 * diff_sq), lo, hi);
                } else {
                    t = slope > 0 ? hi : (slope < 0 ? lo : 0.0);
                }
                if (t == 0.0 || !std::isfinite(t)) continue;

                alpha[i] += y[i] * t;
                alpha[j] -= y[j] * t;
                for (std::size_t k = 0; k < dim; ++k) v[k] += t * (x[i][k] - x[j][k]);
                max_step = std::max(max_step, std::abs(t));
            }
        }
        if (max_step < tol) {
            converged = true;
            break;
        }
    }

    TrainResult res;
    res.w.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) res.w[k] = 0.5 * v[k];
    res.bias = best_bias(x, y, cost, res.w);
    res.converged = converged;
    res.iterations = pass + 1;

    double obj = dot(res.w, res.w);
    for (std::size_t i = 0; i < n; ++i)
        obj += cost[i] * std::max(0.0, 1.0 - y[i] * (dot(res.w, x[i]) - res.bias));
    res.objective = obj;
    return res;
}

Vec postprocess_and_blend(const Vec& w_raw, const Vec& w_prev, double lambda) {
    if (w_raw.size() != w_prev.size())
        throw SchemaError("postprocess_and_blend: weight size mismatch");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("postprocess_and_blend: lambda must be in [0,1]");
    Vec w(w_raw.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::max(w_raw[i], 0.0);
        norm += w[i];
    }
    if (norm <= 0.0) return w_prev;  // everything clipped away
    double blended_sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = lambda * (w[i] / norm) + (1.0 - lambda) * w_prev[i];
        blended_sum += w[i];
    }
    if (blended_sum > 0.0)
        for (double& wi : w) wi /= blended_sum;
    return w;
}

}  // namespace vgm
