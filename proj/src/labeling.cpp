#include "vgm/labeling.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace vgm {

namespace {

constexpr double kInfCost = std::numeric_limits<double>::infinity();

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

// Marks real label values in use; negative values (occlusion) are exempt.
class UsedLabels {
  public:
    explicit UsedLabels(const LabelingProblem& p) {
        int max_value = -1;
        for (const auto& ls : p.labels)
            for (int v : ls) max_value = std::max(max_value, v);
        used_.assign(static_cast<std::size_t>(max_value + 1), 0);
    }
    bool in_use(int value) const { return value >= 0 && used_[value]; }
    void add(int value) {
        if (value >= 0) ++used_[value];
    }
    void remove(int value) {
        if (value >= 0) --used_[value];
    }

  private:
    std::vector<int> used_;
};

}  // namespace

double LabelingProblem::search_space() const {
    double total = 1.0;
    for (const auto& ls : labels) total *= static_cast<double>(ls.size());
    return total;
}

double LabelingProblem::energy_of(const std::vector<int>& label_index) const {
    double e = 0.0;
    for (int v = 0; v < var_count(); ++v) e += unary[v][label_index[v]];
    for (const auto& pt : pairs) {
        const std::size_t nb = labels[pt.v].size();
        e += pt.cost[label_index[pt.u] * nb + label_index[pt.v]];
    }
    if (distinct_real_labels) {
        std::vector<int> seen;
        for (int v = 0; v < var_count(); ++v) {
            const int value = labels[v][label_index[v]];
            if (value < 0) continue;
            if (std::find(seen.begin(), seen.end(), value) != seen.end()) return kInfCost;
            seen.push_back(value);
        }
    }
    return e;
}

bool exact_feasible(const LabelingProblem& problem, double budget) {
    return problem.search_space() <= budget;
}

LabelingResult solve_exact(const LabelingProblem& problem, double budget) {
    if (!exact_feasible(problem, budget))
        throw std::length_error("labeling instance too large for exhaustive search");
    const int n = problem.var_count();

    // Pair terms become chargeable once their later variable is assigned.
    std::vector<std::vector<int>> charged_at(n);
    for (std::size_t i = 0; i < problem.pairs.size(); ++i) {
        const auto& pt = problem.pairs[i];
        charged_at[std::max(pt.u, pt.v)].push_back(static_cast<int>(i));
    }

    LabelingResult best;
    best.energy = kInfCost;
    bool found = false;
    std::vector<int> current(n, 0);
    UsedLabels used(problem);
    long expanded = 0;

    auto step_cost = [&](int v, int a) {
        double c = problem.unary[v][a];
        for (int ti : charged_at[v]) {
            const auto& pt = problem.pairs[ti];
            const std::size_t nb = problem.labels[pt.v].size();
            const int au = (pt.u == v) ? a : current[pt.u];
            const int av = (pt.v == v) ? a : current[pt.v];
            c += pt.cost[au * nb + av];
        }
        return c;
    };

    // Iterative DFS with explicit per-depth cost prefix.
    std::vector<double> prefix(n + 1, 0.0);
    std::vector<int> cursor(n, 0);
    int depth = 0;
    while (depth >= 0) {
        if (depth == n) {
            if (!found || prefix[n] < best.energy) {
                found = true;
                best.energy = prefix[n];
                best.label_index = current;
            }
            --depth;
            if (depth >= 0) used.remove(problem.labels[depth][current[depth]]);
            continue;
        }
        bool descended = false;
        while (cursor[depth] < static_cast<int>(problem.labels[depth].size())) {
            const int a = cursor[depth]++;
            const int value = problem.labels[depth][a];
            if (problem.distinct_real_labels && used.in_use(value)) continue;
            ++expanded;
            const double c = prefix[depth] + step_cost(depth, a);
            if (found && c >= best.energy) continue;
            current[depth] = a;
            used.add(value);
            prefix[depth + 1] = c;
            ++depth;
            if (depth < n) cursor[depth] = 0;
            descended = true;
            break;
        }
        if (!descended) {
            --depth;
            if (depth >= 0) used.remove(problem.labels[depth][current[depth]]);
        }
    }

    if (!found) throw std::runtime_error("labeling problem has no feasible assignment");
    best.label_value.resize(n);
    for (int v = 0; v < n; ++v) best.label_value[v] = problem.labels[v][best.label_index[v]];
    best.iterations = expanded;
    best.exact = true;
    return best;
}

LabelingResult solve_icm(const LabelingProblem& problem, int restarts, std::uint64_t seed) {
    if (restarts < 1) throw std::invalid_argument("solve_icm: restarts must be >= 1");
    const int n = problem.var_count();

    std::vector<std::vector<int>> incident(n);
    for (std::size_t i = 0; i < problem.pairs.size(); ++i) {
        incident[problem.pairs[i].u].push_back(static_cast<int>(i));
        if (problem.pairs[i].v != problem.pairs[i].u)
            incident[problem.pairs[i].v].push_back(static_cast<int>(i));
    }

    LabelingResult best;
    best.energy = kInfCost;
    bool found = false;
    long total_sweeps = 0;

    auto conditional_cost = [&](const std::vector<int>& cur, int v, int a) {
        double c = problem.unary[v][a];
        for (int ti : incident[v]) {
            const auto& pt = problem.pairs[ti];
            const std::size_t nb = problem.labels[pt.v].size();
            const int au = (pt.u == v) ? a : cur[pt.u];
            const int av = (pt.v == v) ? a : cur[pt.v];
            c += pt.cost[au * nb + av];
        }
        return c;
    };

    for (int r = 0; r < restarts; ++r) {
        SplitMix64 rng{seed ^ (0x51d9f2a379ab4c85ULL + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r))};
        std::vector<int> cur(n, 0);
        UsedLabels used(problem);
        for (int v = 0; v < n; ++v) {
            const auto& ls = problem.labels[v];
            std::vector<int> avail;
            for (int a = 0; a < static_cast<int>(ls.size()); ++a)
                if (!problem.distinct_real_labels || !used.in_use(ls[a])) avail.push_back(a);
            if (avail.empty())
                throw std::runtime_error("labeling problem has no feasible assignment");
            cur[v] = avail[rng.below(avail.size())];
            used.add(ls[cur[v]]);
        }

        bool moved = true;
        int sweeps = 0;
        while (moved && sweeps < 1000) {
            moved = false;
            ++sweeps;
            for (int v = 0; v < n; ++v) {
                const auto& ls = problem.labels[v];
                const double cur_cost = conditional_cost(cur, v, cur[v]);
                int best_a = cur[v];
                double best_c = cur_cost;
                for (int a = 0; a < static_cast<int>(ls.size()); ++a) {
                    if (a == cur[v]) continue;
                    if (problem.distinct_real_labels && used.in_use(ls[a])) continue;
                    const double c = conditional_cost(cur, v, a);
                    if (c < best_c) {
                        best_c = c;
                        best_a = a;
                    }
                }
                if (best_a != cur[v]) {
                    used.remove(ls[cur[v]]);
                    used.add(ls[best_a]);
                    cur[v] = best_a;
                    moved = true;
                }
            }
        }
        total_sweeps += sweeps;

        const double e = problem.energy_of(cur);
        if (!found || e < best.energy) {
            found = true;
            best.energy = e;
            best.label_index = cur;
        }
    }

    best.label_value.resize(n);
    for (int v = 0; v < n; ++v) best.label_value[v] = problem.labels[v][best.label_index[v]];
    best.iterations = total_sweeps;
    best.exact = false;
    return best;
}

}  // namespace vgm
