#pragma once

#include <span>

#include "vgm/arg_model.hpp"

// Synthetic ARGs with a planted ground-truth pattern. Each positive ARG
// embeds the (possibly occluded) plant with additive Gaussian noise among
// uniform background nodes; negatives are all background. Generation is
// fully deterministic: every ARG draws from its own counter-derived stream,
// so output files are bit-identical for identical spec+seed.

namespace vgm {

struct SyntheticSpec {
    AttributeSchema schema;
    int pattern_size = 1;
    int n_background = 0;
    int n_positive = 1;
    int n_negative = 0;
    double noise_sigma = 0.0;      // stddev of per-component additive noise
    double occlusion_prob = 0.0;   // per plant node per positive ARG, in [0,1)
    double attr_min = 0.0;         // base range for plant and background values
    double attr_max = 1.0;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

inline constexpr int kOccluded = kNone;

struct GroundTruth {
    Pattern plant;  // noise-free prototype, complete directed edge set
    // correspondences[k][plant node] = ARG node index or kOccluded
    std::vector<std::map<NodeId, int>> correspondences;
};

struct SyntheticData {
    std::vector<Arg> positives;
    std::vector<Arg> negatives;
    GroundTruth truth;
};

SyntheticData generate(const SyntheticSpec& spec);

struct RecoveryReport {
    // Fraction of real (non-none) mined-node matches that land on a planted
    // ARG node.
    double precision = 0.0;
    // Fraction of plant nodes claimed by some mined node via majority vote.
    double recall = 0.0;
    int size_error = 0;  // |V_mined| - pattern_size
    // majority_vote[mined node] = plant node id or kNone (background/none).
    std::map<NodeId, NodeId> majority_vote;
};

RecoveryReport score_recovery(const Pattern& mined, std::span<const Assignment> assignments,
                              const GroundTruth& truth);

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const std::string& text);
void save_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth load_truth(const std::filesystem::path& path);

}  // namespace vgm
