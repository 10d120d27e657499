#ifndef TACT_TRAINER_HPP_
#define TACT_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tact/config.hpp"
#include "tact/metrics.hpp"
#include "tact/policy.hpp"
#include "tact/rewards.hpp"
#include "tact/types.hpp"

namespace tact {

struct Rollout {
  SampledTrace trace;
  RewardBreakdown reward;
  double total_reward = 0.0;
  double advantage = 0.0;
};

struct RolloutGroup {
  const QAItem* item = nullptr;
  std::vector<Rollout> rollouts;
  std::uint64_t mask_seed = 0;  // grounding-perturbation substream
  int credit = -1;              // tactile-use credit, -1 when disabled
};

// A_i = (R_i - mean) / (std + eps), population std. All-equal rewards give
// all-zero advantages. G < 2 is rejected.
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double eps = 1e-8);

struct GroundingResult {
  double value = 0.0;
  std::vector<double> grad;
};

// Mean over decision positions of KL(pi(.|real) || pi(.|masked)) where the
// masked input noise-masks one uniformly selected present stream. Gradient
// flows through both branches.
GroundingResult grounding_objective(const PolicyParams& params, const QAItem& item,
                                    const DecisionSequence& decisions,
                                    std::uint64_t mask_seed);

// Credit = 1 iff mean accuracy reward under the real tactile input beats the
// best counterfactual control by more than `margin`; real and control
// branches share one decision-noise stream.
int tactile_use_credit(const PolicyParams& params, const QAItem& item, int group_size,
                       const std::vector<ControlKind>& controls, Rng& rng, double margin,
                       const RewardWeights& weights, int k_levels);

struct StepStats {
  double mean_reward = 0.0;
  double mean_advantage = 0.0;
  double mean_abs_advantage = 0.0;
  double kl_to_ref = 0.0;
  double grounding_value = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
  double objective_value = 0.0;
};

struct ObjectiveResult {
  double value = 0.0;
  std::vector<double> grad;
  StepStats stats;
};

// Per-decision clipped surrogate minus beta * KL(pi || pi_ref), plus
// gamma * grounding objective; value and analytic gradient together.
ObjectiveResult grpo_objective(const PolicyParams& params, const PolicyParams& ref_params,
                               const std::vector<RolloutGroup>& batch,
                               const TrainerConfig& config);

// One gradient-ascent update on the objective. Non-finite gradients abort
// with diagnostics.
PolicyParams grpo_step(const PolicyParams& params, const PolicyParams& ref_params,
                       const std::vector<RolloutGroup>& batch, const TrainerConfig& config,
                       StepStats* stats = nullptr);

// Samples G rollouts for one item, scores them, and fills advantages.
// lambda_use > 0 adds the tactile-use bonus before normalization.
RolloutGroup sample_group(const PolicyParams& params, const QAItem& item,
                          const RewardWeights& weights, int k_levels,
                          const TrainerConfig& config, std::uint64_t group_seed);

struct IterationRecord {
  int iteration = 0;
  StepStats stats;
  double credit_rate = -1.0;  // -1 when the tactile-use credit is disabled
};

struct TrainArtifacts {
  PolicyParams sft_params;
  PolicyParams ref_params;
  PolicyParams final_params;
  SftStats sft_stats;
  std::vector<IterationRecord> iterations;
  std::vector<std::pair<int, MetricReport>> evals;  // (iteration, report)
  MetricReport final_report;
};

// Full run: bench generation, SFT on oracle traces over the SFT subset,
// reference freeze, GRPO over the disjoint RL subset with periodic held-out
// evaluation. Deterministic given (config, seed).
TrainArtifacts train(const RunConfig& config,
                     const std::function<void(const IterationRecord&)>& on_iteration = {},
                     const std::function<void(int, const MetricReport&)>& on_eval = {});

// Evaluation rollout: one sampled trace per held-out item (seeded), scored
// into a MetricReport.
MetricReport evaluate_policy(const PolicyParams& params, const std::vector<QAItem>& items,
                             int k_levels, std::uint64_t eval_seed);

// Mean grounding value of a policy over a set of items (diagnostic used by
// the grounding experiments).
double mean_grounding_value(const PolicyParams& params, const std::vector<QAItem>& items,
                            std::uint64_t seed, int max_items = 64);

}  // namespace tact

#endif  // TACT_TRAINER_HPP_
