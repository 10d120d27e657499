#ifndef TACT_POLICY_HPP_
#define TACT_POLICY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tact/config.hpp"
#include "tact/rng.hpp"
#include "tact/trace.hpp"
#include "tact/types.hpp"

namespace tact {

// Decision heads of the slot-structured policy. Each head is a linear map
// from (feature ++ previous-decision one-hot) to logits over its choices; a
// trace is realized by drawing the template id and then every slot value in
// template order.
enum class Head : int {
  Template = 0,
  PerceiveHardA, PerceiveRoughA, PerceiveProtA, PerceiveMatA,
  PerceiveHardB, PerceiveRoughB, PerceiveProtB, PerceiveMatB,
  CompareHard, CompareRough, CompareProt, CompareMat,
  AnswerLevel, AnswerMaterial,
  AnswerTupleHard, AnswerTupleRough, AnswerTupleProt,
  AnswerPair,
  AnswerList0,  // listwise heads follow contiguously: AnswerList0 + j
};

struct HeadSpec {
  std::string name;
  int choices = 0;
};

struct PolicyLayout {
  int k_levels = 3;
  int listwise_len = 3;
  int max_objects = 3;
  double f_max = 20.0;  // force normalizer baked into the featurizer
  int feature_dim = 0;
  int prefix_dim = 0;   // padded one-hot width of the previous decision
  int input_dim = 0;    // feature_dim + prefix_dim
  std::vector<HeadSpec> heads;
  std::vector<std::size_t> offsets;  // per-head offset into the flat weights
  std::size_t total_params = 0;

  int num_heads() const { return static_cast<int>(heads.size()); }
  const HeadSpec& head(Head h) const { return heads[static_cast<std::size_t>(h)]; }
  std::size_t offset(Head h) const { return offsets[static_cast<std::size_t>(h)]; }
};

PolicyLayout make_policy_layout(int k_levels, int listwise_len, double f_max = 20.0);

struct PolicyParams {
  PolicyLayout layout;
  std::vector<double> weights;  // flat, heads at layout.offsets, row-major

  std::span<double> head_weights(Head h);
  std::span<const double> head_weights(Head h) const;
};

PolicyParams zero_policy(const PolicyLayout& layout);

// Feature layout (documented order; all blocks zero when absent):
//   [0]                       bias = 1
//   per object slot o < max_objects:
//     per sensor slot s < 2:  presence, depth-vs-force slope, final depth/F,
//                             mean shear/F, mean texture, mean bump   (6)
//     visual-prior one-hot over the 9 materials
//   tier one-hot (6), attribute one-hot (4),
//   sensor-a one-hot (4), sensor-b one-hot (4)
// The slope is fitted against the commanded force ramp, so temporal shuffling
// of frames perturbs it; removed streams contribute zeros with presence 0.
std::vector<double> featurize(const QAItem& item, const PolicyLayout& layout);

int feature_dim_for(int max_objects);
// Offset of the tactile statistics block (presence excluded) for one
// (object slot, sensor slot); the grounded/blind distinction keys off these.
std::vector<int> tactile_feature_indices(const PolicyLayout& layout);

// Head sequence realizing one trace for this item's tier.
std::vector<Head> decision_heads_for(const QAItem& item, const PolicyLayout& layout);

struct DecisionSequence {
  std::vector<Head> heads;
  std::vector<int> choices;

  std::size_t size() const { return choices.size(); }
};

// Distribution of decision t given the feature vector and the previous
// decision (-1 for the first position). Sums to 1 within 1e-12.
std::vector<double> head_distribution(const PolicyParams& params, Head head,
                                      std::span<const double> feature, Head prev_head,
                                      int prev_choice);

// Teacher-forced distributions at every position of `decisions`.
std::vector<std::vector<double>> decision_distributions(const PolicyParams& params,
                                                        const QAItem& item,
                                                        std::span<const double> feature,
                                                        const DecisionSequence& decisions);

struct SampledTrace {
  std::string text;
  DecisionSequence decisions;
  std::vector<double> step_logprobs;
  double logprob = 0.0;
};

SampledTrace sample_trace(const PolicyParams& params, const QAItem& item, Rng& rng);
// Same walk with externally supplied uniforms (shared decision-noise stream).
SampledTrace sample_trace_with_us(const PolicyParams& params, const QAItem& item,
                                  std::span<const double> us);
// Argmax decode.
SampledTrace greedy_trace(const PolicyParams& params, const QAItem& item);

TraceSlots slots_from_decisions(const QAItem& item, const DecisionSequence& decisions);
// Decision sequence whose rendered trace equals the oracle trace.
DecisionSequence oracle_decisions(const QAItem& item, const PolicyLayout& layout);

double trace_logprob(const PolicyParams& params, const QAItem& item,
                     const DecisionSequence& decisions);

// Analytic gradient of trace_logprob in the flat parameter space.
std::vector<double> logprob_grad(const PolicyParams& params, const QAItem& item,
                                 const DecisionSequence& decisions);

// Accumulating variant used by the fitting loops.
void accumulate_logprob_grad(const PolicyParams& params, const QAItem& item,
                             const DecisionSequence& decisions, double scale,
                             std::vector<double>& grad);

struct SftPair {
  const QAItem* item = nullptr;
  DecisionSequence decisions;
};

struct SftStats {
  double final_train_loglik = 0.0;    // per-decision mean
  double final_holdout_loglik = 0.0;  // per-decision mean
  int steps_run = 0;
};

// Maximum-likelihood fit of oracle decision sequences by Adam ascent. Throws
// TrainError when the loss goes non-finite or the held-out log-likelihood
// floor is not reached. Zero pairs return the params unchanged.
PolicyParams sft_fit(const PolicyParams& params, const std::vector<SftPair>& pairs,
                     const SftConfig& config, std::uint64_t seed,
                     SftStats* stats = nullptr);

}  // namespace tact

#endif  // TACT_POLICY_HPP_
