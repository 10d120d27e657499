#include "tact/policy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tact/world.hpp"

namespace tact {

namespace {

constexpr int kStatsPerSensorSlot = 6;  // presence + 5 pooled statistics
constexpr int kSensorSlots = 2;
constexpr int kVisualPriorDim = kNumMaterials;
constexpr int kObjectBlockDim = kSensorSlots * kStatsPerSensorSlot + kVisualPriorDim;

int max_objects_for(int listwise_len) { return std::max(listwise_len, 2); }

}  // namespace

int feature_dim_for(int max_objects) {
  return 1 + max_objects * kObjectBlockDim + kNumTiers + kNumAttributes + 2 * kNumSensors;
}

PolicyLayout make_policy_layout(int k_levels, int listwise_len, double f_max) {
  if (k_levels < 2) throw ConfigError("policy k_levels must be >= 2");
  if (listwise_len < 2) throw ConfigError("policy listwise_len must be >= 2");
  if (f_max <= 0.0) throw ConfigError("policy f_max must be > 0");
  PolicyLayout layout;
  layout.k_levels = k_levels;
  layout.listwise_len = listwise_len;
  layout.f_max = f_max;
  layout.max_objects = max_objects_for(listwise_len);
  layout.feature_dim = feature_dim_for(layout.max_objects);

  const int K = k_levels;
  layout.heads = {
      {"template", kNumTemplates},
      {"perceive_a.hardness", K}, {"perceive_a.roughness", K},
      {"perceive_a.protrusion", K}, {"perceive_a.material", kNumMaterials},
      {"perceive_b.hardness", K}, {"perceive_b.roughness", K},
      {"perceive_b.protrusion", K}, {"perceive_b.material", kNumMaterials},
      {"compare.hardness", K}, {"compare.roughness", K},
      {"compare.protrusion", K}, {"compare.material", kNumMaterials},
      {"answer.level", K}, {"answer.material", kNumMaterials},
      {"answer.tuple_hardness", K}, {"answer.tuple_roughness", K},
      {"answer.tuple_protrusion", K},
      {"answer.pair", 2},
  };
  for (int j = 0; j + 1 < listwise_len; ++j) {
    layout.heads.push_back({"answer.list" + std::to_string(j), listwise_len - j});
  }

  int max_choices = 0;
  for (const auto& h : layout.heads) max_choices = std::max(max_choices, h.choices);
  layout.prefix_dim = max_choices;
  layout.input_dim = layout.feature_dim + layout.prefix_dim;

  layout.offsets.resize(layout.heads.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < layout.heads.size(); ++i) {
    layout.offsets[i] = offset;
    offset += static_cast<std::size_t>(layout.heads[i].choices) *
              static_cast<std::size_t>(layout.input_dim);
  }
  layout.total_params = offset;
  return layout;
}

PolicyParams zero_policy(const PolicyLayout& layout) {
  PolicyParams p;
  p.layout = layout;
  p.weights.assign(layout.total_params, 0.0);
  return p;
}

std::span<double> PolicyParams::head_weights(Head h) {
  const auto& spec = layout.head(h);
  return {weights.data() + layout.offset(h),
          static_cast<std::size_t>(spec.choices) * static_cast<std::size_t>(layout.input_dim)};
}

std::span<const double> PolicyParams::head_weights(Head h) const {
  const auto& spec = layout.head(h);
  return {weights.data() + layout.offset(h),
          static_cast<std::size_t>(spec.choices) * static_cast<std::size_t>(layout.input_dim)};
}

std::vector<double> featurize(const QAItem& item, const PolicyLayout& layout) {
  const double f_max = layout.f_max;
  std::vector<double> x(static_cast<std::size_t>(layout.feature_dim), 0.0);
  x[0] = 1.0;  // bias

  const int n_objects = static_cast<int>(item.objects.size());
  const int n_sensors = static_cast<int>(item.sensors.size());
  for (int o = 0; o < std::min(n_objects, layout.max_objects); ++o) {
    const int object_base = 1 + o * kObjectBlockDim;
    for (int s = 0; s < std::min(n_sensors, kSensorSlots); ++s) {
      const int base = object_base + s * kStatsPerSensorSlot;
      const TactileObservation& obs = item.observation(o, s);
      if (!obs.present || obs.frames.size() < 2) continue;
      const int T = static_cast<int>(obs.frames.size());
      // Commanded force ramp; shuffling frames decorrelates depth from it.
      double mean_f = 0.0, mean_d = 0.0, mean_shear = 0.0, mean_tex = 0.0, mean_bump = 0.0;
      for (int t = 0; t < T; ++t) {
        const double ramp = f_max * static_cast<double>(t + 1) / static_cast<double>(T);
        const Frame& fr = obs.frames[static_cast<std::size_t>(t)];
        mean_f += ramp;
        mean_d += fr.depth;
        mean_shear += fr.shear;
        mean_tex += fr.texture;
        mean_bump += fr.bump;
      }
      mean_f /= T;
      mean_d /= T;
      mean_shear /= T;
      mean_tex /= T;
      mean_bump /= T;
      double cov = 0.0, var_f = 0.0;
      for (int t = 0; t < T; ++t) {
        const double ramp = f_max * static_cast<double>(t + 1) / static_cast<double>(T);
        const double df = ramp - mean_f;
        cov += df * (obs.frames[static_cast<std::size_t>(t)].depth - mean_d);
        var_f += df * df;
      }
      x[static_cast<std::size_t>(base + 0)] = 1.0;  // presence
      x[static_cast<std::size_t>(base + 1)] = cov / var_f;
      x[static_cast<std::size_t>(base + 2)] = obs.frames.back().depth / f_max;
      x[static_cast<std::size_t>(base + 3)] = mean_shear / f_max;
      x[static_cast<std::size_t>(base + 4)] = mean_tex;
      x[static_cast<std::size_t>(base + 5)] = mean_bump;
    }
    const int visual_base = object_base + kSensorSlots * kStatsPerSensorSlot;
    x[static_cast<std::size_t>(visual_base + item.objects[static_cast<std::size_t>(o)]
                                                 .apparent_material)] = 1.0;
  }

  int base = 1 + layout.max_objects * kObjectBlockDim;
  x[static_cast<std::size_t>(base + static_cast<int>(item.tier))] = 1.0;
  base += kNumTiers;
  x[static_cast<std::size_t>(base + static_cast<int>(item.attribute))] = 1.0;
  base += kNumAttributes;
  if (n_sensors >= 1) x[static_cast<std::size_t>(base + static_cast<int>(item.sensors[0]))] = 1.0;
  base += kNumSensors;
  if (n_sensors >= 2) x[static_cast<std::size_t>(base + static_cast<int>(item.sensors[1]))] = 1.0;
  return x;
}

std::vector<int> tactile_feature_indices(const PolicyLayout& layout) {
  std::vector<int> idx;
  for (int o = 0; o < layout.max_objects; ++o) {
    for (int s = 0; s < kSensorSlots; ++s) {
      const int base = 1 + o * kObjectBlockDim + s * kStatsPerSensorSlot;
      for (int c = 0; c < kStatsPerSensorSlot; ++c) idx.push_back(base + c);
    }
  }
  return idx;
}

std::vector<Head> decision_heads_for(const QAItem& item, const PolicyLayout& layout) {
  std::vector<Head> heads = {Head::Template, Head::PerceiveHardA, Head::PerceiveRoughA,
                             Head::PerceiveProtA, Head::PerceiveMatA};
  if (item.sensors.size() == 2) {
    heads.insert(heads.end(), {Head::PerceiveHardB, Head::PerceiveRoughB,
                               Head::PerceiveProtB, Head::PerceiveMatB});
  }
  heads.insert(heads.end(), {Head::CompareHard, Head::CompareRough, Head::CompareProt,
                             Head::CompareMat});
  switch (item.tier) {
    case Tier::Property:
    case Tier::CrossSensor:
      heads.push_back(item.attribute == Attribute::Material ? Head::AnswerMaterial
                                                            : Head::AnswerLevel);
      break;
    case Tier::Conflict:
      heads.push_back(Head::AnswerMaterial);
      break;
    case Tier::OrdinalCompositional:
      heads.insert(heads.end(), {Head::AnswerTupleHard, Head::AnswerTupleRough,
                                 Head::AnswerTupleProt});
      break;
    case Tier::ComparativePairwise:
      heads.push_back(Head::AnswerPair);
      break;
    case Tier::ComparativeListwise: {
      const int L = static_cast<int>(item.objects.size());
      if (L != layout.listwise_len)
        throw DataError("listwise item length does not match the policy layout");
      for (int j = 0; j + 1 < L; ++j) {
        heads.push_back(static_cast<Head>(static_cast<int>(Head::AnswerList0) + j));
      }
      break;
    }
  }
  return heads;
}

namespace {

// logits -> probabilities in place, numerically stable softmax
void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

std::vector<double> head_probs(const PolicyParams& params, Head head,
                               std::span<const double> feature, int prev_choice) {
  const auto& layout = params.layout;
  const auto& spec = layout.head(head);
  const auto w = params.head_weights(head);
  const int fd = layout.feature_dim;
  const int id = layout.input_dim;
  std::vector<double> logits(static_cast<std::size_t>(spec.choices), 0.0);
  for (int i = 0; i < spec.choices; ++i) {
    const double* row = w.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(id);
    double acc = 0.0;
    for (int j = 0; j < fd; ++j) acc += row[j] * feature[static_cast<std::size_t>(j)];
    if (prev_choice >= 0) acc += row[fd + prev_choice];
    logits[static_cast<std::size_t>(i)] = acc;
  }
  softmax_inplace(logits);
  return logits;
}

}  // namespace

std::vector<double> head_distribution(const PolicyParams& params, Head head,
                                      std::span<const double> feature, Head /*prev_head*/,
                                      int prev_choice) {
  return head_probs(params, head, feature, prev_choice);
}

std::vector<std::vector<double>> decision_distributions(const PolicyParams& params,
                                                        const QAItem& item,
                                                        std::span<const double> feature,
                                                        const DecisionSequence& decisions) {
  (void)item;
  std::vector<std::vector<double>> out;
  out.reserve(decisions.size());
  int prev = -1;
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    out.push_back(head_probs(params, decisions.heads[t], feature, prev));
    prev = decisions.choices[t];
  }
  return out;
}

namespace {

SampledTrace sample_impl(const PolicyParams& params, const QAItem& item,
                         const std::function<double(std::size_t)>& next_u, bool greedy) {
  const auto heads = decision_heads_for(item, params.layout);
  const auto feature = featurize(item, params.layout);
  SampledTrace out;
  out.decisions.heads = heads;
  out.decisions.choices.reserve(heads.size());
  out.step_logprobs.reserve(heads.size());
  int prev = -1;
  for (std::size_t t = 0; t < heads.size(); ++t) {
    const auto probs = head_probs(params, heads[t], feature, prev);
    int choice = 0;
    if (greedy) {
      choice = static_cast<int>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
    } else {
      choice = categorical_from_u(probs, next_u(t));
    }
    out.decisions.choices.push_back(choice);
    const double lp = std::log(probs[static_cast<std::size_t>(choice)]);
    out.step_logprobs.push_back(lp);
    out.logprob += lp;
    prev = choice;
  }
  out.text = render_trace(item, slots_from_decisions(item, out.decisions));
  return out;
}

}  // namespace

SampledTrace sample_trace(const PolicyParams& params, const QAItem& item, Rng& rng) {
  return sample_impl(params, item, [&rng](std::size_t) { return rng.uniform(); }, false);
}

SampledTrace sample_trace_with_us(const PolicyParams& params, const QAItem& item,
                                  std::span<const double> us) {
  return sample_impl(
      params, item,
      [us](std::size_t t) {
        if (t >= us.size()) throw std::invalid_argument("decision-noise stream too short");
        return us[t];
      },
      false);
}

SampledTrace greedy_trace(const PolicyParams& params, const QAItem& item) {
  return sample_impl(params, item, [](std::size_t) { return 0.0; }, true);
}

TraceSlots slots_from_decisions(const QAItem& item, const DecisionSequence& decisions) {
  const auto& c = decisions.choices;
  std::size_t i = 0;
  TraceSlots slots;
  slots.template_id = c.at(i++);

  const auto take_line = [&](std::optional<SensorId> sensor) {
    TraceLine line;
    line.sensor = sensor;
    line.hardness = c.at(i++);
    line.roughness = c.at(i++);
    line.protrusion = c.at(i++);
    line.material = c.at(i++);
    return line;
  };
  slots.perceive.push_back(take_line(item.sensors.at(0)));
  if (item.sensors.size() == 2) slots.perceive.push_back(take_line(item.sensors.at(1)));
  slots.compare = take_line(std::nullopt);
  slots.compare.sensor.reset();

  switch (item.tier) {
    case Tier::Property:
    case Tier::CrossSensor:
      slots.answer = item.attribute == Attribute::Material
                         ? Answer::make_material(c.at(i++))
                         : Answer::make_level(c.at(i++));
      break;
    case Tier::Conflict:
      slots.answer = Answer::make_material(c.at(i++));
      break;
    case Tier::OrdinalCompositional: {
      const int h = c.at(i++);
      const int r = c.at(i++);
      const int p = c.at(i++);
      slots.answer = Answer::make_tuple(h, r, p);
      break;
    }
    case Tier::ComparativePairwise:
      slots.answer = Answer::make_pair(c.at(i++));
      break;
    case Tier::ComparativeListwise: {
      const int L = static_cast<int>(item.objects.size());
      std::vector<int> remaining(static_cast<std::size_t>(L));
      std::iota(remaining.begin(), remaining.end(), 0);
      std::vector<int> perm;
      for (int j = 0; j + 1 < L; ++j) {
        const int pick = c.at(i++);
        perm.push_back(remaining.at(static_cast<std::size_t>(pick)));
        remaining.erase(remaining.begin() + pick);
      }
      perm.push_back(remaining.at(0));
      slots.answer = Answer::make_perm(perm);
      break;
    }
  }
  if (i != c.size()) throw std::invalid_argument("decision sequence length mismatch");
  return slots;
}

DecisionSequence oracle_decisions(const QAItem& item, const PolicyLayout& layout) {
  DecisionSequence seq;
  seq.heads = decision_heads_for(item, layout);
  const ObjectSpec& obj = item.objects.at(0);
  seq.choices.push_back(0);  // template 0
  const int lines = item.sensors.size() == 2 ? 3 : 2;  // perceive lines + compare
  for (int l = 0; l < lines; ++l) {
    seq.choices.push_back(obj.hardness);
    seq.choices.push_back(obj.roughness);
    seq.choices.push_back(obj.protrusion);
    seq.choices.push_back(obj.material);
  }
  const Answer& truth = item.truth;
  switch (truth.kind) {
    case Answer::Kind::Level:
      seq.choices.push_back(truth.level);
      break;
    case Answer::Kind::Material:
      seq.choices.push_back(truth.material);
      break;
    case Answer::Kind::Tuple:
      seq.choices.push_back(truth.tuple[0]);
      seq.choices.push_back(truth.tuple[1]);
      seq.choices.push_back(truth.tuple[2]);
      break;
    case Answer::Kind::Pair:
      seq.choices.push_back(truth.pair_choice);
      break;
    case Answer::Kind::Perm: {
      std::vector<int> remaining(truth.perm.size());
      std::iota(remaining.begin(), remaining.end(), 0);
      for (std::size_t j = 0; j + 1 < truth.perm.size(); ++j) {
        const auto it = std::find(remaining.begin(), remaining.end(), truth.perm[j]);
        seq.choices.push_back(static_cast<int>(it - remaining.begin()));
        remaining.erase(it);
      }
      break;
    }
  }
  if (seq.choices.size() != seq.heads.size())
    throw std::logic_error("oracle decision length mismatch");
  return seq;
}

double trace_logprob(const PolicyParams& params, const QAItem& item,
                     const DecisionSequence& decisions) {
  const auto feature = featurize(item, params.layout);
  double lp = 0.0;
  int prev = -1;
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    const auto probs = head_probs(params, decisions.heads[t], feature, prev);
    lp += std::log(probs[static_cast<std::size_t>(decisions.choices[t])]);
    prev = decisions.choices[t];
  }
  return lp;
}

void accumulate_logprob_grad(const PolicyParams& params, const QAItem& item,
                             const DecisionSequence& decisions, double scale,
                             std::vector<double>& grad) {
  const auto& layout = params.layout;
  const auto feature = featurize(item, layout);
  const int fd = layout.feature_dim;
  const int id = layout.input_dim;
  int prev = -1;
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    const Head head = decisions.heads[t];
    const auto probs = head_probs(params, head, feature, prev);
    const int chosen = decisions.choices[t];
    const std::size_t off = layout.offset(head);
    for (int i = 0; i < layout.head(head).choices; ++i) {
      const double coeff = ((i == chosen) ? 1.0 : 0.0) - probs[static_cast<std::size_t>(i)];
      if (coeff == 0.0) continue;
      double* row = grad.data() + off + static_cast<std::size_t>(i) * static_cast<std::size_t>(id);
      const double cs = coeff * scale;
      for (int j = 0; j < fd; ++j) row[j] += cs * feature[static_cast<std::size_t>(j)];
      if (prev >= 0) row[fd + prev] += cs;
    }
    prev = chosen;
  }
}

std::vector<double> logprob_grad(const PolicyParams& params, const QAItem& item,
                                 const DecisionSequence& decisions) {
  std::vector<double> grad(params.layout.total_params, 0.0);
  accumulate_logprob_grad(params, item, decisions, 1.0, grad);
  return grad;
}

PolicyParams sft_fit(const PolicyParams& params, const std::vector<SftPair>& pairs,
                     const SftConfig& config, std::uint64_t seed, SftStats* stats) {
  config.validate();
  if (pairs.empty()) {
    if (stats != nullptr) *stats = SftStats{};
    return params;
  }
  PolicyParams p = params;
  const std::size_t n = pairs.size();
  Rng split_rng(substream(seed, "sft.split"));
  std::vector<int> order = split_rng.permutation(static_cast<int>(n));
  const std::size_t n_holdout = static_cast<std::size_t>(
      std::floor(config.holdout_frac * static_cast<double>(n)));
  std::vector<int> holdout(order.begin(), order.begin() + static_cast<long>(n_holdout));
  std::vector<int> train(order.begin() + static_cast<long>(n_holdout), order.end());
  if (train.empty()) throw TrainError("sft: no training pairs after holdout split");

  const auto mean_loglik = [&p](const std::vector<int>& idx,
                                const std::vector<SftPair>& all) {
    if (idx.empty()) return 0.0;
    double total = 0.0;
    for (int i : idx) {
      const auto& pair = all[static_cast<std::size_t>(i)];
      total += trace_logprob(p, *pair.item, pair.decisions) /
               static_cast<double>(pair.decisions.size());
    }
    return total / static_cast<double>(idx.size());
  };

  // Adam ascent on the per-decision mean log-likelihood.
  std::vector<double> m(p.layout.total_params, 0.0);
  std::vector<double> v(p.layout.total_params, 0.0);
  std::vector<double> grad(p.layout.total_params, 0.0);
  const double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;
  Rng batch_rng(substream(seed, "sft.batch"));
  for (int step = 1; step <= config.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const int bsz = std::min<int>(config.batch_size, static_cast<int>(train.size()));
    for (int b = 0; b < bsz; ++b) {
      const int i = train[static_cast<std::size_t>(batch_rng.uniform_int(
          static_cast<int>(train.size())))];
      const auto& pair = pairs[static_cast<std::size_t>(i)];
      accumulate_logprob_grad(p, *pair.item, pair.decisions,
                              1.0 / (static_cast<double>(bsz) *
                                     static_cast<double>(pair.decisions.size())),
                              grad);
    }
    const double bc1 = 1.0 - std::pow(b1, step);
    const double bc2 = 1.0 - std::pow(b2, step);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      if (!std::isfinite(grad[j])) throw TrainError("sft: non-finite gradient");
      m[j] = b1 * m[j] + (1.0 - b1) * grad[j];
      v[j] = b2 * v[j] + (1.0 - b2) * grad[j] * grad[j];
      p.weights[j] += config.learning_rate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + adam_eps);
    }
  }

  SftStats out;
  out.steps_run = config.steps;
  out.final_train_loglik = mean_loglik(train, pairs);
  out.final_holdout_loglik = holdout.empty() ? out.final_train_loglik : mean_loglik(holdout, pairs);
  if (!std::isfinite(out.final_train_loglik) || !std::isfinite(out.final_holdout_loglik))
    throw TrainError("sft: non-finite log-likelihood");
  if (config.steps > 0 && out.final_holdout_loglik < config.loglik_floor)
    throw TrainError("sft: held-out log-likelihood below the configured floor");
  if (stats != nullptr) *stats = out;
  return p;
}

}  // namespace tact
