#include "tact/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tact/world.hpp"

namespace tact {

std::vector<double> group_advantages(const std::vector<double>& rewards, double eps) {
  const std::size_t g = rewards.size();
  if (g < 2) throw std::invalid_argument("group_advantages needs G >= 2");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(g);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(g);
  const double std_dev = std::sqrt(var);
  std::vector<double> adv(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - mean) / (std_dev + eps);
  return adv;
}

namespace {

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  return std::max(kl, 0.0);
}

// Row-wise outer-product accumulation: grad_head[i] += coeff[i] * z.
void add_outer(std::vector<double>& grad, const PolicyLayout& layout, Head head,
               const std::vector<double>& coeff, std::span<const double> feature,
               int prev_choice, double scale) {
  const std::size_t off = layout.offset(head);
  const int fd = layout.feature_dim;
  const int id = layout.input_dim;
  for (int i = 0; i < layout.head(head).choices; ++i) {
    const double c = coeff[static_cast<std::size_t>(i)] * scale;
    if (c == 0.0) continue;
    double* row = grad.data() + off + static_cast<std::size_t>(i) * static_cast<std::size_t>(id);
    for (int j = 0; j < fd; ++j) row[j] += c * feature[static_cast<std::size_t>(j)];
    if (prev_choice >= 0) row[fd + prev_choice] += c;
  }
}

std::vector<double> probs_at(const PolicyParams& params, Head head,
                             std::span<const double> feature, int prev) {
  return head_distribution(params, head, feature, head, prev);
}

}  // namespace

GroundingResult grounding_objective(const PolicyParams& params, const QAItem& item,
                                    const DecisionSequence& decisions,
                                    std::uint64_t mask_seed) {
  std::vector<std::pair<int, int>> present;
  for (std::size_t o = 0; o < item.observations.size(); ++o) {
    for (std::size_t s = 0; s < item.observations[o].size(); ++s) {
      if (item.observations[o][s].present) present.emplace_back(static_cast<int>(o),
                                                                static_cast<int>(s));
    }
  }
  if (present.empty())
    throw std::invalid_argument("grounding_objective needs at least one present stream");

  Rng pick_rng(substream(mask_seed, "grounding.pick"));
  const auto [obj_idx, sens_idx] =
      present[static_cast<std::size_t>(pick_rng.uniform_int(static_cast<int>(present.size())))];

  QAItem masked = item;
  masked.observations[static_cast<std::size_t>(obj_idx)][static_cast<std::size_t>(sens_idx)] =
      perturb(item.observation(obj_idx, sens_idx), PerturbKind::NoiseMask,
              substream(mask_seed, "grounding.noise"));

  const auto& layout = params.layout;
  const auto z_real = featurize(item, layout);
  const auto z_mask = featurize(masked, layout);

  GroundingResult out;
  out.grad.assign(layout.total_params, 0.0);
  const double inv_t = 1.0 / static_cast<double>(decisions.size());
  int prev = -1;
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    const Head head = decisions.heads[t];
    const auto p = probs_at(params, head, z_real, prev);
    const auto q = probs_at(params, head, z_mask, prev);
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
    out.value += kl * inv_t;

    // d KL / d logits(real branch) = p .* (log(p/q) - kl)
    std::vector<double> coeff_p(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      coeff_p[i] = p[i] * (std::log(p[i]) - std::log(q[i]) - kl);
    }
    add_outer(out.grad, layout, head, coeff_p, z_real, prev, inv_t);
    // d KL / d logits(masked branch) = q - p
    std::vector<double> coeff_q(q.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) coeff_q[i] = q[i] - p[i];
    add_outer(out.grad, layout, head, coeff_q, z_mask, prev, inv_t);

    prev = decisions.choices[t];
  }
  return out;
}

int tactile_use_credit(const PolicyParams& params, const QAItem& item, int group_size,
                       const std::vector<ControlKind>& controls, Rng& rng, double margin,
                       const RewardWeights& weights, int k_levels) {
  if (controls.empty()) throw std::invalid_argument("tactile_use_credit needs controls");
  if (group_size < 1) throw std::invalid_argument("tactile_use_credit needs group_size >= 1");

  const std::size_t n_decisions = decision_heads_for(item, params.layout).size();
  // One shared decision-noise stream across the real and control branches.
  std::vector<std::vector<double>> us(static_cast<std::size_t>(group_size));
  for (auto& row : us) {
    row.resize(n_decisions);
    for (auto& u : row) u = rng.uniform();
  }
  std::vector<std::uint64_t> control_seeds;
  control_seeds.reserve(controls.size());
  for (std::size_t c = 0; c < controls.size(); ++c) control_seeds.push_back(rng.next_u64());

  const auto mean_acc = [&](const QAItem& variant) {
    double acc = 0.0;
    for (int g = 0; g < group_size; ++g) {
      const auto sample = sample_trace_with_us(params, variant, us[static_cast<std::size_t>(g)]);
      acc += composite_reward(sample.text, variant, weights, k_levels).r_acc;
    }
    return acc / static_cast<double>(group_size);
  };

  const double real_acc = mean_acc(item);
  double best_control = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < controls.size(); ++c) {
    QAItem variant = item;
    const auto kind = static_cast<PerturbKind>(static_cast<int>(controls[c]));
    int stream = 0;
    for (auto& per_object : variant.observations) {
      for (auto& obs : per_object) {
        if (!obs.present) continue;
        obs = perturb(obs, kind,
                      substream(control_seeds[c], "credit.stream",
                                static_cast<std::uint64_t>(stream++)));
      }
    }
    best_control = std::max(best_control, mean_acc(variant));
  }
  return (real_acc - best_control > margin) ? 1 : 0;
}

ObjectiveResult grpo_objective(const PolicyParams& params, const PolicyParams& ref_params,
                               const std::vector<RolloutGroup>& batch,
                               const TrainerConfig& config) {
  ObjectiveResult out;
  out.grad.assign(params.layout.total_params, 0.0);
  const auto& layout = params.layout;

  std::size_t n_rollouts = 0;
  for (const auto& group : batch) n_rollouts += group.rollouts.size();
  if (n_rollouts == 0) throw std::invalid_argument("grpo_objective needs rollouts");
  const double inv_n = 1.0 / static_cast<double>(n_rollouts);

  double surrogate_total = 0.0;
  double kl_total = 0.0;
  double grounding_total = 0.0;
  double reward_total = 0.0;
  double adv_total = 0.0;
  double abs_adv_total = 0.0;
  std::size_t clipped = 0;
  std::size_t decisions_total = 0;

  for (const auto& group : batch) {
    const QAItem& item = *group.item;
    const auto feature = featurize(item, layout);
    for (std::size_t r = 0; r < group.rollouts.size(); ++r) {
      const Rollout& rollout = group.rollouts[r];
      const auto& decisions = rollout.trace.decisions;
      const double adv = rollout.advantage;
      const double inv_t = 1.0 / static_cast<double>(decisions.size());
      reward_total += rollout.total_reward;
      adv_total += adv;
      abs_adv_total += std::abs(adv);

      int prev = -1;
      for (std::size_t t = 0; t < decisions.size(); ++t) {
        const Head head = decisions.heads[t];
        const int chosen = decisions.choices[t];
        const auto p_new = probs_at(params, head, feature, prev);
        const auto p_ref = probs_at(ref_params, head, feature, prev);
        const double p_old = std::exp(rollout.trace.step_logprobs[t]);
        const double ratio = p_new[static_cast<std::size_t>(chosen)] / p_old;
        const double unclipped = ratio * adv;
        const double clipped_ratio =
            std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
        const double clipped_term = clipped_ratio * adv;
        surrogate_total += std::min(unclipped, clipped_term) * inv_t * inv_n;
        ++decisions_total;

        if (unclipped <= clipped_term) {
          // d(ratio * adv)/d logits = adv * ratio * (onehot - p)
          std::vector<double> coeff(p_new.size(), 0.0);
          const double base = adv * ratio;
          for (std::size_t i = 0; i < p_new.size(); ++i) {
            coeff[i] = base * (((static_cast<int>(i) == chosen) ? 1.0 : 0.0) - p_new[i]);
          }
          add_outer(out.grad, layout, head, coeff, feature, prev, inv_t * inv_n);
        } else {
          ++clipped;
        }

        if (config.kl_beta > 0.0) {
          const double kl = kl_divergence(p_new, p_ref);
          kl_total += kl * inv_t * inv_n;
          std::vector<double> coeff(p_new.size(), 0.0);
          for (std::size_t i = 0; i < p_new.size(); ++i) {
            coeff[i] = p_new[i] * (std::log(p_new[i]) - std::log(p_ref[i]) - kl);
          }
          add_outer(out.grad, layout, head, coeff, feature, prev,
                    -config.kl_beta * inv_t * inv_n);
        } else {
          kl_total += kl_divergence(p_new, p_ref) * inv_t * inv_n;
        }
        prev = chosen;
      }

      if (config.gamma_grounding > 0.0) {
        const GroundingResult g = grounding_objective(
            params, item, decisions, substream(group.mask_seed, "rollout", r));
        grounding_total += g.value * inv_n;
        for (std::size_t j = 0; j < out.grad.size(); ++j) {
          out.grad[j] += config.gamma_grounding * g.grad[j] * inv_n;
        }
      }
    }
  }

  out.value = surrogate_total - config.kl_beta * kl_total +
              config.gamma_grounding * grounding_total;
  out.stats.mean_reward = reward_total * inv_n;
  out.stats.mean_advantage = adv_total * inv_n;
  out.stats.mean_abs_advantage = abs_adv_total * inv_n;
  out.stats.kl_to_ref = kl_total;
  out.stats.grounding_value = grounding_total;
  out.stats.clip_fraction =
      decisions_total == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(decisions_total);
  out.stats.objective_value = out.value;
  return out;
}

PolicyParams grpo_step(const PolicyParams& params, const PolicyParams& ref_params,
                       const std::vector<RolloutGroup>& batch, const TrainerConfig& config,
                       StepStats* stats) {
  config.validate();
  ObjectiveResult obj = grpo_objective(params, ref_params, batch, config);
  double norm2 = 0.0;
  for (double g : obj.grad) {
    if (!std::isfinite(g))
      throw TrainError("grpo_step: non-finite gradient (reward/advantage diagnostics in stats)");
    norm2 += g * g;
  }
  obj.stats.grad_norm = std::sqrt(norm2);
  PolicyParams next = params;
  for (std::size_t j = 0; j < next.weights.size(); ++j) {
    next.weights[j] += config.learning_rate * obj.grad[j];
  }
  if (stats != nullptr) *stats = obj.stats;
  return next;
}

RolloutGroup sample_group(const PolicyParams& params, const QAItem& item,
                          const RewardWeights& weights, int k_levels,
                          const TrainerConfig& config, std::uint64_t group_seed) {
  RolloutGroup group;
  group.item = &item;
  group.mask_seed = substream(group_seed, "grounding.mask");
  Rng rng(substream(group_seed, "rollout"));
  group.rollouts.reserve(static_cast<std::size_t>(config.group_size));
  for (int g = 0; g < config.group_size; ++g) {
    Rollout rollout;
    rollout.trace = sample_trace(params, item, rng);
    rollout.reward = composite_reward(rollout.trace.text, item, weights, k_levels);
    rollout.total_reward = rollout.reward.composite;
    group.rollouts.push_back(std::move(rollout));
  }
  if (config.lambda_use > 0.0) {
    Rng credit_rng(substream(group_seed, "credit"));
    group.credit = tactile_use_credit(params, item, config.group_size, config.use_controls,
                                      credit_rng, config.use_margin, weights, k_levels);
    for (auto& r : group.rollouts) r.total_reward += config.lambda_use * group.credit;
  }
  std::vector<double> rewards;
  rewards.reserve(group.rollouts.size());
  for (const auto& r : group.rollouts) rewards.push_back(r.total_reward);
  const auto advantages = group_advantages(rewards);
  for (std::size_t i = 0; i < advantages.size(); ++i) {
    group.rollouts[i].advantage = advantages[i];
  }
  return group;
}

MetricReport evaluate_policy(const PolicyParams& params, const std::vector<QAItem>& items,
                             int k_levels, std::uint64_t eval_seed) {
  std::vector<std::string> traces;
  traces.reserve(items.size());
  for (const auto& item : items) {
    Rng rng(substream(eval_seed, "eval.item", static_cast<std::uint64_t>(item.qa_id)));
    traces.push_back(sample_trace(params, item, rng).text);
  }
  return evaluate_traces(items, traces, k_levels);
}

double mean_grounding_value(const PolicyParams& params, const std::vector<QAItem>& items,
                            std::uint64_t seed, int max_items) {
  double total = 0.0;
  int used = 0;
  for (const auto& item : items) {
    if (used >= max_items) break;
    Rng rng(substream(seed, "grounding.sample", static_cast<std::uint64_t>(item.qa_id)));
    const auto sample = sample_trace(params, item, rng);
    total += grounding_objective(params, item, sample.decisions,
                                 substream(seed, "grounding.mask",
                                           static_cast<std::uint64_t>(item.qa_id)))
                 .value;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("mean_grounding_value needs items");
  return total / used;
}

TrainArtifacts train(const RunConfig& config,
                     const std::function<void(const IterationRecord&)>& on_iteration,
                     const std::function<void(int, const MetricReport&)>& on_eval) {
  config.validate();
  const std::uint64_t seed = config.seed;
  TrainArtifacts artifacts;

  const QASet bench = generate_bench(config.world, config.bench, substream(seed, "bench"));

  // Disjoint SFT / RL subsets of the train QA pool.
  Rng split_rng(substream(seed, "train.split"));
  std::vector<int> order = split_rng.permutation(static_cast<int>(bench.train.size()));
  const std::size_t n_sft = static_cast<std::size_t>(
      std::llround(config.sft.sft_frac * static_cast<double>(order.size())));
  std::vector<const QAItem*> rl_items;
  std::vector<SftPair> sft_pairs;
  const PolicyLayout layout = make_policy_layout(config.world.k_levels,
                                                 config.bench.listwise_len, config.world.f_max);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const QAItem& item = bench.train[static_cast<std::size_t>(order[i])];
    if (i < n_sft) {
      sft_pairs.push_back({&item, oracle_decisions(item, layout)});
    } else {
      rl_items.push_back(&item);
    }
  }
  if (rl_items.empty()) throw ConfigError("train: RL subset is empty; lower sft.sft_frac");

  artifacts.sft_params =
      sft_fit(zero_policy(layout), sft_pairs, config.sft, substream(seed, "sft"),
              &artifacts.sft_stats);
  artifacts.ref_params = artifacts.sft_params;  // frozen reference

  PolicyParams params = artifacts.sft_params;
  const int iters = config.trainer.iterations;
  for (int iter = 0; iter < iters; ++iter) {
    Rng iter_rng(substream(seed, "iter.pick", static_cast<std::uint64_t>(iter)));
    std::vector<RolloutGroup> batch;
    batch.reserve(static_cast<std::size_t>(config.trainer.groups_per_iter));
    for (int g = 0; g < config.trainer.groups_per_iter; ++g) {
      const QAItem& item =
          *rl_items[static_cast<std::size_t>(iter_rng.uniform_int(static_cast<int>(rl_items.size())))];
      batch.push_back(sample_group(
          params, item, config.rewards, config.world.k_levels, config.trainer,
          substream(seed, "group",
                    static_cast<std::uint64_t>(iter) * 100000ULL + static_cast<std::uint64_t>(g))));
    }
    IterationRecord record;
    record.iteration = iter;
    if (config.trainer.lambda_use > 0.0) {
      double credit_sum = 0.0;
      for (const auto& g : batch) credit_sum += g.credit;
      record.credit_rate = credit_sum / static_cast<double>(batch.size());
    }
    params = grpo_step(params, artifacts.ref_params, batch, config.trainer, &record.stats);
    artifacts.iterations.push_back(record);
    if (on_iteration) on_iteration(record);

    if ((iter + 1) % config.trainer.eval_every == 0) {
      const MetricReport report = evaluate_policy(
          params, bench.heldout, config.world.k_levels, substream(seed, "eval",
                                                                  static_cast<std::uint64_t>(iter)));
      artifacts.evals.emplace_back(iter + 1, report);
      if (on_eval) on_eval(iter + 1, report);
    }
  }

  if (artifacts.evals.empty() || artifacts.evals.back().first != iters) {
    const MetricReport report = evaluate_policy(params, bench.heldout, config.world.k_levels,
                                                substream(seed, "eval.final"));
    artifacts.evals.emplace_back(iters, report);
    if (on_eval) on_eval(iters, report);
  }
  artifacts.final_params = params;
  artifacts.final_report = artifacts.evals.back().second;
  return artifacts;
}

}  // namespace tact
