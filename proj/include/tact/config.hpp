#ifndef TACT_CONFIG_HPP_
#define TACT_CONFIG_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tact/types.hpp"

namespace tact {

inline constexpr int kSchemaVersion = 1;

// Per-sensor channel-wise affine + noise transform. Channels follow the
// feature order depth, shear, texture, bump; force passes through untouched
// so the ramp stays the frame index.
struct SensorParams {
  SensorId id = SensorId::GsMini;
  std::array<double, 4> gain{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> offset{0.0, 0.0, 0.0, 0.0};
  std::array<double, 4> noise_sigma{0.0, 0.0, 0.0, 0.0};
};

// Modal (hardness, roughness, protrusion) triple on the canonical 3-level
// scale; rescaled to other K by rounding.
struct MaterialPrior {
  std::array<int, 3> modal{0, 0, 0};
};

struct WorldConfig {
  int k_levels = 3;
  double deception_q = 0.25;
  int frames = 8;
  double f_max = 20.0;
  // Level tables, one entry per ordinal level. Defaults for K=3:
  // stiffness {1,4,16} (log-spaced), texture/bump {0.1,0.5,1.0}.
  std::vector<double> stiffness;
  std::vector<double> texture_levels;
  std::vector<double> bump_levels;
  double friction_base = 0.2;  // friction proxy mu(r) = friction_base * (1 + r)
  double mode_mass = 0.8;      // attribute prior: mass on the modal level
  double adjacent_mass = 0.1;  // mass on each adjacent level (renormalized at edges)
  std::array<MaterialPrior, kNumMaterials> materials{};
  std::vector<SensorParams> sensors;

  void validate() const;
};

struct TierCounts {
  int property = 0;
  int compositional = 0;
  int pairwise = 0;
  int listwise = 0;
  int cross_sensor = 0;
  int conflict = 0;

  int total() const {
    return property + compositional + pairwise + listwise + cross_sensor + conflict;
  }
};

struct BenchConfig {
  int train_objects = 800;
  int heldout_objects = 200;
  TierCounts train_counts;
  TierCounts heldout_counts;
  int listwise_len = 3;

  void validate(const WorldConfig& world) const;
};

struct RewardWeights {
  double lambda_acc = 0.6;
  double lambda_cs = 0.3;
  double lambda_fmt = 0.1;
  // When true, the accuracy reward collapses to exact-match 0/1 on ordinal
  // answers (the ablation baseline); the ordinal case table is used otherwise.
  bool binary_accuracy = false;

  void validate() const;
};

struct SftConfig {
  int steps = 600;
  double learning_rate = 0.08;
  int batch_size = 32;
  double holdout_frac = 0.2;
  // Floor on the held-out per-decision mean log-likelihood after fitting.
  double loglik_floor = -1.0;
  double sft_frac = 0.5;  // share of train items reserved for SFT (rest is RL)

  void validate() const;
};

enum class ControlKind : int { Remove = 0, Shuffle = 1, NoiseMask = 2 };

inline constexpr std::array<std::string_view, 3> kControlNames = {
    "remove", "shuffle", "noise_mask"};

std::string_view to_string(ControlKind k);
std::optional<ControlKind> control_from_string(std::string_view name);

struct TrainerConfig {
  int group_size = 8;
  double kl_beta = 1e-3;
  double clip_epsilon = 0.2;
  double learning_rate = 0.05;
  double gamma_grounding = 0.05;
  double lambda_use = 0.0;
  double use_margin = 0.05;
  std::vector<ControlKind> use_controls = {ControlKind::Remove, ControlKind::Shuffle,
                                           ControlKind::NoiseMask};
  int iterations = 300;
  int groups_per_iter = 8;
  int eval_every = 100;

  void validate() const;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  WorldConfig world;
  BenchConfig bench;
  RewardWeights rewards;
  SftConfig sft;
  TrainerConfig trainer;

  void validate() const;
};

// Paper-mirroring defaults: 200 held-out objects, 4,800 held-out QA.
RunConfig default_run_config();
// Small configuration for fast desk experiments: 40 held-out objects, 600 QA.
RunConfig desk_run_config();

// Level tables for arbitrary K. K=3 returns the documented default tables.
std::vector<double> default_stiffness_table(int k_levels);
std::vector<double> default_texture_table(int k_levels);
std::vector<double> default_bump_table(int k_levels);
int modal_level(int canonical_modal, int k_levels);

}  // namespace tact

#endif  // TACT_CONFIG_HPP_
