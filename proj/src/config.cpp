#include "tact/config.hpp"

#include <cmath>
#include <set>

namespace tact {

namespace {

// Modal (h, r, p) triples on the 3-level scale, one row per material. All
// rows are distinct so any wrong visual prior disagrees with the tactile
// truth on at least one ordinal attribute.
constexpr std::array<std::array<int, 3>, kNumMaterials> kDefaultModalTriples = {{
    {1, 0, 0},  // plastic
    {2, 0, 1},  // metal
    {0, 2, 1},  // fabric
    {0, 0, 0},  // food
    {1, 1, 0},  // paper
    {2, 0, 0},  // glass
    {1, 2, 0},  // leather
    {2, 1, 1},  // wood
    {1, 1, 2},  // other
}};

std::vector<SensorParams> default_sensors() {
  std::vector<SensorParams> s(kNumSensors);
  s[0] = {SensorId::GsMini, {1.00, 1.00, 1.00, 1.00}, {0.00, 0.00, 0.00, 0.00},
          {0.010, 0.010, 0.010, 0.010}};
  s[1] = {SensorId::Xense, {1.20, 0.90, 1.10, 0.80}, {0.02, 0.01, -0.01, 0.03},
          {0.015, 0.015, 0.015, 0.015}};
  s[2] = {SensorId::Tac3d, {0.80, 1.30, 0.70, 1.20}, {-0.02, 0.03, 0.02, -0.01},
          {0.020, 0.020, 0.020, 0.020}};
  s[3] = {SensorId::DmTacX, {1.50, 1.10, 0.90, 1.40}, {0.05, -0.02, 0.04, 0.01},
          {0.010, 0.012, 0.014, 0.016}};
  return s;
}

}  // namespace

std::string_view to_string(ControlKind k) {
  return kControlNames[static_cast<std::size_t>(k)];
}

std::optional<ControlKind> control_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kControlNames.size(); ++i) {
    if (kControlNames[i] == name) return static_cast<ControlKind>(i);
  }
  return std::nullopt;
}

std::vector<double> default_stiffness_table(int k_levels) {
  // Log-spaced from 1 to 16; K=3 gives {1, 4, 16}.
  std::vector<double> t(static_cast<std::size_t>(k_levels));
  for (int i = 0; i < k_levels; ++i) {
    t[static_cast<std::size_t>(i)] =
        std::pow(16.0, static_cast<double>(i) / static_cast<double>(k_levels - 1));
  }
  return t;
}

std::vector<double> default_texture_table(int k_levels) {
  if (k_levels == 3) return {0.1, 0.5, 1.0};
  std::vector<double> t(static_cast<std::size_t>(k_levels));
  for (int i = 0; i < k_levels; ++i) {
    t[static_cast<std::size_t>(i)] =
        0.1 + 0.9 * static_cast<double>(i) / static_cast<double>(k_levels - 1);
  }
  return t;
}

std::vector<double> default_bump_table(int k_levels) { return default_texture_table(k_levels); }

int modal_level(int canonical_modal, int k_levels) {
  if (k_levels == 3) return canonical_modal;
  const double scaled = canonical_modal * (k_levels - 1) / 2.0;
  return static_cast<int>(std::lround(scaled));
}

void WorldConfig::validate() const {
  if (k_levels < 2 || k_levels > 5) throw ConfigError("world.k_levels must be in [2, 5]");
  if (deception_q < 0.0 || deception_q > 1.0)
    throw ConfigError("world.deception_q must be in [0, 1]");
  if (frames < 2) throw ConfigError("world.frames must be >= 2");
  if (f_max <= 0.0) throw ConfigError("world.f_max must be > 0");
  const auto check_table = [&](const std::vector<double>& t, const char* name) {
    if (static_cast<int>(t.size()) != k_levels)
      throw ConfigError(std::string("world.") + name + " must have k_levels entries");
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (!(t[i] > t[i - 1]))
        throw ConfigError(std::string("world.") + name + " must be strictly increasing");
    }
  };
  check_table(stiffness, "stiffness");
  check_table(texture_levels, "texture_levels");
  check_table(bump_levels, "bump_levels");
  if (stiffness.front() <= 0.0) throw ConfigError("world.stiffness must be positive");
  if (friction_base <= 0.0) throw ConfigError("world.friction_base must be > 0");
  if (mode_mass <= 0.0 || adjacent_mass < 0.0 || mode_mass + 2 * adjacent_mass > 1.0 + 1e-12)
    throw ConfigError("world attribute prior masses invalid");
  if (sensors.size() != kNumSensors) throw ConfigError("world.sensors must list all four sensors");
  std::set<int> ids;
  for (const auto& s : sensors) {
    ids.insert(static_cast<int>(s.id));
    for (double g : s.gain) {
      if (!(g > 0.0)) throw ConfigError("sensor gain must be > 0 on every channel");
    }
    for (double n : s.noise_sigma) {
      if (n < 0.0) throw ConfigError("sensor noise_sigma must be >= 0");
    }
  }
  if (ids.size() != kNumSensors) throw ConfigError("world.sensors ids must be distinct");
  for (int m = 0; m < kNumMaterials; ++m) {
    for (int v : materials[static_cast<std::size_t>(m)].modal) {
      if (v < 0 || v > 2) throw ConfigError("material modal levels use the canonical 0..2 scale");
    }
  }
}

void BenchConfig::validate(const WorldConfig& world) const {
  if (train_objects < 1 || heldout_objects < 1)
    throw ConfigError("bench object pools must be nonempty");
  if (listwise_len < 2 || listwise_len > 6)
    throw ConfigError("bench.listwise_len must be in [2, 6]");
  if (listwise_len > world.k_levels)
    throw ConfigError("bench.listwise_len cannot exceed k_levels (distinct levels required)");
  const auto check_counts = [](const TierCounts& c, const char* which) {
    const int vals[] = {c.property, c.compositional, c.pairwise,
                        c.listwise, c.cross_sensor, c.conflict};
    for (int v : vals) {
      if (v < 0) throw ConfigError(std::string("bench.") + which + " counts must be >= 0");
    }
    if (c.total() == 0) throw ConfigError(std::string("bench.") + which + " is empty");
  };
  check_counts(train_counts, "train_counts");
  check_counts(heldout_counts, "heldout_counts");
}

void RewardWeights::validate() const {
  if (lambda_acc < 0.0 || lambda_cs < 0.0 || lambda_fmt < 0.0)
    throw ConfigError("reward weights must be nonnegative");
}

void SftConfig::validate() const {
  if (steps < 0) throw ConfigError("sft.steps must be >= 0");
  if (learning_rate <= 0.0) throw ConfigError("sft.learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("sft.batch_size must be >= 1");
  if (holdout_frac < 0.0 || holdout_frac >= 1.0)
    throw ConfigError("sft.holdout_frac must be in [0, 1)");
  if (sft_frac <= 0.0 || sft_frac >= 1.0) throw ConfigError("sft.sft_frac must be in (0, 1)");
}

void TrainerConfig::validate() const {
  if (group_size < 2) throw ConfigError("trainer.group_size must be >= 2");
  if (kl_beta < 0.0) throw ConfigError("trainer.kl_beta must be >= 0");
  if (clip_epsilon <= 0.0 || clip_epsilon >= 1.0)
    throw ConfigError("trainer.clip_epsilon must be in (0, 1)");
  if (learning_rate <= 0.0) throw ConfigError("trainer.learning_rate must be > 0");
  if (gamma_grounding < 0.0) throw ConfigError("trainer.gamma_grounding must be >= 0");
  if (lambda_use < 0.0) throw ConfigError("trainer.lambda_use must be >= 0");
  if (use_margin < 0.0) throw ConfigError("trainer.use_margin must be >= 0");
  if (lambda_use > 0.0 && use_controls.empty())
    throw ConfigError("trainer.use_controls must be nonempty when lambda_use > 0");
  if (iterations < 0) throw ConfigError("trainer.iterations must be >= 0");
  if (groups_per_iter < 1) throw ConfigError("trainer.groups_per_iter must be >= 1");
  if (eval_every < 1) throw ConfigError("trainer.eval_every must be >= 1");
}

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) throw ConfigError("unsupported schema_version");
  world.validate();
  bench.validate(world);
  rewards.validate();
  sft.validate();
  trainer.validate();
}

RunConfig default_run_config() {
  RunConfig c;
  c.world.stiffness = default_stiffness_table(c.world.k_levels);
  c.world.texture_levels = default_texture_table(c.world.k_levels);
  c.world.bump_levels = default_bump_table(c.world.k_levels);
  for (int m = 0; m < kNumMaterials; ++m) {
    c.world.materials[static_cast<std::size_t>(m)].modal =
        kDefaultModalTriples[static_cast<std::size_t>(m)];
  }
  c.world.sensors = default_sensors();

  c.bench.train_objects = 800;
  c.bench.heldout_objects = 200;
  c.bench.heldout_counts = {1600, 800, 880, 400, 1000, 120};
  c.bench.train_counts = {1600, 800, 880, 400, 1000, 120};
  c.bench.listwise_len = 3;
  return c;
}

RunConfig desk_run_config() {
  RunConfig c = default_run_config();
  c.bench.train_objects = 160;
  c.bench.heldout_objects = 40;
  c.bench.heldout_counts = {200, 100, 120, 48, 116, 16};
  c.bench.train_counts = {400, 200, 220, 100, 200, 80};
  c.trainer.iterations = 300;
  c.trainer.eval_every = 100;
  return c;
}

}  // namespace tact
