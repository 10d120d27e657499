#ifndef TACT_TESTS_TEST_UTIL_HPP_
#define TACT_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tact/config.hpp"
#include "tact/policy.hpp"
#include "tact/rng.hpp"
#include "tact/types.hpp"
#include "tact/world.hpp"

namespace tact::testutil {

inline WorldConfig test_world_config() {
  return desk_run_config().world;
}

inline WorldConfig noiseless_world_config() {
  WorldConfig w = test_world_config();
  for (auto& s : w.sensors) s.noise_sigma = {0.0, 0.0, 0.0, 0.0};
  return w;
}

inline SensorParams identity_sensor() {
  SensorParams s;
  s.id = SensorId::GsMini;
  s.gain = {1.0, 1.0, 1.0, 1.0};
  s.offset = {0.0, 0.0, 0.0, 0.0};
  s.noise_sigma = {0.0, 0.0, 0.0, 0.0};
  return s;
}

inline const SensorParams& sensor_of(const WorldConfig& w, SensorId id) {
  for (const auto& s : w.sensors) {
    if (s.id == id) return s;
  }
  throw std::runtime_error("sensor not in config");
}

inline ObjectSpec make_object(int hardness, int roughness, int protrusion, int material,
                              int apparent = -1) {
  ObjectSpec o;
  o.hardness = hardness;
  o.roughness = roughness;
  o.protrusion = protrusion;
  o.material = material;
  o.apparent_material = apparent < 0 ? material : apparent;
  o.deceptive = o.apparent_material != o.material;
  return o;
}

// Single-object item with materialized observations.
inline QAItem make_item(const WorldConfig& w, Tier tier, Attribute attr,
                        const ObjectSpec& obj, std::vector<SensorId> sensors,
                        std::uint64_t seed = 7) {
  QAItem item;
  item.qa_id = 1;
  item.tier = tier;
  item.attribute = attr;
  item.objects = {obj};
  item.sensors = sensors;
  std::vector<TactileObservation> per_sensor;
  int slot = 0;
  for (const auto s : sensors) {
    per_sensor.push_back(observe(obj, sensor_of(w, s), substream(seed, "obs", slot++),
                                 w.frames, w.f_max, w));
  }
  item.observations = {per_sensor};
  switch (tier) {
    case Tier::Property:
    case Tier::CrossSensor:
      item.truth = attr == Attribute::Material ? Answer::make_material(obj.material)
                                               : Answer::make_level(obj.ordinal(attr));
      break;
    case Tier::Conflict:
      item.truth = Answer::make_material(obj.material);
      break;
    case Tier::OrdinalCompositional:
      item.truth = Answer::make_tuple(obj.hardness, obj.roughness, obj.protrusion);
      break;
    default:
      throw std::runtime_error("make_item only builds single-object tiers");
  }
  return item;
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b,
                            double floor = 1e-6) {
  if (a.size() != b.size()) throw std::runtime_error("size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

// Central finite differences of a scalar function over a flat parameter vector.
inline std::vector<double> finite_difference(std::vector<double>& params,
                                             const std::function<double()>& f,
                                             double h = 1e-5) {
  std::vector<double> grad(params.size(), 0.0);
  for (std::size_t j = 0; j < params.size(); ++j) {
    const double saved = params[j];
    params[j] = saved + h;
    const double hi = f();
    params[j] = saved - h;
    const double lo = f();
    params[j] = saved;
    grad[j] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

inline PolicyParams random_policy(const PolicyLayout& layout, std::uint64_t seed,
                                  double scale = 0.3) {
  PolicyParams p = zero_policy(layout);
  Rng rng(seed);
  for (auto& w : p.weights) w = rng.normal(0.0, scale);
  return p;
}

}  // namespace tact::testutil

#endif  // TACT_TESTS_TEST_UTIL_HPP_
