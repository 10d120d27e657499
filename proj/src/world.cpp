#include "tact/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "tact/rng.hpp"

namespace tact {

namespace {

// Attribute level drawn around the material's modal level: mode_mass on the
// mode, adjacent_mass on each in-range neighbor, renormalized at the edges.
int sample_attribute(Rng& rng, int modal, int k_levels, double mode_mass,
                     double adjacent_mass) {
  double mass_mode = mode_mass;
  double mass_lo = modal - 1 >= 0 ? adjacent_mass : 0.0;
  double mass_hi = modal + 1 < k_levels ? adjacent_mass : 0.0;
  const double total = mass_mode + mass_lo + mass_hi;
  const double u = rng.uniform() * total;
  if (u < mass_lo) return modal - 1;
  if (u < mass_lo + mass_mode) return modal;
  if (u < mass_lo + mass_mode + mass_hi) return modal + 1;
  return modal;
}

std::array<int, 3> modal_levels(const WorldConfig& config, int material) {
  const auto& m = config.materials[static_cast<std::size_t>(material)].modal;
  return {modal_level(m[0], config.k_levels), modal_level(m[1], config.k_levels),
          modal_level(m[2], config.k_levels)};
}

const SensorParams& sensor_params(const WorldConfig& config, SensorId id) {
  for (const auto& s : config.sensors) {
    if (s.id == id) return s;
  }
  throw ConfigError("sensor parameters missing for sensor id");
}

}  // namespace

ObjectSpec generate_object(std::uint64_t rng_seed, const WorldConfig& config) {
  if (config.k_levels < 2) throw std::invalid_argument("k_levels must be >= 2");
  Rng rng(rng_seed);
  ObjectSpec obj;
  obj.material = rng.uniform_int(kNumMaterials);
  const auto modal = modal_levels(config, obj.material);
  obj.hardness = sample_attribute(rng, modal[0], config.k_levels, config.mode_mass,
                                  config.adjacent_mass);
  obj.roughness = sample_attribute(rng, modal[1], config.k_levels, config.mode_mass,
                                   config.adjacent_mass);
  obj.protrusion = sample_attribute(rng, modal[2], config.k_levels, config.mode_mass,
                                    config.adjacent_mass);

  obj.apparent_material = obj.material;
  obj.deceptive = false;
  if (rng.uniform() < config.deception_q) {
    // Visual prior from a different material whose modal attributes differ on
    // at least one ordinal level.
    std::vector<int> candidates;
    for (int m = 0; m < kNumMaterials; ++m) {
      if (m == obj.material) continue;
      if (modal_levels(config, m) != modal) candidates.push_back(m);
    }
    if (candidates.empty()) throw DataError("no deception candidate materials in config");
    obj.apparent_material = candidates[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(candidates.size())))];
    obj.deceptive = true;
  }
  return obj;
}

Frame canonical_response(const ObjectSpec& object, double force, const WorldConfig& config) {
  Frame f;
  f.force = force;
  const double k = config.stiffness[static_cast<std::size_t>(object.hardness)];
  f.depth = force / k;
  const double scale = force / config.f_max;
  f.texture = config.texture_levels[static_cast<std::size_t>(object.roughness)] * scale;
  f.bump = config.bump_levels[static_cast<std::size_t>(object.protrusion)] * scale;
  const double mu = config.friction_base * (1.0 + object.roughness);
  f.shear = mu * f.depth;
  return f;
}

TactileObservation observe(const ObjectSpec& object, const SensorParams& sensor,
                           std::uint64_t rng_seed, int frames, double f_max,
                           const WorldConfig& config) {
  if (frames < 2) throw std::invalid_argument("frames must be >= 2");
  if (f_max <= 0.0) throw std::invalid_argument("f_max must be > 0");
  Rng rng(rng_seed);
  TactileObservation obs;
  obs.sensor = sensor.id;
  obs.present = true;
  obs.frames.reserve(static_cast<std::size_t>(frames));
  for (int t = 1; t <= frames; ++t) {
    const double force = f_max * static_cast<double>(t) / static_cast<double>(frames);
    Frame f = canonical_response(object, force, config);
    double* channels[] = {&f.depth, &f.shear, &f.texture, &f.bump};
    for (int c = 0; c < 4; ++c) {
      double v = sensor.gain[static_cast<std::size_t>(c)] * (*channels[c]) +
                 sensor.offset[static_cast<std::size_t>(c)];
      const double sigma = sensor.noise_sigma[static_cast<std::size_t>(c)];
      if (sigma > 0.0) v += rng.normal(0.0, sigma);
      *channels[c] = v;
    }
    obs.frames.push_back(f);
  }
  return obs;
}

TactileObservation perturb(const TactileObservation& observation, PerturbKind kind,
                           std::uint64_t rng_seed) {
  if (!observation.present) throw std::invalid_argument("cannot perturb an absent observation");
  TactileObservation out = observation;
  Rng rng(rng_seed);
  const int n = static_cast<int>(observation.frames.size());
  switch (kind) {
    case PerturbKind::Remove:
      out.present = false;
      out.frames.clear();
      break;
    case PerturbKind::Shuffle: {
      std::vector<int> perm;
      bool identity = true;
      do {
        perm = rng.permutation(n);
        identity = true;
        for (int i = 0; i < n; ++i) {
          if (perm[static_cast<std::size_t>(i)] != i) {
            identity = false;
            break;
          }
        }
      } while (identity && n >= 2);
      for (int i = 0; i < n; ++i) {
        out.frames[static_cast<std::size_t>(i)] =
            observation.frames[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      }
      break;
    }
    case PerturbKind::NoiseMask: {
      // Per-channel empirical mean/std over this observation's frames.
      double mean[4] = {0, 0, 0, 0};
      double var[4] = {0, 0, 0, 0};
      for (const auto& f : observation.frames) {
        const double vals[4] = {f.depth, f.shear, f.texture, f.bump};
        for (int c = 0; c < 4; ++c) mean[c] += vals[c];
      }
      for (int c = 0; c < 4; ++c) mean[c] /= n;
      for (const auto& f : observation.frames) {
        const double vals[4] = {f.depth, f.shear, f.texture, f.bump};
        for (int c = 0; c < 4; ++c) var[c] += (vals[c] - mean[c]) * (vals[c] - mean[c]);
      }
      for (int c = 0; c < 4; ++c) var[c] /= n;
      for (int i = 0; i < n; ++i) {
        Frame& f = out.frames[static_cast<std::size_t>(i)];
        double* channels[4] = {&f.depth, &f.shear, &f.texture, &f.bump};
        for (int c = 0; c < 4; ++c) {
          *channels[c] = rng.normal(mean[c], std::sqrt(var[c]));
        }
      }
      break;
    }
  }
  return out;
}

namespace {

struct BenchBuilder {
  const WorldConfig& world;
  const BenchConfig& bench;
  std::uint64_t root_seed;
  std::int64_t next_qa_id = 0;

  std::vector<ObjectSpec> make_pool(int count, std::int64_t id_offset, const char* tag) {
    std::vector<ObjectSpec> pool;
    pool.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      ObjectSpec obj =
          generate_object(substream(root_seed, tag, static_cast<std::uint64_t>(i)), world);
      obj.object_id = id_offset + i;
      pool.push_back(obj);
    }
    return pool;
  }

  TactileObservation observe_for(const ObjectSpec& obj, SensorId sensor, std::int64_t qa_id,
                                 int slot) {
    const std::uint64_t seed = substream(
        root_seed, "bench.obs",
        static_cast<std::uint64_t>(qa_id) * 64 + static_cast<std::uint64_t>(slot));
    return observe(obj, sensor_params(world, sensor), seed, world.frames, world.f_max, world);
  }

  void materialize(QAItem& item) {
    item.observations.clear();
    int slot = 0;
    for (const auto& obj : item.objects) {
      std::vector<TactileObservation> per_sensor;
      for (const auto sensor : item.sensors) {
        per_sensor.push_back(observe_for(obj, sensor, item.qa_id, slot++));
      }
      item.observations.push_back(std::move(per_sensor));
    }
  }

  // Rejection-samples unique key tuples; exhausting the attempt budget means
  // the requested count exceeds the feasible unique combinations.
  template <typename Key, typename MakeFn>
  void fill_tier(std::vector<QAItem>& items, int count, Rng& rng, MakeFn make) {
    std::set<Key> used;
    const long attempts_cap = 2000L * std::max(count, 1) + 1000;
    long attempts = 0;
    int made = 0;
    while (made < count) {
      if (++attempts > attempts_cap)
        throw DataError("tier counts exceed feasible unique combinations");
      std::optional<std::pair<Key, QAItem>> candidate = make(rng, made);
      if (!candidate) continue;
      if (!used.insert(candidate->first).second) continue;
      QAItem item = std::move(candidate->second);
      item.qa_id = next_qa_id++;
      materialize(item);
      items.push_back(std::move(item));
      ++made;
    }
  }

  std::vector<QAItem> build_split(const std::vector<ObjectSpec>& pool,
                                  const TierCounts& counts, const char* tag) {
    Rng rng(substream(root_seed, tag));
    std::vector<QAItem> items;
    items.reserve(static_cast<std::size_t>(counts.total()));
    const int n_obj = static_cast<int>(pool.size());
    const auto pick_sensor = [&](Rng& r) {
      return static_cast<SensorId>(r.uniform_int(kNumSensors));
    };
    const auto ordinal_attr = [](int i) { return static_cast<Attribute>(i % 3); };

    // property: attribute round-robin over all four, unique (obj, sensor, attr)
    fill_tier<std::tuple<int, int, int>>(
        items, counts.property, rng,
        [&](Rng& r, int made) -> std::optional<std::pair<std::tuple<int, int, int>, QAItem>> {
          const Attribute attr = static_cast<Attribute>(made % kNumAttributes);
          const int oi = r.uniform_int(n_obj);
          const SensorId sensor = pick_sensor(r);
          QAItem item;
          item.tier = Tier::Property;
          item.attribute = attr;
          item.objects = {pool[static_cast<std::size_t>(oi)]};
          item.sensors = {sensor};
          const ObjectSpec& obj = item.objects[0];
          item.truth = attr == Attribute::Material ? Answer::make_material(obj.material)
                                                   : Answer::make_level(obj.ordinal(attr));
          return std::make_pair(
              std::make_tuple(oi, static_cast<int>(sensor), static_cast<int>(attr)),
              std::move(item));
        });

    // ordinal_compositional: unique (obj, sensor)
    fill_tier<std::pair<int, int>>(
        items, counts.compositional, rng,
        [&](Rng& r, int) -> std::optional<std::pair<std::pair<int, int>, QAItem>> {
          const int oi = r.uniform_int(n_obj);
          const SensorId sensor = pick_sensor(r);
          QAItem item;
          item.tier = Tier::OrdinalCompositional;
          item.attribute = Attribute::Hardness;  // unused for tuple answers
          item.objects = {pool[static_cast<std::size_t>(oi)]};
          item.sensors = {sensor};
          const ObjectSpec& obj = item.objects[0];
          item.truth = Answer::make_tuple(obj.hardness, obj.roughness, obj.protrusion);
          return std::make_pair(std::make_pair(oi, static_cast<int>(sensor)), std::move(item));
        });

    // comparative_pairwise: distinct levels required, unique (attr, a, b, sensor)
    fill_tier<std::tuple<int, int, int, int>>(
        items, counts.pairwise, rng,
        [&](Rng& r,
            int made) -> std::optional<std::pair<std::tuple<int, int, int, int>, QAItem>> {
          const Attribute attr = ordinal_attr(made);
          const int a = r.uniform_int(n_obj);
          const int b = r.uniform_int(n_obj);
          if (a == b) return std::nullopt;
          const ObjectSpec& oa = pool[static_cast<std::size_t>(a)];
          const ObjectSpec& ob = pool[static_cast<std::size_t>(b)];
          if (oa.ordinal(attr) == ob.ordinal(attr)) return std::nullopt;
          const SensorId sensor = pick_sensor(r);
          QAItem item;
          item.tier = Tier::ComparativePairwise;
          item.attribute = attr;
          item.objects = {oa, ob};
          item.sensors = {sensor};
          item.truth = Answer::make_pair(oa.ordinal(attr) > ob.ordinal(attr) ? 0 : 1);
          return std::make_pair(
              std::make_tuple(static_cast<int>(attr), a, b, static_cast<int>(sensor)),
              std::move(item));
        });

    // comparative_listwise: pairwise-distinct levels, ascending truth order
    fill_tier<std::tuple<int, std::vector<int>, int>>(
        items, counts.listwise, rng,
        [&](Rng& r, int made)
            -> std::optional<std::pair<std::tuple<int, std::vector<int>, int>, QAItem>> {
          const Attribute attr = ordinal_attr(made);
          const int L = bench.listwise_len;
          std::vector<int> chosen;
          std::set<int> levels_seen;
          for (int tries = 0; tries < 8 * L && static_cast<int>(chosen.size()) < L; ++tries) {
            const int oi = r.uniform_int(n_obj);
            const int level = pool[static_cast<std::size_t>(oi)].ordinal(attr);
            if (std::find(chosen.begin(), chosen.end(), oi) != chosen.end()) continue;
            if (!levels_seen.insert(level).second) continue;
            chosen.push_back(oi);
          }
          if (static_cast<int>(chosen.size()) < L) return std::nullopt;
          const SensorId sensor = pick_sensor(r);
          QAItem item;
          item.tier = Tier::ComparativeListwise;
          item.attribute = attr;
          for (int oi : chosen) item.objects.push_back(pool[static_cast<std::size_t>(oi)]);
          item.sensors = {sensor};
          // permutation listing object indices in ascending attribute order
          std::vector<int> order(static_cast<std::size_t>(L));
          for (int i = 0; i < L; ++i) order[static_cast<std::size_t>(i)] = i;
          std::sort(order.begin(), order.end(), [&](int x, int y) {
            return item.objects[static_cast<std::size_t>(x)].ordinal(attr) <
                   item.objects[static_cast<std::size_t>(y)].ordinal(attr);
          });
          item.truth = Answer::make_perm(order);
          std::vector<int> key_objs = chosen;
          std::sort(key_objs.begin(), key_objs.end());
          return std::make_pair(std::make_tuple(static_cast<int>(attr), std::move(key_objs),
                                                static_cast<int>(sensor)),
                                std::move(item));
        });

    // cross_sensor: two distinct sensors, ordinal attribute only
    fill_tier<std::tuple<int, int, int, int>>(
        items, counts.cross_sensor, rng,
        [&](Rng& r,
            int made) -> std::optional<std::pair<std::tuple<int, int, int, int>, QAItem>> {
          const Attribute attr = ordinal_attr(made);
          const int oi = r.uniform_int(n_obj);
          const int sa = r.uniform_int(kNumSensors);
          int sb = r.uniform_int(kNumSensors - 1);
          if (sb >= sa) ++sb;
          QAItem item;
          item.tier = Tier::CrossSensor;
          item.attribute = attr;
          item.objects = {pool[static_cast<std::size_t>(oi)]};
          item.sensors = {static_cast<SensorId>(sa), static_cast<SensorId>(sb)};
          item.truth = Answer::make_level(item.objects[0].ordinal(attr));
          return std::make_pair(std::make_tuple(static_cast<int>(attr), oi, sa, sb),
                                std::move(item));
        });

    // conflict: deceptive objects only, material question, unique (obj, sensor)
    std::vector<int> deceptive;
    for (int i = 0; i < n_obj; ++i) {
      if (pool[static_cast<std::size_t>(i)].deceptive) deceptive.push_back(i);
    }
    if (counts.conflict > 0 && deceptive.empty())
      throw DataError("conflict tier requested but the pool has no deceptive objects");
    fill_tier<std::pair<int, int>>(
        items, counts.conflict, rng,
        [&](Rng& r, int) -> std::optional<std::pair<std::pair<int, int>, QAItem>> {
          const int oi = deceptive[static_cast<std::size_t>(
              r.uniform_int(static_cast<int>(deceptive.size())))];
          const SensorId sensor = pick_sensor(r);
          QAItem item;
          item.tier = Tier::Conflict;
          item.attribute = Attribute::Material;
          item.objects = {pool[static_cast<std::size_t>(oi)]};
          item.sensors = {sensor};
          item.truth = Answer::make_material(item.objects[0].material);
          return std::make_pair(std::make_pair(oi, static_cast<int>(sensor)), std::move(item));
        });

    return items;
  }
};

}  // namespace

QASet generate_bench(const WorldConfig& world, const BenchConfig& bench,
                     std::uint64_t rng_seed) {
  world.validate();
  bench.validate(world);
  BenchBuilder builder{world, bench, rng_seed};
  const auto train_pool = builder.make_pool(bench.train_objects, 0, "world.object.train");
  const auto heldout_pool =
      builder.make_pool(bench.heldout_objects, bench.train_objects, "world.object.heldout");
  QASet set;
  set.train = builder.build_split(train_pool, bench.train_counts, "bench.train");
  set.heldout = builder.build_split(heldout_pool, bench.heldout_counts, "bench.heldout");
  return set;
}

TraceSlots oracle_slots(const QAItem& item) {
  const ObjectSpec& obj = item.objects.at(0);
  TraceLine line;
  line.hardness = obj.hardness;
  line.roughness = obj.roughness;
  line.protrusion = obj.protrusion;
  line.material = obj.material;

  TraceSlots slots;
  slots.template_id = 0;
  for (const auto sensor : item.sensors) {
    TraceLine perceive = line;
    perceive.sensor = sensor;
    slots.perceive.push_back(perceive);
  }
  slots.compare = line;
  slots.answer = item.truth;
  return slots;
}

std::string oracle_trace(const QAItem& item) { return render_trace(item, oracle_slots(item)); }

}  // namespace tact
