#include "tact/serialize.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace tact {

namespace {

void require_keys(const Json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (allowed.find(key) == allowed.end())
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("bad value for key '") + key + "'");
  }
}

std::string material_token(int index) { return std::string(material_name(index)); }

int material_index(const Json& j, const char* where) {
  if (!j.is_string()) throw DataError(std::string(where) + ": material must be a name");
  const auto m = material_from_string(j.get<std::string>());
  if (!m) throw DataError(std::string(where) + ": unknown material name");
  return *m;
}

SensorId sensor_id(const Json& j, const char* where) {
  if (!j.is_string()) throw DataError(std::string(where) + ": sensor must be a name");
  const auto s = sensor_from_string(j.get<std::string>());
  if (!s) throw DataError(std::string(where) + ": unknown sensor name");
  return *s;
}

}  // namespace

Json answer_to_json(const Answer& answer) {
  Json j;
  switch (answer.kind) {
    case Answer::Kind::Level:
      j["type"] = "level";
      j["value"] = answer.level;
      break;
    case Answer::Kind::Material:
      j["type"] = "material";
      j["value"] = material_token(answer.material);
      break;
    case Answer::Kind::Pair:
      j["type"] = "pair";
      j["value"] = answer.pair_choice == 0 ? "first" : "second";
      break;
    case Answer::Kind::Perm:
      j["type"] = "perm";
      j["value"] = answer.perm;
      break;
    case Answer::Kind::Tuple:
      j["type"] = "tuple";
      j["value"] = answer.tuple;
      break;
  }
  return j;
}

Answer answer_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "level") return Answer::make_level(j.at("value").get<int>());
  if (type == "material") return Answer::make_material(material_index(j.at("value"), "answer"));
  if (type == "pair") {
    const std::string v = j.at("value").get<std::string>();
    if (v != "first" && v != "second") throw DataError("answer: bad pair value");
    return Answer::make_pair(v == "first" ? 0 : 1);
  }
  if (type == "perm") return Answer::make_perm(j.at("value").get<std::vector<int>>());
  if (type == "tuple") {
    const auto t = j.at("value").get<std::array<int, 3>>();
    return Answer::make_tuple(t[0], t[1], t[2]);
  }
  throw DataError("answer: unknown type tag");
}

namespace {

Json object_to_json(const ObjectSpec& obj) {
  Json j;
  j["object_id"] = obj.object_id;
  j["hardness"] = obj.hardness;
  j["roughness"] = obj.roughness;
  j["protrusion"] = obj.protrusion;
  j["material"] = material_token(obj.material);
  j["apparent_material"] = material_token(obj.apparent_material);
  j["deceptive"] = obj.deceptive;
  return j;
}

ObjectSpec object_from_json(const Json& j) {
  ObjectSpec obj;
  obj.object_id = j.at("object_id").get<std::int64_t>();
  obj.hardness = j.at("hardness").get<int>();
  obj.roughness = j.at("roughness").get<int>();
  obj.protrusion = j.at("protrusion").get<int>();
  obj.material = material_index(j.at("material"), "object");
  obj.apparent_material = material_index(j.at("apparent_material"), "object");
  obj.deceptive = j.at("deceptive").get<bool>();
  if (obj.deceptive != (obj.material != obj.apparent_material))
    throw DataError("object: deceptive flag inconsistent with materials");
  return obj;
}

// Frames as a flat array in the declared channel order
// (force, depth, shear, texture, bump).
Json observation_to_json(const TactileObservation& obs) {
  Json j;
  j["sensor"] = std::string(to_string(obs.sensor));
  j["present"] = obs.present;
  std::vector<double> flat;
  flat.reserve(obs.frames.size() * kFrameChannels);
  for (const auto& f : obs.frames) {
    flat.push_back(f.force);
    flat.push_back(f.depth);
    flat.push_back(f.shear);
    flat.push_back(f.texture);
    flat.push_back(f.bump);
  }
  j["frames"] = flat;
  return j;
}

TactileObservation observation_from_json(const Json& j) {
  TactileObservation obs;
  obs.sensor = sensor_id(j.at("sensor"), "observation");
  obs.present = j.at("present").get<bool>();
  const auto flat = j.at("frames").get<std::vector<double>>();
  if (flat.size() % kFrameChannels != 0)
    throw DataError("observation: frame array length not a multiple of the channel count");
  obs.frames.resize(flat.size() / kFrameChannels);
  for (std::size_t i = 0; i < obs.frames.size(); ++i) {
    Frame& f = obs.frames[i];
    f.force = flat[i * kFrameChannels + 0];
    f.depth = flat[i * kFrameChannels + 1];
    f.shear = flat[i * kFrameChannels + 2];
    f.texture = flat[i * kFrameChannels + 3];
    f.bump = flat[i * kFrameChannels + 4];
  }
  return obs;
}

}  // namespace

Json qa_item_to_json(const QAItem& item) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["qa_id"] = item.qa_id;
  j["tier"] = std::string(to_string(item.tier));
  j["attribute"] = std::string(to_string(item.attribute));
  j["objects"] = Json::array();
  for (const auto& obj : item.objects) j["objects"].push_back(object_to_json(obj));
  j["sensors"] = Json::array();
  for (const auto s : item.sensors) j["sensors"].push_back(std::string(to_string(s)));
  j["observations"] = Json::array();
  for (const auto& per_object : item.observations) {
    Json row = Json::array();
    for (const auto& obs : per_object) row.push_back(observation_to_json(obs));
    j["observations"].push_back(row);
  }
  j["truth"] = answer_to_json(item.truth);
  return j;
}

QAItem qa_item_from_json(const Json& j) {
  if (get_or<int>(j, "schema_version", -1) != kSchemaVersion)
    throw DataError("qa item: unsupported schema_version");
  QAItem item;
  item.qa_id = j.at("qa_id").get<std::int64_t>();
  const auto tier = tier_from_string(j.at("tier").get<std::string>());
  if (!tier) throw DataError("qa item: unknown tier");
  item.tier = *tier;
  const auto attr = attribute_from_string(j.at("attribute").get<std::string>());
  if (!attr) throw DataError("qa item: unknown attribute");
  item.attribute = *attr;
  for (const auto& obj : j.at("objects")) item.objects.push_back(object_from_json(obj));
  for (const auto& s : j.at("sensors")) item.sensors.push_back(sensor_id(s, "qa item"));
  for (const auto& row : j.at("observations")) {
    std::vector<TactileObservation> per_object;
    for (const auto& obs : row) per_object.push_back(observation_from_json(obs));
    item.observations.push_back(std::move(per_object));
  }
  item.truth = answer_from_json(j.at("truth"));
  if (item.objects.empty() || item.sensors.empty() || item.sensors.size() > 2)
    throw DataError("qa item: bad objects/sensors arity");
  if (item.tier == Tier::CrossSensor &&
      (item.sensors.size() != 2 || item.sensors[0] == item.sensors[1]))
    throw DataError("qa item: cross_sensor items need two distinct sensors");
  if (item.observations.size() != item.objects.size())
    throw DataError("qa item: observations rows must match objects");
  for (const auto& row : item.observations) {
    if (row.size() != item.sensors.size())
      throw DataError("qa item: observations columns must match sensors");
  }
  return item;
}

void write_qa_items(std::ostream& out, const std::vector<QAItem>& items) {
  for (const auto& item : items) out << qa_item_to_json(item).dump() << '\n';
}

std::vector<QAItem> read_qa_items(std::istream& in) {
  std::vector<QAItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw DataError("qa set line " + std::to_string(line_no) + ": " + e.what());
    }
    items.push_back(qa_item_from_json(j));
  }
  return items;
}

void write_qa_items_file(const std::string& path, const std::vector<QAItem>& items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  write_qa_items(out, items);
}

std::vector<QAItem> read_qa_items_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path);
  return read_qa_items(in);
}

void write_trace_file(const std::string& path, const std::vector<QAItem>& items,
                      const std::vector<std::string>& traces) {
  if (items.size() != traces.size())
    throw DataError("trace file: one trace per item required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < items.size(); ++i) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["qa_id"] = items[i].qa_id;
    j["trace"] = traces[i];
    out << j.dump() << '\n';
  }
}

std::vector<std::string> read_trace_file(const std::string& path,
                                         const std::vector<QAItem>& items) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path);
  std::unordered_map<std::int64_t, std::string> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw DataError("trace file line " + std::to_string(line_no) + ": " + e.what());
    }
    by_id[j.at("qa_id").get<std::int64_t>()] = j.at("trace").get<std::string>();
  }
  std::vector<std::string> traces;
  traces.reserve(items.size());
  for (const auto& item : items) {
    const auto it = by_id.find(item.qa_id);
    if (it == by_id.end())
      throw DataError("trace file: missing trace for qa_id " + std::to_string(item.qa_id));
    traces.push_back(it->second);
  }
  return traces;
}

Json checkpoint_to_json(const PolicyParams& params) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "policy_checkpoint";
  j["k_levels"] = params.layout.k_levels;
  j["listwise_len"] = params.layout.listwise_len;
  j["f_max"] = params.layout.f_max;
  j["feature_dim"] = params.layout.feature_dim;
  j["prefix_dim"] = params.layout.prefix_dim;
  Json heads = Json::array();
  for (std::size_t i = 0; i < params.layout.heads.size(); ++i) {
    Json h;
    h["name"] = params.layout.heads[i].name;
    h["choices"] = params.layout.heads[i].choices;
    h["offset"] = params.layout.offsets[i];
    heads.push_back(h);
  }
  j["heads"] = heads;
  j["weights"] = params.weights;
  return j;
}

PolicyParams checkpoint_from_json(const Json& j) {
  if (get_or<int>(j, "schema_version", -1) != kSchemaVersion)
    throw DataError("checkpoint: unsupported schema_version");
  if (get_or<std::string>(j, "kind", "") != "policy_checkpoint")
    throw DataError("checkpoint: wrong record kind");
  const PolicyLayout layout =
      make_policy_layout(j.at("k_levels").get<int>(), j.at("listwise_len").get<int>(),
                         j.at("f_max").get<double>());
  if (layout.feature_dim != j.at("feature_dim").get<int>() ||
      layout.prefix_dim != j.at("prefix_dim").get<int>())
    throw DataError("checkpoint: layout dimensions do not match this build");
  const auto& heads = j.at("heads");
  if (heads.size() != layout.heads.size())
    throw DataError("checkpoint: head table does not match this build");
  for (std::size_t i = 0; i < layout.heads.size(); ++i) {
    if (heads[i].at("name").get<std::string>() != layout.heads[i].name ||
        heads[i].at("choices").get<int>() != layout.heads[i].choices ||
        heads[i].at("offset").get<std::size_t>() != layout.offsets[i])
      throw DataError("checkpoint: head table does not match this build");
  }
  PolicyParams params;
  params.layout = layout;
  params.weights = j.at("weights").get<std::vector<double>>();
  if (params.weights.size() != layout.total_params)
    throw DataError("checkpoint: weight count does not match the head table");
  for (double w : params.weights) {
    if (!std::isfinite(w)) throw DataError("checkpoint: non-finite weight");
  }
  return params;
}

void write_checkpoint(const std::string& path, const PolicyParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << checkpoint_to_json(params).dump() << '\n';
}

PolicyParams read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw DataError(std::string("checkpoint parse: ") + e.what());
  }
  return checkpoint_from_json(j);
}

Json metric_report_to_json(const MetricReport& report) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "metric_report";
  j["k_levels"] = report.k_levels;
  j["h_acc"] = report.h_acc;
  j["r_acc"] = report.r_acc;
  j["p_acc"] = report.p_acc;
  j["mat_acc"] = report.mat_acc;
  j["omae"] = report.omae;
  j["l2_em"] = report.l2_em;
  j["sfd"] = report.sfd;
  j["soi_rho"] = report.soi_rho;
  j["csc"] = report.csc;
  j["conflict_acc"] = report.conflict_acc;
  j["avg"] = report.avg;
  Json counts;
  for (int t = 0; t < kNumTiers; ++t) {
    counts[std::string(kTierNames[static_cast<std::size_t>(t)])] =
        report.tier_counts[static_cast<std::size_t>(t)];
  }
  j["tier_counts"] = counts;
  j["evaluated_items"] = report.evaluated_items;
  return j;
}

MetricReport metric_report_from_json(const Json& j) {
  if (get_or<int>(j, "schema_version", -1) != kSchemaVersion)
    throw DataError("metric report: unsupported schema_version");
  MetricReport r;
  r.k_levels = j.at("k_levels").get<int>();
  r.h_acc = j.at("h_acc").get<double>();
  r.r_acc = j.at("r_acc").get<double>();
  r.p_acc = j.at("p_acc").get<double>();
  r.mat_acc = j.at("mat_acc").get<double>();
  r.omae = j.at("omae").get<double>();
  r.l2_em = j.at("l2_em").get<double>();
  r.sfd = j.at("sfd").get<double>();
  r.soi_rho = j.at("soi_rho").get<double>();
  r.csc = j.at("csc").get<double>();
  r.conflict_acc = j.at("conflict_acc").get<double>();
  r.avg = j.at("avg").get<double>();
  for (int t = 0; t < kNumTiers; ++t) {
    r.tier_counts[static_cast<std::size_t>(t)] =
        j.at("tier_counts").at(std::string(kTierNames[static_cast<std::size_t>(t)])).get<int>();
  }
  r.evaluated_items = j.at("evaluated_items").get<int>();
  return r;
}

std::string metric_report_csv(const MetricReport& report) {
  std::ostringstream os;
  os << "h_acc,r_acc,p_acc,mat_acc,omae,l2_em,sfd,soi_rho,csc,conflict_acc,avg\n";
  const double values[] = {report.h_acc, report.r_acc,  report.p_acc,    report.mat_acc,
                           report.omae,  report.l2_em,  report.sfd,      report.soi_rho,
                           report.csc,   report.conflict_acc, report.avg};
  for (std::size_t i = 0; i < std::size(values); ++i) {
    if (i > 0) os << ',';
    os << Json(values[i]).dump();
  }
  os << '\n';
  return os.str();
}

namespace {

Json tier_counts_to_json(const TierCounts& c) {
  Json j;
  j["property"] = c.property;
  j["compositional"] = c.compositional;
  j["pairwise"] = c.pairwise;
  j["listwise"] = c.listwise;
  j["cross_sensor"] = c.cross_sensor;
  j["conflict"] = c.conflict;
  return j;
}

TierCounts tier_counts_from_json(const Json& j, const TierCounts& fallback) {
  require_keys(j, {"property", "compositional", "pairwise", "listwise", "cross_sensor",
                   "conflict"},
               "tier counts");
  TierCounts c;
  c.property = get_or(j, "property", fallback.property);
  c.compositional = get_or(j, "compositional", fallback.compositional);
  c.pairwise = get_or(j, "pairwise", fallback.pairwise);
  c.listwise = get_or(j, "listwise", fallback.listwise);
  c.cross_sensor = get_or(j, "cross_sensor", fallback.cross_sensor);
  c.conflict = get_or(j, "conflict", fallback.conflict);
  return c;
}

}  // namespace

Json run_config_to_json(const RunConfig& config) {
  Json j;
  j["schema_version"] = config.schema_version;
  j["seed"] = config.seed;

  Json world;
  world["k_levels"] = config.world.k_levels;
  world["deception_q"] = config.world.deception_q;
  world["frames"] = config.world.frames;
  world["f_max"] = config.world.f_max;
  world["stiffness"] = config.world.stiffness;
  world["texture_levels"] = config.world.texture_levels;
  world["bump_levels"] = config.world.bump_levels;
  world["friction_base"] = config.world.friction_base;
  world["mode_mass"] = config.world.mode_mass;
  world["adjacent_mass"] = config.world.adjacent_mass;
  Json materials = Json::array();
  for (int m = 0; m < kNumMaterials; ++m) {
    Json mat;
    mat["name"] = material_token(m);
    mat["modal"] = config.world.materials[static_cast<std::size_t>(m)].modal;
    materials.push_back(mat);
  }
  world["materials"] = materials;
  Json sensors = Json::array();
  for (const auto& s : config.world.sensors) {
    Json sj;
    sj["id"] = std::string(to_string(s.id));
    sj["gain"] = s.gain;
    sj["offset"] = s.offset;
    sj["noise_sigma"] = s.noise_sigma;
    sensors.push_back(sj);
  }
  world["sensors"] = sensors;
  j["world"] = world;

  Json bench;
  bench["train_objects"] = config.bench.train_objects;
  bench["heldout_objects"] = config.bench.heldout_objects;
  bench["listwise_len"] = config.bench.listwise_len;
  bench["train_counts"] = tier_counts_to_json(config.bench.train_counts);
  bench["heldout_counts"] = tier_counts_to_json(config.bench.heldout_counts);
  j["bench"] = bench;

  Json rewards;
  rewards["lambda_acc"] = config.rewards.lambda_acc;
  rewards["lambda_cs"] = config.rewards.lambda_cs;
  rewards["lambda_fmt"] = config.rewards.lambda_fmt;
  rewards["binary_accuracy"] = config.rewards.binary_accuracy;
  j["rewards"] = rewards;

  Json sft;
  sft["steps"] = config.sft.steps;
  sft["learning_rate"] = config.sft.learning_rate;
  sft["batch_size"] = config.sft.batch_size;
  sft["holdout_frac"] = config.sft.holdout_frac;
  sft["loglik_floor"] = config.sft.loglik_floor;
  sft["sft_frac"] = config.sft.sft_frac;
  j["sft"] = sft;

  Json trainer;
  trainer["group_size"] = config.trainer.group_size;
  trainer["kl_beta"] = config.trainer.kl_beta;
  trainer["clip_epsilon"] = config.trainer.clip_epsilon;
  trainer["learning_rate"] = config.trainer.learning_rate;
  trainer["gamma_grounding"] = config.trainer.gamma_grounding;
  trainer["lambda_use"] = config.trainer.lambda_use;
  trainer["use_margin"] = config.trainer.use_margin;
  Json controls = Json::array();
  for (const auto c : config.trainer.use_controls)
    controls.push_back(std::string(to_string(c)));
  trainer["use_controls"] = controls;
  trainer["iterations"] = config.trainer.iterations;
  trainer["groups_per_iter"] = config.trainer.groups_per_iter;
  trainer["eval_every"] = config.trainer.eval_every;
  j["trainer"] = trainer;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  require_keys(j, {"schema_version", "seed", "world", "bench", "rewards", "sft", "trainer"},
               "config");
  RunConfig config = default_run_config();
  config.schema_version = get_or(j, "schema_version", kSchemaVersion);
  config.seed = get_or<std::uint64_t>(j, "seed", 0);

  if (j.contains("world")) {
    const Json& w = j.at("world");
    require_keys(w,
                 {"k_levels", "deception_q", "frames", "f_max", "stiffness", "texture_levels",
                  "bump_levels", "friction_base", "mode_mass", "adjacent_mass", "materials",
                  "sensors"},
                 "config.world");
    config.world.k_levels = get_or(w, "k_levels", config.world.k_levels);
    config.world.deception_q = get_or(w, "deception_q", config.world.deception_q);
    config.world.frames = get_or(w, "frames", config.world.frames);
    config.world.f_max = get_or(w, "f_max", config.world.f_max);
    config.world.stiffness =
        get_or(w, "stiffness", default_stiffness_table(config.world.k_levels));
    config.world.texture_levels =
        get_or(w, "texture_levels", default_texture_table(config.world.k_levels));
    config.world.bump_levels =
        get_or(w, "bump_levels", default_bump_table(config.world.k_levels));
    config.world.friction_base = get_or(w, "friction_base", config.world.friction_base);
    config.world.mode_mass = get_or(w, "mode_mass", config.world.mode_mass);
    config.world.adjacent_mass = get_or(w, "adjacent_mass", config.world.adjacent_mass);
    if (w.contains("materials")) {
      const auto& mats = w.at("materials");
      if (mats.size() != kNumMaterials)
        throw ConfigError("config.world.materials must list all nine materials");
      for (const auto& mat : mats) {
        require_keys(mat, {"name", "modal"}, "config.world.materials[]");
        const int idx = material_index(mat.at("name"), "config.world.materials[]");
        config.world.materials[static_cast<std::size_t>(idx)].modal =
            mat.at("modal").get<std::array<int, 3>>();
      }
    }
    if (w.contains("sensors")) {
      const auto& sensors = w.at("sensors");
      if (sensors.size() != kNumSensors)
        throw ConfigError("config.world.sensors must list all four sensors");
      config.world.sensors.clear();
      for (const auto& sj : sensors) {
        require_keys(sj, {"id", "gain", "offset", "noise_sigma"}, "config.world.sensors[]");
        SensorParams s;
        s.id = sensor_id(sj.at("id"), "config.world.sensors[]");
        s.gain = sj.at("gain").get<std::array<double, 4>>();
        s.offset = sj.at("offset").get<std::array<double, 4>>();
        s.noise_sigma = sj.at("noise_sigma").get<std::array<double, 4>>();
        config.world.sensors.push_back(s);
      }
    }
  }

  if (j.contains("bench")) {
    const Json& b = j.at("bench");
    require_keys(b,
                 {"train_objects", "heldout_objects", "listwise_len", "train_counts",
                  "heldout_counts"},
                 "config.bench");
    config.bench.train_objects = get_or(b, "train_objects", config.bench.train_objects);
    config.bench.heldout_objects = get_or(b, "heldout_objects", config.bench.heldout_objects);
    config.bench.listwise_len = get_or(b, "listwise_len", config.bench.listwise_len);
    if (b.contains("train_counts"))
      config.bench.train_counts =
          tier_counts_from_json(b.at("train_counts"), config.bench.train_counts);
    if (b.contains("heldout_counts"))
      config.bench.heldout_counts =
          tier_counts_from_json(b.at("heldout_counts"), config.bench.heldout_counts);
  }

  if (j.contains("rewards")) {
    const Json& r = j.at("rewards");
    require_keys(r, {"lambda_acc", "lambda_cs", "lambda_fmt", "binary_accuracy"},
                 "config.rewards");
    config.rewards.lambda_acc = get_or(r, "lambda_acc", config.rewards.lambda_acc);
    config.rewards.lambda_cs = get_or(r, "lambda_cs", config.rewards.lambda_cs);
    config.rewards.lambda_fmt = get_or(r, "lambda_fmt", config.rewards.lambda_fmt);
    config.rewards.binary_accuracy = get_or(r, "binary_accuracy", config.rewards.binary_accuracy);
  }

  if (j.contains("sft")) {
    const Json& s = j.at("sft");
    require_keys(s, {"steps", "learning_rate", "batch_size", "holdout_frac", "loglik_floor",
                     "sft_frac"},
                 "config.sft");
    config.sft.steps = get_or(s, "steps", config.sft.steps);
    config.sft.learning_rate = get_or(s, "learning_rate", config.sft.learning_rate);
    config.sft.batch_size = get_or(s, "batch_size", config.sft.batch_size);
    config.sft.holdout_frac = get_or(s, "holdout_frac", config.sft.holdout_frac);
    config.sft.loglik_floor = get_or(s, "loglik_floor", config.sft.loglik_floor);
    config.sft.sft_frac = get_or(s, "sft_frac", config.sft.sft_frac);
  }

  if (j.contains("trainer")) {
    const Json& t = j.at("trainer");
    require_keys(t,
                 {"group_size", "kl_beta", "clip_epsilon", "learning_rate", "gamma_grounding",
                  "lambda_use", "use_margin", "use_controls", "iterations", "groups_per_iter",
                  "eval_every"},
                 "config.trainer");
    config.trainer.group_size = get_or(t, "group_size", config.trainer.group_size);
    config.trainer.kl_beta = get_or(t, "kl_beta", config.trainer.kl_beta);
    config.trainer.clip_epsilon = get_or(t, "clip_epsilon", config.trainer.clip_epsilon);
    config.trainer.learning_rate = get_or(t, "learning_rate", config.trainer.learning_rate);
    config.trainer.gamma_grounding = get_or(t, "gamma_grounding", config.trainer.gamma_grounding);
    config.trainer.lambda_use = get_or(t, "lambda_use", config.trainer.lambda_use);
    config.trainer.use_margin = get_or(t, "use_margin", config.trainer.use_margin);
    if (t.contains("use_controls")) {
      config.trainer.use_controls.clear();
      for (const auto& c : t.at("use_controls")) {
        const auto kind = control_from_string(c.get<std::string>());
        if (!kind) throw ConfigError("config.trainer.use_controls: unknown control kind");
        config.trainer.use_controls.push_back(*kind);
      }
    }
    config.trainer.iterations = get_or(t, "iterations", config.trainer.iterations);
    config.trainer.groups_per_iter = get_or(t, "groups_per_iter", config.trainer.groups_per_iter);
    config.trainer.eval_every = get_or(t, "eval_every", config.trainer.eval_every);
  }

  config.validate();
  return config;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  return run_config_from_json(j);
}

void apply_override(Json& config, const std::string& key_value) {
  const std::size_t eq = key_value.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like path.to.key=value");
  const std::string path = key_value.substr(0, eq);
  const std::string raw = key_value.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::exception&) {
    value = raw;  // bare strings are allowed
  }
  Json* node = &config;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos
                                                                      : dot - pos);
    if (key.empty()) throw ConfigError("override path has an empty segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

}  // namespace tact
