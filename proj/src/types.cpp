#include "tact/types.hpp"

#include <algorithm>

namespace tact {

std::string_view to_string(SensorId s) {
  return kSensorNames[static_cast<std::size_t>(s)];
}

std::optional<SensorId> sensor_from_string(std::string_view name) {
  for (int i = 0; i < kNumSensors; ++i) {
    if (kSensorNames[static_cast<std::size_t>(i)] == name) return static_cast<SensorId>(i);
  }
  return std::nullopt;
}

std::optional<int> material_from_string(std::string_view name) {
  for (int i = 0; i < kNumMaterials; ++i) {
    if (kMaterialNames[static_cast<std::size_t>(i)] == name) return i;
  }
  return std::nullopt;
}

std::string_view material_name(int index) {
  if (index < 0 || index >= kNumMaterials) throw std::out_of_range("material index");
  return kMaterialNames[static_cast<std::size_t>(index)];
}

std::string_view to_string(Tier t) { return kTierNames[static_cast<std::size_t>(t)]; }

std::optional<Tier> tier_from_string(std::string_view name) {
  for (int i = 0; i < kNumTiers; ++i) {
    if (kTierNames[static_cast<std::size_t>(i)] == name) return static_cast<Tier>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Attribute a) {
  return kAttributeNames[static_cast<std::size_t>(a)];
}

std::optional<Attribute> attribute_from_string(std::string_view name) {
  for (int i = 0; i < kNumAttributes; ++i) {
    if (kAttributeNames[static_cast<std::size_t>(i)] == name)
      return static_cast<Attribute>(i);
  }
  return std::nullopt;
}

Answer Answer::make_level(int v) {
  Answer a;
  a.kind = Kind::Level;
  a.level = v;
  return a;
}

Answer Answer::make_material(int v) {
  Answer a;
  a.kind = Kind::Material;
  a.material = v;
  return a;
}

Answer Answer::make_pair(int choice) {
  Answer a;
  a.kind = Kind::Pair;
  a.pair_choice = choice;
  return a;
}

Answer Answer::make_perm(std::vector<int> p) {
  Answer a;
  a.kind = Kind::Perm;
  a.perm = std::move(p);
  return a;
}

Answer Answer::make_tuple(int h, int r, int p) {
  Answer a;
  a.kind = Kind::Tuple;
  a.tuple = {h, r, p};
  return a;
}

bool Answer::operator==(const Answer& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Level:
      return level == other.level;
    case Kind::Material:
      return material == other.material;
    case Kind::Pair:
      return pair_choice == other.pair_choice;
    case Kind::Perm:
      return perm == other.perm;
    case Kind::Tuple:
      return tuple == other.tuple;
  }
  return false;
}

int ObjectSpec::ordinal(Attribute a) const {
  switch (a) {
    case Attribute::Hardness:
      return hardness;
    case Attribute::Roughness:
      return roughness;
    case Attribute::Protrusion:
      return protrusion;
    case Attribute::Material:
      throw std::invalid_argument("material is not an ordinal attribute");
  }
  throw std::invalid_argument("bad attribute");
}

const TactileObservation& QAItem::observation(int object_index, int sensor_index) const {
  return observations.at(static_cast<std::size_t>(object_index))
      .at(static_cast<std::size_t>(sensor_index));
}

}  // namespace tact
