#ifndef TACT_TYPES_HPP_
#define TACT_TYPES_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tact {

// ---------------------------------------------------------------------------
// Error taxonomy (mapped to CLI exit codes by the harness)
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Sensors
// ---------------------------------------------------------------------------

enum class SensorId : int { GsMini = 0, Xense = 1, Tac3d = 2, DmTacX = 3 };

inline constexpr int kNumSensors = 4;
inline constexpr std::array<std::string_view, kNumSensors> kSensorNames = {
    "gsmini", "xense", "tac3d", "dmtacx"};

std::string_view to_string(SensorId s);
std::optional<SensorId> sensor_from_string(std::string_view name);

// ---------------------------------------------------------------------------
// Materials
// ---------------------------------------------------------------------------

inline constexpr int kNumMaterials = 9;
inline constexpr std::array<std::string_view, kNumMaterials> kMaterialNames = {
    "plastic", "metal", "fabric", "food", "paper",
    "glass",   "leather", "wood", "other"};

std::optional<int> material_from_string(std::string_view name);
std::string_view material_name(int index);

// ---------------------------------------------------------------------------
// Question taxonomy
// ---------------------------------------------------------------------------

enum class Tier : int {
  Property = 0,
  OrdinalCompositional = 1,
  ComparativePairwise = 2,
  ComparativeListwise = 3,
  CrossSensor = 4,
  Conflict = 5,
};

inline constexpr int kNumTiers = 6;
inline constexpr std::array<std::string_view, kNumTiers> kTierNames = {
    "property",           "ordinal_compositional", "comparative_pairwise",
    "comparative_listwise", "cross_sensor",        "conflict"};

std::string_view to_string(Tier t);
std::optional<Tier> tier_from_string(std::string_view name);

enum class Attribute : int { Hardness = 0, Roughness = 1, Protrusion = 2, Material = 3 };

inline constexpr int kNumAttributes = 4;
inline constexpr std::array<std::string_view, kNumAttributes> kAttributeNames = {
    "hardness", "roughness", "protrusion", "material"};

std::string_view to_string(Attribute a);
std::optional<Attribute> attribute_from_string(std::string_view name);

// ---------------------------------------------------------------------------
// Answers
// ---------------------------------------------------------------------------

// Tagged union over the answer shapes the question tiers use.
struct Answer {
  enum class Kind : int { Level = 0, Material = 1, Pair = 2, Perm = 3, Tuple = 4 };

  Kind kind = Kind::Level;
  int level = 0;                  // Kind::Level
  int material = 0;               // Kind::Material
  int pair_choice = 0;            // Kind::Pair, 0=first 1=second
  std::vector<int> perm;          // Kind::Perm
  std::array<int, 3> tuple{0, 0, 0};  // Kind::Tuple, (hardness, roughness, protrusion)

  static Answer make_level(int v);
  static Answer make_material(int v);
  static Answer make_pair(int choice);
  static Answer make_perm(std::vector<int> p);
  static Answer make_tuple(int h, int r, int p);

  bool operator==(const Answer& other) const;
};

// ---------------------------------------------------------------------------
// World domain types
// ---------------------------------------------------------------------------

struct ObjectSpec {
  std::int64_t object_id = 0;
  int hardness = 0;
  int roughness = 0;
  int protrusion = 0;
  int material = 0;
  int apparent_material = 0;
  bool deceptive = false;

  int ordinal(Attribute a) const;
};

// One force-indexed contact frame. Channel order is the wire order:
// force, depth, shear, texture, bump.
struct Frame {
  double force = 0.0;
  double depth = 0.0;
  double shear = 0.0;
  double texture = 0.0;
  double bump = 0.0;
};

inline constexpr int kFrameChannels = 5;
inline constexpr std::array<std::string_view, kFrameChannels> kChannelOrder = {
    "force", "depth", "shear", "texture", "bump"};

struct TactileObservation {
  SensorId sensor = SensorId::GsMini;
  std::vector<Frame> frames;
  bool present = true;
};

struct QAItem {
  std::int64_t qa_id = 0;
  Tier tier = Tier::Property;
  Attribute attribute = Attribute::Hardness;
  std::vector<ObjectSpec> objects;           // 1..L
  std::vector<SensorId> sensors;             // 1 (single) or 2 (cross-sensor)
  // observations[object_index][sensor_index], aligned with `objects`/`sensors`
  std::vector<std::vector<TactileObservation>> observations;
  Answer truth;

  const TactileObservation& observation(int object_index, int sensor_index) const;
};

struct QASet {
  std::vector<QAItem> train;
  std::vector<QAItem> heldout;
};

}  // namespace tact

#endif  // TACT_TYPES_HPP_
