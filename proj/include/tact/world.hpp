#ifndef TACT_WORLD_HPP_
#define TACT_WORLD_HPP_

#include <cstdint>
#include <string>

#include "tact/config.hpp"
#include "tact/trace.hpp"
#include "tact/types.hpp"

namespace tact {

// Synthetic object with attributes drawn from its material's characteristic
// distribution; with probability q the apparent (visual) material is
// resampled from a different material whose modal attributes differ.
ObjectSpec generate_object(std::uint64_t rng_seed, const WorldConfig& config);

// Canonical noiseless contact response at force F for an object.
Frame canonical_response(const ObjectSpec& object, double force, const WorldConfig& config);

// Force-guided pressing: frames at a strictly increasing force ramp up to
// f_max, canonical response passed through the sensor's channel-wise
// gain*x + offset + N(0, sigma).
TactileObservation observe(const ObjectSpec& object, const SensorParams& sensor,
                           std::uint64_t rng_seed, int frames, double f_max,
                           const WorldConfig& config);

enum class PerturbKind : int { Remove = 0, Shuffle = 1, NoiseMask = 2 };

// Counterfactual controls. remove drops the stream; shuffle applies a seeded
// non-identity permutation of whole frames (force moves with its frame);
// noise_mask replaces every non-force channel with Gaussian samples matching
// that observation's per-channel empirical mean and standard deviation.
TactileObservation perturb(const TactileObservation& observation, PerturbKind kind,
                           std::uint64_t rng_seed);

// Train + held-out QA sets over disjoint object pools, fully materialized
// observations included. Throws DataError when a tier count exceeds the
// feasible unique combinations.
QASet generate_bench(const WorldConfig& world, const BenchConfig& bench,
                     std::uint64_t rng_seed);

// Slot assignment whose rendered trace parses back to ground truth on every
// field (used for SFT targets and as a scoring fixture).
TraceSlots oracle_slots(const QAItem& item);
std::string oracle_trace(const QAItem& item);

}  // namespace tact

#endif  // TACT_WORLD_HPP_
