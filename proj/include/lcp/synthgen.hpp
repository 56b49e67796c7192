#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "lcp/core_data.hpp"

namespace lcp {

struct ScriptedChange {
  int vehicle_id = 0;
  std::int64_t t_lc = 0;  // tick at which the lane id flips
  Direction direction = Direction::left;
};

// Deterministic multi-lane generator. Vehicles run a constant-time-headway
// car-following rule around a nominal speed with a slow per-vehicle speed
// oscillation. A scripted change flips the lane id at t_lc; during the
// signature lead time before it the vehicle eases off, opening its
// adjacent-lane gap by roughly signature_gap meters and shifting the
// relative speeds, which is the learnable cue. signature_shoulder_s adds a
// weak anticipatory easing (15% of the speed deficit) before the main
// maneuver. With signature_gap = 0 scripted changes carry no cue at all.
struct SynthConfig {
  std::uint64_t seed = 1;
  int lanes = 5;
  int vehicles_per_lane = 10;
  double duration_s = 120.0;
  double nominal_speed = 12.0;      // m/s
  double spacing = 30.0;            // m between same-lane starts
  double noise_amp = 0.3;           // m/s, slow speed oscillation
  double noise_period_s = 37.0;
  double signature_gap = 0.0;       // m opened ahead before a change
  double signature_lead_s = 20.0;
  double signature_shoulder_s = 0.0;
  double change_separation_s = 10.0;  // min per-vehicle spacing of changes
  std::vector<ScriptedChange> script;

  static SynthConfig from_stream(std::istream& in);
  static SynthConfig from_file(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void validate() const;  // throws config_error

  std::int64_t duration_ticks() const;
  int home_lane(int vehicle_id) const;
};

// Vehicle id of (lane 1..lanes, slot 0..vehicles_per_lane-1).
int synth_vehicle_id(const SynthConfig& cfg, int lane, int slot);

Dataset generate(const SynthConfig& cfg);

}  // namespace lcp
