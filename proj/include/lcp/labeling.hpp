#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcp/core_data.hpp"
#include "lcp/scenario.hpp"

namespace lcp {

// The seven per-frame features. Sign conventions: d0j = pos_j - pos_0
// (ahead positive), v0j = v_0 - v_j (ego faster positive).
struct FeatureVector {
  static constexpr int kDim = 7;

  double d01 = 0, d02 = 0, d03 = 0;
  double v01 = 0, v02 = 0, v03 = 0;
  double l0 = 0;

  std::array<double, kDim> to_array() const {
    return {d01, d02, d03, v01, v02, v03, l0};
  }
  static FeatureVector from_array(const std::array<double, kDim>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }

  bool operator==(const FeatureVector&) const = default;
};

// Window length tau and gap tau_g, both in seconds. The positive window is
// the tau seconds ending at the change; the negative window is an
// equal-length window tau_g seconds earlier.
struct LabelingScheme {
  double tau = 5.0;
  double tau_g = 0.0;
};

struct NamedScheme {
  std::string name;
  LabelingScheme scheme;
};

// LS1..LS4: tau fixed at 5 s, tau_g = 0/5/10/15 s.
NamedScheme scheme_preset(int index);
std::vector<NamedScheme> standard_schemes();

struct FrameRange {
  std::int64_t first = 0;
  std::int64_t last = 0;

  std::int64_t length() const { return last - first + 1; }
  bool contains(std::int64_t f) const { return f >= first && f <= last; }
};

struct WindowPair {
  FrameRange positive;
  FrameRange negative;
};

// Pure frame arithmetic: positive = [t_lc - R*tau + 1, t_lc], negative the
// same length ending R*tau_g ticks earlier (R = frame rate). Whether the
// windows fit inside the vehicle's track is the caller's check.
WindowPair window_frames(const LaneChangeEvent& event,
                         const LabelingScheme& scheme, int frame_rate);

struct LabeledSample {
  // Oldest-to-newest, ending at `frame`. Length 1 for pointwise models,
  // seq_len for the recurrent one.
  std::vector<FeatureVector> features;
  int label = 0;
  int vehicle_id = 0;
  std::int64_t frame = 0;
  int event_id = -1;  // index into the task event list, -1 when detached

  const FeatureVector& at_frame() const { return features.back(); }
};

// Features at one ego frame, or nullopt when the frame's scenario is not
// "a" (all three surrounding vehicles present).
std::optional<FeatureVector> extract_features(
    const Dataset& ds, int ego_id, std::int64_t frame,
    Direction direction = Direction::left);

enum class SkipReason { truncated, overlaps_prior_event, too_many_drops };

const char* to_string(SkipReason r);

struct LabelingSummary {
  int events_in = 0;
  int events_kept = 0;
  std::map<SkipReason, int> skipped;
  long long samples_pos = 0;
  long long samples_neg = 0;
  long long dropped_frames = 0;
};

// Balanced positive/negative samples for each event. An event is skipped
// when its negative window starts before the vehicle's first frame, when
// another change of the same vehicle falls inside the negative window, or
// when more than half of either window's frames fail feature extraction.
// seq_len > 1 additionally requires the seq_len frames ending at each
// sample frame to extract.
std::vector<LabeledSample> label_events(const Dataset& ds,
                                        const std::vector<LaneChangeEvent>& events,
                                        const LabelingScheme& scheme,
                                        Direction direction = Direction::left,
                                        int seq_len = 1,
                                        LabelingSummary* summary = nullptr);

// Per-feature affine map to zero mean / unit variance. A zero-variance
// feature maps to 0. Default-constructed scaler is the identity.
struct StandardScaler {
  std::array<double, FeatureVector::kDim> mean{};
  std::array<double, FeatureVector::kDim> stddev{1, 1, 1, 1, 1, 1, 1};

  FeatureVector transform(const FeatureVector& fv) const;
  FeatureVector inverse(const FeatureVector& fv) const;

  bool operator==(const StandardScaler&) const = default;
};

// Statistics over every feature vector (all timesteps) in `train`.
StandardScaler fit_scaler(const std::vector<LabeledSample>& train);

std::vector<LabeledSample> apply_scaler(const StandardScaler& scaler,
                                        std::vector<LabeledSample> samples);

struct StandardizeResult {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> applied;
  StandardScaler scaler;
};

// Fit on `train` only, apply to both.
StandardizeResult standardize(const std::vector<LabeledSample>& train,
                              const std::vector<LabeledSample>& apply_to);

void write_scaler(std::ostream& out, const StandardScaler& scaler);
StandardScaler read_scaler(std::istream& in);

// Pointwise sample table; sequence samples are exported at their end frame.
void write_samples(std::ostream& out, const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> read_samples(std::istream& in);

}  // namespace lcp
