#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lcp/evaluation.hpp"

namespace lcp {

enum class Provenance { plain, aggressive, conservative };

const char* to_string(Provenance p);

// Per-second 0/1 predictions for one vehicle. Stamps run every 10th frame
// from the vehicle's first frame.
struct PredictionSeries {
  int vehicle_id = 0;
  std::vector<std::int64_t> frames;
  std::vector<int> values;
  Provenance provenance = Provenance::plain;

  std::size_t size() const { return frames.size(); }
};

struct SeriesResult {
  PredictionSeries series;
  int dropped_stamps = 0;  // stamps whose features were not extractable
};

// Threshold the model at 1 Hz over the vehicle's track. Stamps whose frame
// (or required history) fails feature extraction emit 0 and count as drops.
SeriesResult run_time_predict(const FittedModel& model, const Dataset& ds,
                              int vehicle_id, double threshold,
                              Direction direction = Direction::left);

// Each positive propagates forward tau_a further seconds, clipped at the
// series end; equivalently, output t is the OR of the trailing tau_a + 1
// stamps.
PredictionSeries aggressive_smooth(const PredictionSeries& s, int tau_a_seconds);

// Trailing average over tau_c + 1 stamps, positive when strictly above
// `thres`. The first tau_c stamps have no full window and stay 0.
PredictionSeries conservative_smooth(const PredictionSeries& s,
                                     int tau_c_seconds, double thres);

// True iff every stamp within tau_p seconds up to the event is positive.
// The event is scored at the nearest stamp at or before t_lc; an event
// outside the stamp range is never correct. The check window clips at the
// series start.
bool strict_correct(const PredictionSeries& s, const LaneChangeEvent& event,
                    int tau_p_seconds);

// (t_lc - t_p) / 10 seconds, where t_p starts the unbroken positive run
// through the event's stamp; nullopt when that stamp is 0 or uncovered.
std::optional<double> advanced_time(const PredictionSeries& s,
                                    const LaneChangeEvent& event);

struct EventScore {
  LaneChangeEvent event;
  bool covered = false;
  bool correct = false;
  std::optional<double> advanced_time_s;
};

struct RuntimeReport {
  Provenance approach = Provenance::plain;
  std::vector<EventScore> events;
  // Per-stamp counts against the window ground truth: a stamp is positive
  // iff it lies within tau_window seconds before some event of its vehicle.
  long long stamp_tp = 0, stamp_fp = 0, stamp_tn = 0, stamp_fn = 0;
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> prediction_accuracy;  // correct events / total events
  std::optional<double> mean_advanced_time_s;  // over correct events
  int dropped_stamps = 0;
};

RuntimeReport runtime_report(const std::vector<PredictionSeries>& series,
                             const std::vector<LaneChangeEvent>& events,
                             int tau_p_seconds, double tau_window_seconds,
                             Provenance approach);

// approach,tpr,fpr,prediction_accuracy,avg_advanced_time_s with a header
// comment stating the ground-truth convention.
void write_runtime_reports(std::ostream& out,
                           const std::vector<RuntimeReport>& reports,
                           double tau_window_seconds, int tau_p_seconds);

// vehicle_id,frame,value,provenance
void write_series(std::ostream& out,
                  const std::vector<PredictionSeries>& series);

}  // namespace lcp
