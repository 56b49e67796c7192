#include "lcp/runtime_eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lcp/errors.hpp"
#include "lcp/text.hpp"

namespace lcp {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::plain: return "plain";
    case Provenance::aggressive: return "aggressive";
    case Provenance::conservative: return "conservative";
  }
  return "?";
}

SeriesResult run_time_predict(const FittedModel& model, const Dataset& ds,
                              int vehicle_id, double threshold,
                              Direction direction) {
  if (!ds.has_vehicle(vehicle_id))
    throw lookup_error("unknown vehicle " + std::to_string(vehicle_id));
  const std::int64_t first = ds.first_frame_of(vehicle_id);
  const std::int64_t last = ds.last_frame_of(vehicle_id);
  const int need = model.required_history();

  SeriesResult result;
  result.series.vehicle_id = vehicle_id;
  for (std::int64_t f = first; f <= last; f += Dataset::kFrameRate) {
    int value = 0;
    std::vector<FeatureVector> history;
    history.reserve(static_cast<std::size_t>(need));
    bool ok = true;
    for (std::int64_t g = f - need + 1; g <= f; ++g) {
      if (ds.find(vehicle_id, g) == nullptr) {
        ok = false;
        break;
      }
      auto fv = extract_features(ds, vehicle_id, g, direction);
      if (!fv) {
        ok = false;
        break;
      }
      history.push_back(*fv);
    }
    if (ok) {
      value = predict_label(model, history, threshold);
    } else {
      ++result.dropped_stamps;
    }
    result.series.frames.push_back(f);
    result.series.values.push_back(value);
  }
  return result;
}

PredictionSeries aggressive_smooth(const PredictionSeries& s, int tau_a_seconds) {
  if (tau_a_seconds < 0) throw config_error("tau_a must be >= 0");
  PredictionSeries out = s;
  out.provenance = Provenance::aggressive;
  // Trailing-window formulation of the forward propagation: stamp t stays
  // positive while some input positive lies at most tau_a stamps back.
  std::ptrdiff_t last_positive = -1;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (s.values[i] == 1) last_positive = static_cast<std::ptrdiff_t>(i);
    out.values[i] = (last_positive >= 0 &&
                     static_cast<std::ptrdiff_t>(i) - last_positive <=
                         static_cast<std::ptrdiff_t>(tau_a_seconds))
                        ? 1
                        : 0;
  }
  return out;
}

PredictionSeries conservative_smooth(const PredictionSeries& s,
                                     int tau_c_seconds, double thres) {
  if (tau_c_seconds < 0) throw config_error("tau_c must be >= 0");
  if (thres < 0.0 || thres >= 1.0) throw config_error("thres must be in [0, 1)");
  PredictionSeries out = s;
  out.provenance = Provenance::conservative;
  std::fill(out.values.begin(), out.values.end(), 0);
  long long running = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    running += s.values[i];
    if (static_cast<int>(i) < tau_c_seconds) continue;  // no full window yet
    if (static_cast<int>(i) > tau_c_seconds)
      running -= s.values[i - static_cast<std::size_t>(tau_c_seconds) - 1];
    const double avg =
        static_cast<double>(running) / static_cast<double>(tau_c_seconds + 1);
    if (avg > thres) out.values[i] = 1;
  }
  return out;
}

namespace {

// Index of the nearest stamp at or before t_lc; nullopt when t_lc falls
// outside the stamp range.
std::optional<std::size_t> event_stamp_index(const PredictionSeries& s,
                                             std::int64_t t_lc) {
  if (s.frames.empty() || t_lc < s.frames.front() || t_lc > s.frames.back())
    return std::nullopt;
  auto it = std::upper_bound(s.frames.begin(), s.frames.end(), t_lc);
  return static_cast<std::size_t>(it - s.frames.begin()) - 1;
}

}  // namespace

bool strict_correct(const PredictionSeries& s, const LaneChangeEvent& event,
                    int tau_p_seconds) {
  if (tau_p_seconds < 0) throw config_error("tau_p must be >= 0");
  const auto idx = event_stamp_index(s, event.t_lc);
  if (!idx) return false;  // event not covered by the series
  const std::int64_t window_start =
      s.frames[*idx] - static_cast<std::int64_t>(tau_p_seconds) * Dataset::kFrameRate;
  for (std::size_t i = *idx + 1; i-- > 0;) {
    if (s.frames[i] < window_start) break;
    if (s.values[i] != 1) return false;
  }
  return true;
}

std::optional<double> advanced_time(const PredictionSeries& s,
                                    const LaneChangeEvent& event) {
  const auto idx = event_stamp_index(s, event.t_lc);
  if (!idx || s.values[*idx] != 1) return std::nullopt;
  std::size_t start = *idx;
  while (start > 0 && s.values[start - 1] == 1) --start;
  return static_cast<double>(event.t_lc - s.frames[start]) /
         static_cast<double>(Dataset::kFrameRate);
}

RuntimeReport runtime_report(const std::vector<PredictionSeries>& series,
                             const std::vector<LaneChangeEvent>& events,
                             int tau_p_seconds, double tau_window_seconds,
                             Provenance approach) {
  RuntimeReport report;
  report.approach = approach;

  auto series_of = [&](int vehicle_id) -> const PredictionSeries& {
    for (const auto& s : series) {
      if (s.vehicle_id == vehicle_id) return s;
    }
    throw lookup_error("no prediction series for vehicle " +
                       std::to_string(vehicle_id));
  };

  long long correct = 0;
  double advanced_sum = 0.0;
  long long advanced_n = 0;
  for (const auto& event : events) {
    const PredictionSeries& s = series_of(event.vehicle_id);
    EventScore score;
    score.event = event;
    score.covered = event_stamp_index(s, event.t_lc).has_value();
    score.correct = strict_correct(s, event, tau_p_seconds);
    score.advanced_time_s = advanced_time(s, event);
    if (score.correct) {
      ++correct;
      if (score.advanced_time_s) {
        advanced_sum += *score.advanced_time_s;
        ++advanced_n;
      }
    }
    report.events.push_back(score);
  }
  if (!events.empty())
    report.prediction_accuracy =
        static_cast<double>(correct) / static_cast<double>(events.size());
  if (advanced_n > 0) report.mean_advanced_time_s = advanced_sum / advanced_n;

  const auto window_ticks = static_cast<std::int64_t>(
      std::llround(tau_window_seconds * Dataset::kFrameRate));
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      bool truth = false;
      for (const auto& event : events) {
        if (event.vehicle_id != s.vehicle_id) continue;
        if (s.frames[i] >= event.t_lc - window_ticks &&
            s.frames[i] <= event.t_lc) {
          truth = true;
          break;
        }
      }
      if (truth) {
        s.values[i] == 1 ? ++report.stamp_tp : ++report.stamp_fn;
      } else {
        s.values[i] == 1 ? ++report.stamp_fp : ++report.stamp_tn;
      }
    }
  }
  if (report.stamp_tp + report.stamp_fn > 0)
    report.tpr = static_cast<double>(report.stamp_tp) /
                 static_cast<double>(report.stamp_tp + report.stamp_fn);
  if (report.stamp_fp + report.stamp_tn > 0)
    report.fpr = static_cast<double>(report.stamp_fp) /
                 static_cast<double>(report.stamp_fp + report.stamp_tn);
  return report;
}

void write_runtime_reports(std::ostream& out,
                           const std::vector<RuntimeReport>& reports,
                           double tau_window_seconds, int tau_p_seconds) {
  out << "# ground truth: per-stamp; a stamp is positive iff it lies within "
      << format_fixed(tau_window_seconds, 1)
      << " s before an event of its vehicle\n";
  out << "# correctness: all stamps within " << tau_p_seconds
      << " s up to the event must be positive\n";
  out << "approach,tpr,fpr,prediction_accuracy,avg_advanced_time_s,"
         "dropped_stamps\n";
  for (const auto& r : reports) {
    out << to_string(r.approach) << ',' << metric_to_string(r.tpr) << ','
        << metric_to_string(r.fpr) << ','
        << metric_to_string(r.prediction_accuracy) << ','
        << metric_to_string(r.mean_advanced_time_s) << ',' << r.dropped_stamps
        << '\n';
  }
}

void write_series(std::ostream& out,
                  const std::vector<PredictionSeries>& series) {
  out << "vehicle_id,frame,value,provenance\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      out << s.vehicle_id << ',' << s.frames[i] << ',' << s.values[i] << ','
          << to_string(s.provenance) << '\n';
    }
  }
}

}  // namespace lcp
