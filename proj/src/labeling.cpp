#include "lcp/labeling.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "lcp/errors.hpp"
#include "lcp/text.hpp"

namespace lcp {

NamedScheme scheme_preset(int index) {
  if (index < 1 || index > 4)
    throw config_error("labeling scheme preset must be LS1..LS4");
  return {"LS" + std::to_string(index), {5.0, 5.0 * (index - 1)}};
}

std::vector<NamedScheme> standard_schemes() {
  return {scheme_preset(1), scheme_preset(2), scheme_preset(3),
          scheme_preset(4)};
}

WindowPair window_frames(const LaneChangeEvent& event,
                         const LabelingScheme& scheme, int frame_rate) {
  if (scheme.tau <= 0.0) throw config_error("tau must be positive");
  if (scheme.tau_g < 0.0) throw config_error("tau_g must be non-negative");
  const auto ticks = static_cast<std::int64_t>(std::llround(frame_rate * scheme.tau));
  const auto gap = static_cast<std::int64_t>(std::llround(frame_rate * scheme.tau_g));
  WindowPair w;
  w.positive = {event.t_lc - ticks + 1, event.t_lc};
  w.negative = {event.t_lc - 2 * ticks - gap + 1, event.t_lc - ticks - gap};
  return w;
}

std::optional<FeatureVector> extract_features(const Dataset& ds, int ego_id,
                                              std::int64_t frame,
                                              Direction direction) {
  const NeighborContext ctx = find_neighbors(ds, ego_id, frame, direction);
  if (ctx.scenario != Scenario::a) return std::nullopt;
  const TrajectoryRecord* ego = ds.find(ego_id, frame);
  FeatureVector fv;
  fv.d01 = ctx.v1->position - ego->position;
  fv.d02 = ctx.v2->position - ego->position;
  fv.d03 = ctx.v3->position - ego->position;
  fv.v01 = ego->velocity - ctx.v1->velocity;
  fv.v02 = ego->velocity - ctx.v2->velocity;
  fv.v03 = ego->velocity - ctx.v3->velocity;
  fv.l0 = ego->lane;
  return fv;
}

const char* to_string(SkipReason r) {
  switch (r) {
    case SkipReason::truncated: return "truncated";
    case SkipReason::overlaps_prior_event: return "overlaps_prior_event";
    case SkipReason::too_many_drops: return "too_many_drops";
  }
  return "?";
}

namespace {

// Feature sequence of length seq_len ending at `frame`; nullopt when any
// frame in the lookback fails to extract.
std::optional<std::vector<FeatureVector>> sample_sequence(
    const Dataset& ds, int ego_id, std::int64_t frame, Direction direction,
    int seq_len) {
  std::vector<FeatureVector> seq;
  seq.reserve(static_cast<std::size_t>(seq_len));
  for (std::int64_t f = frame - seq_len + 1; f <= frame; ++f) {
    if (ds.find(ego_id, f) == nullptr) return std::nullopt;
    auto fv = extract_features(ds, ego_id, f, direction);
    if (!fv) return std::nullopt;
    seq.push_back(*fv);
  }
  return seq;
}

}  // namespace

std::vector<LabeledSample> label_events(const Dataset& ds,
                                        const std::vector<LaneChangeEvent>& events,
                                        const LabelingScheme& scheme,
                                        Direction direction, int seq_len,
                                        LabelingSummary* summary) {
  if (seq_len < 1) throw config_error("seq_len must be >= 1");
  LabelingSummary local;
  LabelingSummary& sum = summary ? *summary : local;
  sum = LabelingSummary{};
  sum.events_in = static_cast<int>(events.size());

  std::vector<LabeledSample> out;
  for (std::size_t ei = 0; ei < events.size(); ++ei) {
    const LaneChangeEvent& event = events[ei];
    const WindowPair w = window_frames(event, scheme, Dataset::kFrameRate);

    if (!ds.has_vehicle(event.vehicle_id) ||
        w.negative.first < ds.first_frame_of(event.vehicle_id)) {
      ++sum.skipped[SkipReason::truncated];
      continue;
    }

    // A previous change of the same vehicle inside the negative window
    // would mislabel genuine pre-change frames as "keep".
    bool contaminated = false;
    for (const auto& other : events) {
      if (&other == &event || other.vehicle_id != event.vehicle_id) continue;
      if (w.negative.contains(other.t_lc)) {
        contaminated = true;
        break;
      }
    }
    if (contaminated) {
      ++sum.skipped[SkipReason::overlaps_prior_event];
      continue;
    }

    struct Windowed {
      FrameRange range;
      int label;
    };
    std::vector<LabeledSample> event_samples;
    long long event_drops = 0;
    bool too_many = false;
    for (const Windowed& win : {Windowed{w.negative, 0}, Windowed{w.positive, 1}}) {
      long long drops = 0;
      for (std::int64_t f = win.range.first; f <= win.range.last; ++f) {
        auto seq = sample_sequence(ds, event.vehicle_id, f, direction, seq_len);
        if (!seq) {
          ++drops;
          continue;
        }
        LabeledSample s;
        s.features = std::move(*seq);
        s.label = win.label;
        s.vehicle_id = event.vehicle_id;
        s.frame = f;
        s.event_id = static_cast<int>(ei);
        event_samples.push_back(std::move(s));
      }
      if (2 * drops > win.range.length()) too_many = true;
      event_drops += drops;
    }
    if (too_many) {
      ++sum.skipped[SkipReason::too_many_drops];
      continue;
    }
    ++sum.events_kept;
    sum.dropped_frames += event_drops;
    for (auto& s : event_samples) {
      if (s.label == 1)
        ++sum.samples_pos;
      else
        ++sum.samples_neg;
      out.push_back(std::move(s));
    }
  }
  return out;
}

FeatureVector StandardScaler::transform(const FeatureVector& fv) const {
  auto a = fv.to_array();
  for (int i = 0; i < FeatureVector::kDim; ++i) {
    a[i] = stddev[i] == 0.0 ? 0.0 : (a[i] - mean[i]) / stddev[i];
  }
  return FeatureVector::from_array(a);
}

FeatureVector StandardScaler::inverse(const FeatureVector& fv) const {
  auto a = fv.to_array();
  for (int i = 0; i < FeatureVector::kDim; ++i) {
    a[i] = a[i] * stddev[i] + mean[i];
  }
  return FeatureVector::from_array(a);
}

StandardScaler fit_scaler(const std::vector<LabeledSample>& train) {
  if (train.empty()) throw fit_error("cannot fit a scaler on no samples");
  StandardScaler sc;
  std::array<double, FeatureVector::kDim> sum{};
  long long n = 0;
  for (const auto& s : train) {
    for (const auto& fv : s.features) {
      const auto a = fv.to_array();
      for (int i = 0; i < FeatureVector::kDim; ++i) sum[i] += a[i];
      ++n;
    }
  }
  for (int i = 0; i < FeatureVector::kDim; ++i)
    sc.mean[i] = sum[i] / static_cast<double>(n);

  std::array<double, FeatureVector::kDim> sq{};
  for (const auto& s : train) {
    for (const auto& fv : s.features) {
      const auto a = fv.to_array();
      for (int i = 0; i < FeatureVector::kDim; ++i) {
        const double d = a[i] - sc.mean[i];
        sq[i] += d * d;
      }
    }
  }
  for (int i = 0; i < FeatureVector::kDim; ++i) {
    const double var = sq[i] / static_cast<double>(n);
    sc.stddev[i] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return sc;
}

std::vector<LabeledSample> apply_scaler(const StandardScaler& scaler,
                                        std::vector<LabeledSample> samples) {
  for (auto& s : samples) {
    for (auto& fv : s.features) fv = scaler.transform(fv);
  }
  return samples;
}

StandardizeResult standardize(const std::vector<LabeledSample>& train,
                              const std::vector<LabeledSample>& apply_to) {
  StandardizeResult r;
  r.scaler = fit_scaler(train);
  r.train = apply_scaler(r.scaler, train);
  r.applied = apply_scaler(r.scaler, apply_to);
  return r;
}

void write_scaler(std::ostream& out, const StandardScaler& scaler) {
  out << "lcp-scaler 1\n";
  out << "# features: d01 d02 d03 v01 v02 v03 l0\n";
  out << "# conventions: d0j = pos_j - pos_0, v0j = v_0 - v_j\n";
  out << "mean";
  for (double m : scaler.mean) out << ' ' << format_exact(m);
  out << "\nstddev";
  for (double s : scaler.stddev) out << ' ' << format_exact(s);
  out << "\nend\n";
}

StandardScaler read_scaler(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "lcp-scaler 1")
    throw parse_error("not a scaler file (missing 'lcp-scaler 1' header)");
  StandardScaler sc;
  bool have_mean = false, have_std = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == "end") break;
    const auto cells = split(line, ' ');
    if (cells.size() != 1 + FeatureVector::kDim)
      throw parse_error("scaler line '" + line + "' malformed");
    std::array<double, FeatureVector::kDim> vals{};
    for (int i = 0; i < FeatureVector::kDim; ++i)
      vals[i] = parse_double(cells[i + 1], "scaler " + cells[0]);
    if (cells[0] == "mean") {
      sc.mean = vals;
      have_mean = true;
    } else if (cells[0] == "stddev") {
      sc.stddev = vals;
      have_std = true;
    } else {
      throw parse_error("unknown scaler field '" + cells[0] + "'");
    }
  }
  if (!have_mean || !have_std)
    throw parse_error("scaler file missing mean or stddev");
  return sc;
}

void write_samples(std::ostream& out, const std::vector<LabeledSample>& samples) {
  out << "vehicle_id,frame,event_id,d01,d02,d03,v01,v02,v03,l0,label\n";
  for (const auto& s : samples) {
    const auto a = s.at_frame().to_array();
    out << s.vehicle_id << ',' << s.frame << ',' << s.event_id;
    for (double v : a) out << ',' << format_exact(v);
    out << ',' << s.label << '\n';
  }
}

std::vector<LabeledSample> read_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw schema_error("sample file has no header");
  std::vector<LabeledSample> out;
  long long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 11)
      throw parse_error("sample row " + std::to_string(row) +
                        ": expected 11 cells");
    const std::string ctx = "sample row " + std::to_string(row);
    LabeledSample s;
    s.vehicle_id = static_cast<int>(parse_int(cells[0], ctx));
    s.frame = parse_int(cells[1], ctx);
    s.event_id = static_cast<int>(parse_int(cells[2], ctx));
    std::array<double, FeatureVector::kDim> a{};
    for (int i = 0; i < FeatureVector::kDim; ++i)
      a[i] = parse_double(cells[3 + i], ctx);
    s.features = {FeatureVector::from_array(a)};
    const long long label = parse_int(cells[10], ctx);
    if (label != 0 && label != 1)
      throw parse_error(ctx + ": label must be 0 or 1");
    s.label = static_cast<int>(label);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace lcp
