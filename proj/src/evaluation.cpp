#include "lcp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <set>

#include "lcp/errors.hpp"
#include "lcp/rng.hpp"
#include "lcp/text.hpp"

namespace lcp {

ConfusionCounts confusion(const std::vector<int>& preds,
                          const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    throw error("confusion: " + std::to_string(preds.size()) +
                " predictions vs " + std::to_string(labels.size()) +
                " labels");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] == 1) {
      preds[i] == 1 ? ++c.tp : ++c.fn;
    } else {
      preds[i] == 1 ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

namespace {

std::optional<double> ratio(long long num, long long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricSet metrics(const ConfusionCounts& c) {
  MetricSet m;
  m.tpr = ratio(c.tp, c.tp + c.fn);
  m.fpr = ratio(c.fp, c.fp + c.tn);
  m.precision = ratio(c.tp, c.tp + c.fp);
  if (m.precision && m.tpr && (*m.precision + *m.tpr) > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.tpr / (*m.precision + *m.tpr);
  }
  m.accuracy = ratio(c.tp + c.tn, c.total());
  return m;
}

std::string metric_to_string(const std::optional<double>& m) {
  return m ? format_fixed(*m, 6) : "NA";
}

SplitResult split_train_test(std::vector<int> vehicles, double test_fraction,
                             std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0)
    throw config_error("test fraction must be in (0, 1)");
  std::sort(vehicles.begin(), vehicles.end());
  SplitMix64 rng(seed);
  rng.shuffle(vehicles);
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(vehicles.size()) * test_fraction));
  SplitResult r;
  r.test_vehicles.assign(vehicles.begin(), vehicles.begin() + static_cast<std::ptrdiff_t>(n_test));
  r.train_vehicles.assign(vehicles.begin() + static_cast<std::ptrdiff_t>(n_test), vehicles.end());
  std::sort(r.test_vehicles.begin(), r.test_vehicles.end());
  std::sort(r.train_vehicles.begin(), r.train_vehicles.end());
  return r;
}

namespace {

std::map<int, int> assign_folds(const std::vector<LabeledSample>& samples,
                                int k, std::uint64_t seed) {
  std::set<int> vehicle_set;
  for (const auto& s : samples) vehicle_set.insert(s.vehicle_id);
  std::vector<int> vehicles(vehicle_set.begin(), vehicle_set.end());
  SplitMix64 rng(seed);
  rng.shuffle(vehicles);
  std::map<int, int> fold_of;
  for (std::size_t i = 0; i < vehicles.size(); ++i)
    fold_of[vehicles[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return fold_of;
}

bool training_unions_complete(const std::vector<LabeledSample>& samples,
                              const std::map<int, int>& fold_of, int k) {
  // classes present in the k-1 fold union = classes missing only when a
  // class lives entirely inside the held-out fold
  for (int fold = 0; fold < k; ++fold) {
    bool has[2] = {false, false};
    for (const auto& s : samples) {
      if (fold_of.at(s.vehicle_id) != fold) has[s.label] = true;
    }
    if (!has[0] || !has[1]) return false;
  }
  return true;
}

void mean_metric(std::optional<double> MetricSet::*field,
                 const std::vector<MetricSet>& folds, MetricSet& out) {
  double sum = 0.0;
  int n = 0;
  for (const auto& f : folds) {
    if (f.*field) {
      sum += *(f.*field);
      ++n;
    }
  }
  if (n > 0) out.*field = sum / n;
}

}  // namespace

CvReport kfold_cv(const std::vector<LabeledSample>& samples, int k,
                  const ModelSpec& spec, std::uint64_t fold_seed,
                  const std::string& scheme_id, const std::string& model_id) {
  if (k < 2) throw config_error("k must be >= 2");
  if (samples.empty()) throw config_error("no samples to cross-validate");
  {
    std::set<int> vehicles;
    for (const auto& s : samples) vehicles.insert(s.vehicle_id);
    if (static_cast<int>(vehicles.size()) < k)
      throw config_error("fewer vehicles than folds");
  }

  std::map<int, int> fold_of = assign_folds(samples, k, fold_seed);
  if (!training_unions_complete(samples, fold_of, k)) {
    fold_of = assign_folds(samples, k, fold_seed ^ 0x5bd1e995u);
    if (!training_unions_complete(samples, fold_of, k))
      throw config_error(
          "a training union is missing a class even after reshuffling");
  }

  CvReport report;
  report.scheme_id = scheme_id;
  report.model_id = model_id.empty() ? to_string(spec.kind) : model_id;
  report.fold_of_vehicle = fold_of;

  for (int fold = 0; fold < k; ++fold) {
    std::vector<LabeledSample> train, val;
    for (const auto& s : samples) {
      (fold_of.at(s.vehicle_id) == fold ? val : train).push_back(s);
    }
    const FittedModel model = train_model(spec.kind, train, spec.train);
    std::vector<int> preds, labels;
    preds.reserve(val.size());
    labels.reserve(val.size());
    for (const auto& s : val) {
      preds.push_back(predict_label(model, s.features, spec.threshold));
      labels.push_back(s.label);
    }
    report.folds.push_back(metrics(confusion(preds, labels)));
  }

  mean_metric(&MetricSet::tpr, report.folds, report.mean);
  mean_metric(&MetricSet::fpr, report.folds, report.mean);
  mean_metric(&MetricSet::precision, report.folds, report.mean);
  mean_metric(&MetricSet::f1, report.folds, report.mean);
  mean_metric(&MetricSet::accuracy, report.folds, report.mean);
  return report;
}

std::vector<SweepCell> labeling_sweep(const Dataset& ds,
                                      const std::vector<LaneChangeEvent>& events,
                                      const std::vector<NamedScheme>& schemes,
                                      const std::vector<NamedModelSpec>& models,
                                      int k, std::uint64_t fold_seed,
                                      Direction direction, int workers) {
  if (workers < 1) throw config_error("workers must be >= 1");

  // Label once per (scheme, sequence length) pair; pointwise models share.
  struct Cell {
    std::size_t scheme_idx;
    std::size_t model_idx;
    std::vector<LabeledSample> samples;
  };
  std::vector<Cell> cells;
  for (std::size_t si = 0; si < schemes.size(); ++si) {
    std::map<int, std::vector<LabeledSample>> by_len;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      const auto& spec = models[mi].spec;
      const int len = spec.kind == ModelKind::rnn ? spec.train.seq_len : 1;
      if (!by_len.count(len)) {
        by_len[len] = label_events(ds, events, schemes[si].scheme, direction, len);
      }
      cells.push_back({si, mi, by_len[len]});
    }
  }

  auto run_cell = [&](const Cell& c) {
    return SweepCell{schemes[c.scheme_idx].name, models[c.model_idx].name,
                     kfold_cv(c.samples, k, models[c.model_idx].spec, fold_seed,
                              schemes[c.scheme_idx].name,
                              models[c.model_idx].name)};
  };

  std::vector<SweepCell> out(cells.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) out[i] = run_cell(cells[i]);
    return out;
  }
  // Fixed-size batches keep at most `workers` trainings in flight; each
  // cell is internally deterministic, so scheduling cannot change results.
  for (std::size_t base = 0; base < cells.size();
       base += static_cast<std::size_t>(workers)) {
    std::vector<std::future<SweepCell>> batch;
    const std::size_t end =
        std::min(cells.size(), base + static_cast<std::size_t>(workers));
    for (std::size_t i = base; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, run_cell, std::cref(cells[i])));
    }
    for (std::size_t i = base; i < end; ++i) out[i] = batch[i - base].get();
  }
  return out;
}

void write_cv_table(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "scheme,model,fold,tpr,fpr,precision,f1,accuracy\n";
  auto row = [&](const std::string& scheme, const std::string& model,
                 const std::string& fold, const MetricSet& m) {
    out << scheme << ',' << model << ',' << fold << ','
        << metric_to_string(m.tpr) << ',' << metric_to_string(m.fpr) << ','
        << metric_to_string(m.precision) << ',' << metric_to_string(m.f1)
        << ',' << metric_to_string(m.accuracy) << '\n';
  };
  for (const auto& cell : cells) {
    for (std::size_t f = 0; f < cell.report.folds.size(); ++f) {
      row(cell.scheme, cell.model, std::to_string(f + 1),
          cell.report.folds[f]);
    }
    row(cell.scheme, cell.model, "mean", cell.report.mean);
  }
}

void write_cv_long(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "scheme,model,metric,value\n";
  for (const auto& cell : cells) {
    const MetricSet& m = cell.report.mean;
    const std::pair<const char*, const std::optional<double>*> fields[] = {
        {"tpr", &m.tpr},
        {"fpr", &m.fpr},
        {"precision", &m.precision},
        {"f1", &m.f1},
        {"accuracy", &m.accuracy},
    };
    for (const auto& [name, value] : fields) {
      out << cell.scheme << ',' << cell.model << ',' << name << ','
          << metric_to_string(*value) << '\n';
    }
  }
}

}  // namespace lcp
