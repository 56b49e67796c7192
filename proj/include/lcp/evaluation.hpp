#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcp/learners.hpp"

namespace lcp {

struct ConfusionCounts {
  long long tp = 0, fp = 0, tn = 0, fn = 0;

  long long total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(const std::vector<int>& preds,
                          const std::vector<int>& labels);

// A metric with a zero denominator is nullopt and serializes as "NA";
// it never silently becomes 0.
struct MetricSet {
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> precision;
  std::optional<double> f1;
  std::optional<double> accuracy;
};

MetricSet metrics(const ConfusionCounts& c);

std::string metric_to_string(const std::optional<double>& m);

struct SplitResult {
  std::vector<int> train_vehicles;
  std::vector<int> test_vehicles;
};

// Seeded shuffle, then the nearest-integer share of vehicles becomes the
// test side. All samples of one vehicle land on one side by construction.
SplitResult split_train_test(std::vector<int> vehicles, double test_fraction,
                             std::uint64_t seed);

struct ModelSpec {
  ModelKind kind = ModelKind::mlp;
  TrainConfig train;
  double threshold = 0.5;
};

struct CvReport {
  std::string scheme_id;
  std::string model_id;
  std::vector<MetricSet> folds;
  MetricSet mean;  // per metric, averaged over the folds where defined
  std::map<int, int> fold_of_vehicle;
};

// k rounds of train/validate with folds cut by vehicle, so adjacent frames
// of one vehicle never straddle a fold boundary. Standardization is fitted
// inside each round on that round's training union only. If some round's
// training union misses a class the folds are reshuffled once; a second
// failure is a configuration error.
CvReport kfold_cv(const std::vector<LabeledSample>& samples, int k,
                  const ModelSpec& spec, std::uint64_t fold_seed,
                  const std::string& scheme_id = "",
                  const std::string& model_id = "");

struct NamedModelSpec {
  std::string name;
  ModelSpec spec;
};

struct SweepCell {
  std::string scheme;
  std::string model;
  CvReport report;
};

// Cross product of labeling schemes and model specs, each cell evaluated by
// kfold_cv on samples labeled from (ds, events) under that scheme. Cells
// may run concurrently (workers > 1); output order is fixed either way.
std::vector<SweepCell> labeling_sweep(const Dataset& ds,
                                      const std::vector<LaneChangeEvent>& events,
                                      const std::vector<NamedScheme>& schemes,
                                      const std::vector<NamedModelSpec>& models,
                                      int k, std::uint64_t fold_seed,
                                      Direction direction = Direction::left,
                                      int workers = 1);

// scheme,model,fold,tpr,fpr,precision,f1,accuracy with a fold=mean row.
void write_cv_table(std::ostream& out, const std::vector<SweepCell>& cells);

// Plot-ready long format: scheme,model,metric,value (mean values).
void write_cv_long(std::ostream& out, const std::vector<SweepCell>& cells);

}  // namespace lcp
