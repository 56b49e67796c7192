#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lcp/labeling.hpp"

namespace lcp {

enum class Activation { identity, logistic, tanh };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

double activate(Activation a, double x);
// Derivative expressed through the post-activation value y = f(x).
double activate_deriv_from_output(Activation a, double y);

enum class LossKind { rmse };

// Shared training knobs. Everything that affects a fit lives here so runs
// reproduce from (data, config) alone.
struct TrainConfig {
  double learning_rate = 0.3;
  int epochs = 1500;
  std::uint64_t seed = 1;
  double init_scale = 0.5;  // initial weights uniform in [-s, s]
  double momentum = 0.0;
  double tolerance = 1e-8;  // stop when the gradient inf-norm drops below
  int hidden = 4;
  int seq_len = 10;
  LossKind loss = LossKind::rmse;
};

struct FitInfo {
  std::vector<double> loss_history;  // one entry per completed epoch
  int epochs_run = 0;
};

// ---------------------------------------------------------------------------
// Multinomial logistic regression. Outcome 1 (index 0) is the reference;
// rows of beta are the m-1 non-reference coefficient vectors, each of
// length dim + 1 with the intercept last.

struct LogRegParams {
  int m = 2;
  int dim = 0;
  std::vector<double> beta;  // (m-1) x (dim+1), row-major

  double score(int k, std::span<const double> x) const;  // beta_k . [x, 1]
  bool operator==(const LogRegParams&) const = default;
};

// Class probabilities, length m, computed log-sum-exp stable. Sums to 1.
std::vector<double> logreg_proba(const LogRegParams& params,
                                 std::span<const double> x);

struct LogRegObjective {
  double mean_loglik = 0.0;
  std::vector<double> grad;  // d(mean_loglik)/d(beta), beta layout
};

LogRegObjective logreg_loglik_grad(const LogRegParams& params,
                                   const std::vector<std::vector<double>>& xs,
                                   const std::vector<int>& ys);

// Full-batch gradient ascent on the mean log-likelihood. Labels are class
// indices 0..m-1 (m inferred from the labels); every class must appear.
LogRegParams logreg_fit(const std::vector<std::vector<double>>& xs,
                        const std::vector<int>& ys, const TrainConfig& cfg,
                        FitInfo* info = nullptr);

// ---------------------------------------------------------------------------
// 3-layer perceptron with a single scalar output:
//   o = act2(w23 . act1(w12 x + b12) + b23)

struct MlpParams {
  int input = FeatureVector::kDim;
  int hidden = 4;
  Activation act1 = Activation::tanh;
  Activation act2 = Activation::logistic;
  std::vector<double> w12;  // hidden x input, row-major
  std::vector<double> b12;  // hidden
  std::vector<double> w23;  // hidden (single output row)
  double b23 = 0.0;

  bool operator==(const MlpParams&) const = default;
};

double mlp_forward(const MlpParams& params, std::span<const double> x);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // flattened parameter order
};

double mlp_loss(const MlpParams& params,
                const std::vector<std::vector<double>>& xs,
                const std::vector<double>& ys);
LossGrad mlp_loss_grad(const MlpParams& params,
                       const std::vector<std::vector<double>>& xs,
                       const std::vector<double>& ys);

MlpParams mlp_fit(const std::vector<std::vector<double>>& xs,
                  const std::vector<double>& ys, const TrainConfig& cfg,
                  FitInfo* info = nullptr);

// ---------------------------------------------------------------------------
// Minimal recurrent network over fixed-length sequences:
//   h_t = act(W x_t + U h_{t-1}),  h_0 = 0,  o = out_act(V h_T)
// Only the final step produces the prediction.

struct RnnParams {
  int input = FeatureVector::kDim;
  int hidden = 4;
  int seq_len = 10;
  Activation act = Activation::tanh;
  Activation out_act = Activation::logistic;
  std::vector<double> w;  // hidden x input
  std::vector<double> u;  // hidden x hidden
  std::vector<double> v;  // hidden (single output row)

  bool operator==(const RnnParams&) const = default;
};

double rnn_forward(const RnnParams& params,
                   const std::vector<std::vector<double>>& sequence);

double rnn_loss(const RnnParams& params,
                const std::vector<std::vector<std::vector<double>>>& xs,
                const std::vector<double>& ys);
LossGrad rnn_loss_grad(const RnnParams& params,
                       const std::vector<std::vector<std::vector<double>>>& xs,
                       const std::vector<double>& ys);

RnnParams rnn_fit(const std::vector<std::vector<std::vector<double>>>& xs,
                  const std::vector<double>& ys, const TrainConfig& cfg,
                  FitInfo* info = nullptr);

// ---------------------------------------------------------------------------
// Flattened parameter views (documented order; used by initialization,
// gradient checks and the model file format).
//   logreg: beta rows        mlp: w12, b12, w23, b23        rnn: w, u, v

std::vector<double> flatten(const LogRegParams& p);
std::vector<double> flatten(const MlpParams& p);
std::vector<double> flatten(const RnnParams& p);
void unflatten(std::span<const double> flat, LogRegParams& p);
void unflatten(std::span<const double> flat, MlpParams& p);
void unflatten(std::span<const double> flat, RnnParams& p);

// ---------------------------------------------------------------------------
// Pipeline-facing fitted model: parameters plus the feature scaler fitted
// on the same training data.

enum class ModelKind { logreg, mlp, rnn };

const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct FittedModel {
  std::variant<LogRegParams, MlpParams, RnnParams> params;
  StandardScaler scaler;
  std::uint64_t seed = 0;  // recorded for the model file

  ModelKind kind() const;
  // Frames of history a prediction needs (1, or seq_len for the RNN).
  int required_history() const;
  // Probability of the lane-change class; `history` is oldest-to-newest and
  // at least required_history() long (the tail is used). Applies the scaler.
  double predict_proba(std::span<const FeatureVector> history) const;
};

int predict_label(const FittedModel& model,
                  std::span<const FeatureVector> history, double threshold);

// Fits the scaler on `train`, scales, and fits the parameters. Samples must
// all carry feature sequences of the length the model needs.
FittedModel train_model(ModelKind kind, const std::vector<LabeledSample>& train,
                        const TrainConfig& cfg, FitInfo* info = nullptr);

// Self-describing text format; values at 17 significant digits so the
// round-trip is bit-exact.
void save_model(std::ostream& out, const FittedModel& model);
FittedModel load_model(std::istream& in);

}  // namespace lcp
