#include "lcp/learners.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "lcp/errors.hpp"
#include "lcp/rng.hpp"
#include "lcp/text.hpp"

namespace lcp {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::logistic: return "logistic";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "logistic") return Activation::logistic;
  if (s == "tanh") return Activation::tanh;
  throw config_error("unknown activation '" + s + "'");
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::logistic: return 1.0 / (1.0 + std::exp(-x));
    case Activation::tanh: return std::tanh(x);
  }
  return x;
}

double activate_deriv_from_output(Activation a, double y) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::logistic: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
  }
  return 1.0;
}

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::logreg: return "logreg";
    case ModelKind::mlp: return "mlp";
    case ModelKind::rnn: return "rnn";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "logreg") return ModelKind::logreg;
  if (s == "mlp") return ModelKind::mlp;
  if (s == "rnn") return ModelKind::rnn;
  throw config_error("unknown model kind '" + s + "'");
}

namespace {

void validate_config(const TrainConfig& cfg) {
  if (cfg.learning_rate <= 0.0) throw config_error("learning rate must be > 0");
  if (cfg.epochs < 0) throw config_error("epochs must be >= 0");
  if (cfg.init_scale < 0.0) throw config_error("init scale must be >= 0");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
    throw config_error("momentum must be in [0, 1)");
  if (cfg.hidden < 1) throw config_error("hidden units must be >= 1");
  if (cfg.seq_len < 1) throw config_error("seq_len must be >= 1");
}

std::vector<double> seeded_init(std::size_t count, const TrainConfig& cfg) {
  SplitMix64 rng(cfg.seed);
  std::vector<double> out(count);
  for (auto& v : out) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
  return out;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Full-batch descent with optional momentum over a flattened parameter
// vector. `objective` returns the loss and its gradient at the current
// point; the loss recorded for an epoch is the value before that epoch's
// update.
template <typename Objective>
std::vector<double> gradient_descent(std::vector<double> theta,
                                     const TrainConfig& cfg,
                                     Objective objective, FitInfo* info) {
  std::vector<double> velocity(theta.size(), 0.0);
  if (info) {
    info->loss_history.clear();
    info->epochs_run = 0;
  }
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    LossGrad lg = objective(theta);
    if (!std::isfinite(lg.loss)) {
      throw fit_error("training diverged (non-finite loss) at epoch " +
                      std::to_string(epoch));
    }
    if (info) {
      info->loss_history.push_back(lg.loss);
      info->epochs_run = epoch + 1;
    }
    if (inf_norm(lg.grad) < cfg.tolerance) break;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * lg.grad[i];
      theta[i] += velocity[i];
    }
  }
  return theta;
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression

double LogRegParams::score(int k, std::span<const double> x) const {
  const int width = dim + 1;
  const double* row = beta.data() + static_cast<std::size_t>(k) * width;
  double s = row[dim];  // intercept
  for (int i = 0; i < dim; ++i) s += row[i] * x[i];
  return s;
}

std::vector<double> logreg_proba(const LogRegParams& params,
                                 std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.dim)
    throw config_error("feature vector length does not match the model");
  std::vector<double> z(static_cast<std::size_t>(params.m), 0.0);
  for (int k = 1; k < params.m; ++k) z[k] = params.score(k - 1, x);

  const double zmax = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (double zk : z) denom += std::exp(zk - zmax);
  const double log_denom = zmax + std::log(denom);

  std::vector<double> p(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) p[k] = std::exp(z[k] - log_denom);
  return p;
}

LogRegObjective logreg_loglik_grad(const LogRegParams& params,
                                   const std::vector<std::vector<double>>& xs,
                                   const std::vector<int>& ys) {
  const int width = params.dim + 1;
  LogRegObjective obj;
  obj.grad.assign(params.beta.size(), 0.0);
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::vector<double> p = logreg_proba(params, xs[i]);
    obj.mean_loglik += std::log(p[static_cast<std::size_t>(ys[i])]) / n;
    for (int k = 1; k < params.m; ++k) {
      const double coeff = ((ys[i] == k ? 1.0 : 0.0) - p[static_cast<std::size_t>(k)]) / n;
      double* row = obj.grad.data() + static_cast<std::size_t>(k - 1) * width;
      for (int j = 0; j < params.dim; ++j) row[j] += coeff * xs[i][j];
      row[params.dim] += coeff;
    }
  }
  return obj;
}

LogRegParams logreg_fit(const std::vector<std::vector<double>>& xs,
                        const std::vector<int>& ys, const TrainConfig& cfg,
                        FitInfo* info) {
  validate_config(cfg);
  if (xs.empty() || xs.size() != ys.size())
    throw fit_error("need one label per sample and at least one sample");

  int m = 0;
  for (int y : ys) {
    if (y < 0) throw fit_error("labels must be non-negative class indices");
    m = std::max(m, y + 1);
  }
  if (m < 2) throw fit_error("training data contains a single class");
  std::vector<long long> counts(static_cast<std::size_t>(m), 0);
  for (int y : ys) ++counts[static_cast<std::size_t>(y)];
  for (int k = 0; k < m; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0)
      throw fit_error("class " + std::to_string(k) +
                      " has no training samples");
  }

  LogRegParams params;
  params.m = m;
  params.dim = static_cast<int>(xs[0].size());
  for (const auto& x : xs) {
    if (static_cast<int>(x.size()) != params.dim)
      throw fit_error("inconsistent feature vector lengths");
  }
  params.beta = seeded_init(
      static_cast<std::size_t>(m - 1) * (params.dim + 1), cfg);

  auto objective = [&](const std::vector<double>& theta) {
    LogRegParams cur = params;
    cur.beta = theta;
    LogRegObjective o = logreg_loglik_grad(cur, xs, ys);
    LossGrad lg;
    lg.loss = -o.mean_loglik;
    lg.grad.resize(o.grad.size());
    for (std::size_t i = 0; i < o.grad.size(); ++i) lg.grad[i] = -o.grad[i];
    return lg;
  };
  params.beta = gradient_descent(params.beta, cfg, objective, info);
  return params;
}

// ---------------------------------------------------------------------------
// MLP

namespace {

struct MlpTrace {
  std::vector<double> hidden;  // post-activation
  double z2 = 0.0;
  double out = 0.0;
};

MlpTrace mlp_trace(const MlpParams& p, std::span<const double> x) {
  MlpTrace t;
  t.hidden.resize(static_cast<std::size_t>(p.hidden));
  for (int j = 0; j < p.hidden; ++j) {
    double z = p.b12[static_cast<std::size_t>(j)];
    const double* row = p.w12.data() + static_cast<std::size_t>(j) * p.input;
    for (int i = 0; i < p.input; ++i) z += row[i] * x[i];
    t.hidden[static_cast<std::size_t>(j)] = activate(p.act1, z);
  }
  t.z2 = p.b23;
  for (int j = 0; j < p.hidden; ++j)
    t.z2 += p.w23[static_cast<std::size_t>(j)] * t.hidden[static_cast<std::size_t>(j)];
  t.out = activate(p.act2, t.z2);
  return t;
}

}  // namespace

double mlp_forward(const MlpParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.input)
    throw config_error("feature vector length does not match the model");
  return mlp_trace(params, x).out;
}

double mlp_loss(const MlpParams& params,
                const std::vector<std::vector<double>>& xs,
                const std::vector<double>& ys) {
  double sq = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = ys[i] - mlp_forward(params, xs[i]);
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(xs.size()));
}

LossGrad mlp_loss_grad(const MlpParams& params,
                       const std::vector<std::vector<double>>& xs,
                       const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  LossGrad lg;
  lg.grad.assign(flatten(params).size(), 0.0);

  std::vector<MlpTrace> traces(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    traces[i] = mlp_trace(params, xs[i]);
    const double d = ys[i] - traces[i].out;
    sq += d * d;
  }
  lg.loss = std::sqrt(sq / static_cast<double>(n));
  if (lg.loss == 0.0) return lg;  // gradient of sqrt at 0 is singular

  // L = sqrt(mean (y-o)^2)  =>  dL/dtheta = sum (o-y) do/dtheta / (N L)
  const double scale = 1.0 / (static_cast<double>(n) * lg.loss);
  const std::size_t w12_off = 0;
  const std::size_t b12_off = w12_off + params.w12.size();
  const std::size_t w23_off = b12_off + params.b12.size();
  const std::size_t b23_off = w23_off + params.w23.size();

  for (std::size_t i = 0; i < n; ++i) {
    const MlpTrace& t = traces[i];
    const double g_out = (t.out - ys[i]) * scale;
    const double g_z2 = g_out * activate_deriv_from_output(params.act2, t.out);
    for (int j = 0; j < params.hidden; ++j) {
      lg.grad[w23_off + static_cast<std::size_t>(j)] +=
          g_z2 * t.hidden[static_cast<std::size_t>(j)];
    }
    lg.grad[b23_off] += g_z2;
    for (int j = 0; j < params.hidden; ++j) {
      const double hj = t.hidden[static_cast<std::size_t>(j)];
      const double g_z1 = g_z2 * params.w23[static_cast<std::size_t>(j)] *
                          activate_deriv_from_output(params.act1, hj);
      lg.grad[b12_off + static_cast<std::size_t>(j)] += g_z1;
      double* row =
          lg.grad.data() + w12_off + static_cast<std::size_t>(j) * params.input;
      for (int k = 0; k < params.input; ++k) row[k] += g_z1 * xs[i][static_cast<std::size_t>(k)];
    }
  }
  return lg;
}

MlpParams mlp_fit(const std::vector<std::vector<double>>& xs,
                  const std::vector<double>& ys, const TrainConfig& cfg,
                  FitInfo* info) {
  validate_config(cfg);
  if (xs.empty() || xs.size() != ys.size())
    throw fit_error("need one label per sample and at least one sample");

  MlpParams params;
  params.input = static_cast<int>(xs[0].size());
  params.hidden = cfg.hidden;
  for (const auto& x : xs) {
    if (static_cast<int>(x.size()) != params.input)
      throw fit_error("inconsistent feature vector lengths");
  }
  unflatten(seeded_init(static_cast<std::size_t>(params.hidden) * params.input +
                            params.hidden + params.hidden + 1,
                        cfg),
            params);

  auto objective = [&](const std::vector<double>& theta) {
    MlpParams cur = params;
    unflatten(theta, cur);
    return mlp_loss_grad(cur, xs, ys);
  };
  unflatten(gradient_descent(flatten(params), cfg, objective, info), params);
  return params;
}

// ---------------------------------------------------------------------------
// RNN

namespace {

struct RnnTrace {
  std::vector<std::vector<double>> h;  // h[0] = zero state, h[t] per step
  double z = 0.0;
  double out = 0.0;
};

RnnTrace rnn_trace(const RnnParams& p,
                   const std::vector<std::vector<double>>& seq) {
  RnnTrace t;
  t.h.assign(seq.size() + 1,
             std::vector<double>(static_cast<std::size_t>(p.hidden), 0.0));
  for (std::size_t step = 0; step < seq.size(); ++step) {
    for (int j = 0; j < p.hidden; ++j) {
      double a = 0.0;
      const double* wrow = p.w.data() + static_cast<std::size_t>(j) * p.input;
      for (int i = 0; i < p.input; ++i) a += wrow[i] * seq[step][static_cast<std::size_t>(i)];
      const double* urow = p.u.data() + static_cast<std::size_t>(j) * p.hidden;
      for (int k = 0; k < p.hidden; ++k) a += urow[k] * t.h[step][static_cast<std::size_t>(k)];
      t.h[step + 1][static_cast<std::size_t>(j)] = activate(p.act, a);
    }
  }
  t.z = 0.0;
  for (int j = 0; j < p.hidden; ++j)
    t.z += p.v[static_cast<std::size_t>(j)] * t.h.back()[static_cast<std::size_t>(j)];
  t.out = activate(p.out_act, t.z);
  return t;
}

void check_sequence(const RnnParams& p,
                    const std::vector<std::vector<double>>& seq) {
  if (static_cast<int>(seq.size()) != p.seq_len)
    throw config_error("sequence length " + std::to_string(seq.size()) +
                       " does not match the model's " +
                       std::to_string(p.seq_len));
  for (const auto& step : seq) {
    if (static_cast<int>(step.size()) != p.input)
      throw config_error("sequence step width does not match the model");
  }
}

}  // namespace

double rnn_forward(const RnnParams& params,
                   const std::vector<std::vector<double>>& sequence) {
  check_sequence(params, sequence);
  return rnn_trace(params, sequence).out;
}

double rnn_loss(const RnnParams& params,
                const std::vector<std::vector<std::vector<double>>>& xs,
                const std::vector<double>& ys) {
  double sq = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = ys[i] - rnn_forward(params, xs[i]);
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(xs.size()));
}

LossGrad rnn_loss_grad(const RnnParams& params,
                       const std::vector<std::vector<std::vector<double>>>& xs,
                       const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  LossGrad lg;
  lg.grad.assign(params.w.size() + params.u.size() + params.v.size(), 0.0);

  std::vector<RnnTrace> traces(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    check_sequence(params, xs[i]);
    traces[i] = rnn_trace(params, xs[i]);
    const double d = ys[i] - traces[i].out;
    sq += d * d;
  }
  lg.loss = std::sqrt(sq / static_cast<double>(n));
  if (lg.loss == 0.0) return lg;

  const double scale = 1.0 / (static_cast<double>(n) * lg.loss);
  const std::size_t w_off = 0;
  const std::size_t u_off = w_off + params.w.size();
  const std::size_t v_off = u_off + params.u.size();
  const std::size_t H = static_cast<std::size_t>(params.hidden);

  std::vector<double> dh(H), dh_prev(H), da(H);
  for (std::size_t i = 0; i < n; ++i) {
    const RnnTrace& t = traces[i];
    const double g_out = (t.out - ys[i]) * scale;
    const double g_z = g_out * activate_deriv_from_output(params.out_act, t.out);
    for (std::size_t j = 0; j < H; ++j) {
      lg.grad[v_off + j] += g_z * t.h.back()[j];
      dh[j] = g_z * params.v[j];
    }
    for (std::size_t step = xs[i].size(); step >= 1; --step) {
      for (std::size_t j = 0; j < H; ++j) {
        da[j] = dh[j] * activate_deriv_from_output(params.act, t.h[step][j]);
      }
      for (std::size_t j = 0; j < H; ++j) {
        double* wrow = lg.grad.data() + w_off + j * static_cast<std::size_t>(params.input);
        const auto& x = xs[i][step - 1];
        for (int k = 0; k < params.input; ++k) wrow[static_cast<std::size_t>(k)] += da[j] * x[static_cast<std::size_t>(k)];
        double* urow = lg.grad.data() + u_off + j * H;
        for (std::size_t k = 0; k < H; ++k) urow[k] += da[j] * t.h[step - 1][k];
      }
      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      for (std::size_t j = 0; j < H; ++j) {
        const double* urow = params.u.data() + j * H;
        for (std::size_t k = 0; k < H; ++k) dh_prev[k] += urow[k] * da[j];
      }
      dh.swap(dh_prev);
    }
  }
  return lg;
}

RnnParams rnn_fit(const std::vector<std::vector<std::vector<double>>>& xs,
                  const std::vector<double>& ys, const TrainConfig& cfg,
                  FitInfo* info) {
  validate_config(cfg);
  if (xs.empty() || xs.size() != ys.size())
    throw fit_error("need one label per sample and at least one sample");

  RnnParams params;
  params.seq_len = cfg.seq_len;
  params.hidden = cfg.hidden;
  params.input = static_cast<int>(xs[0][0].size());
  for (const auto& seq : xs) check_sequence(params, seq);

  const std::size_t count = static_cast<std::size_t>(params.hidden) * params.input +
                            static_cast<std::size_t>(params.hidden) * params.hidden +
                            static_cast<std::size_t>(params.hidden);
  unflatten(seeded_init(count, cfg), params);

  auto objective = [&](const std::vector<double>& theta) {
    RnnParams cur = params;
    unflatten(theta, cur);
    return rnn_loss_grad(cur, xs, ys);
  };
  unflatten(gradient_descent(flatten(params), cfg, objective, info), params);
  return params;
}

// ---------------------------------------------------------------------------
// Flattening

std::vector<double> flatten(const LogRegParams& p) { return p.beta; }

std::vector<double> flatten(const MlpParams& p) {
  std::vector<double> out;
  out.reserve(p.w12.size() + p.b12.size() + p.w23.size() + 1);
  out.insert(out.end(), p.w12.begin(), p.w12.end());
  out.insert(out.end(), p.b12.begin(), p.b12.end());
  out.insert(out.end(), p.w23.begin(), p.w23.end());
  out.push_back(p.b23);
  return out;
}

std::vector<double> flatten(const RnnParams& p) {
  std::vector<double> out;
  out.reserve(p.w.size() + p.u.size() + p.v.size());
  out.insert(out.end(), p.w.begin(), p.w.end());
  out.insert(out.end(), p.u.begin(), p.u.end());
  out.insert(out.end(), p.v.begin(), p.v.end());
  return out;
}

void unflatten(std::span<const double> flat, LogRegParams& p) {
  p.beta.assign(flat.begin(), flat.end());
}

void unflatten(std::span<const double> flat, MlpParams& p) {
  const std::size_t nw12 = static_cast<std::size_t>(p.hidden) * p.input;
  const std::size_t nb12 = static_cast<std::size_t>(p.hidden);
  const std::size_t nw23 = static_cast<std::size_t>(p.hidden);
  p.w12.assign(flat.begin(), flat.begin() + nw12);
  p.b12.assign(flat.begin() + nw12, flat.begin() + nw12 + nb12);
  p.w23.assign(flat.begin() + nw12 + nb12, flat.begin() + nw12 + nb12 + nw23);
  p.b23 = flat[nw12 + nb12 + nw23];
}

void unflatten(std::span<const double> flat, RnnParams& p) {
  const std::size_t nw = static_cast<std::size_t>(p.hidden) * p.input;
  const std::size_t nu = static_cast<std::size_t>(p.hidden) * p.hidden;
  const std::size_t nv = static_cast<std::size_t>(p.hidden);
  p.w.assign(flat.begin(), flat.begin() + nw);
  p.u.assign(flat.begin() + nw, flat.begin() + nw + nu);
  p.v.assign(flat.begin() + nw + nu, flat.begin() + nw + nu + nv);
}

// ---------------------------------------------------------------------------
// FittedModel

ModelKind FittedModel::kind() const {
  if (std::holds_alternative<LogRegParams>(params)) return ModelKind::logreg;
  if (std::holds_alternative<MlpParams>(params)) return ModelKind::mlp;
  return ModelKind::rnn;
}

int FittedModel::required_history() const {
  if (const auto* r = std::get_if<RnnParams>(&params)) return r->seq_len;
  return 1;
}

double FittedModel::predict_proba(std::span<const FeatureVector> history) const {
  const int need = required_history();
  if (static_cast<int>(history.size()) < need)
    throw config_error("prediction needs " + std::to_string(need) +
                       " frames of history, got " +
                       std::to_string(history.size()));
  if (const auto* lr = std::get_if<LogRegParams>(&params)) {
    const auto a = scaler.transform(history.back()).to_array();
    return logreg_proba(*lr, a)[1];  // class 1 = lane change
  }
  if (const auto* m = std::get_if<MlpParams>(&params)) {
    const auto a = scaler.transform(history.back()).to_array();
    return mlp_forward(*m, a);
  }
  const auto& r = std::get<RnnParams>(params);
  std::vector<std::vector<double>> seq;
  seq.reserve(static_cast<std::size_t>(need));
  for (std::size_t i = history.size() - static_cast<std::size_t>(need);
       i < history.size(); ++i) {
    const auto a = scaler.transform(history[i]).to_array();
    seq.emplace_back(a.begin(), a.end());
  }
  return rnn_forward(r, seq);
}

int predict_label(const FittedModel& model,
                  std::span<const FeatureVector> history, double threshold) {
  return model.predict_proba(history) > threshold ? 1 : 0;
}

FittedModel train_model(ModelKind kind, const std::vector<LabeledSample>& train,
                        const TrainConfig& cfg, FitInfo* info) {
  if (train.empty()) throw fit_error("no training samples");
  FittedModel model;
  model.scaler = fit_scaler(train);
  model.seed = cfg.seed;
  const std::vector<LabeledSample> scaled = apply_scaler(model.scaler, train);

  if (kind == ModelKind::rnn) {
    std::vector<std::vector<std::vector<double>>> xs;
    std::vector<double> ys;
    xs.reserve(scaled.size());
    ys.reserve(scaled.size());
    for (const auto& s : scaled) {
      if (static_cast<int>(s.features.size()) != cfg.seq_len)
        throw fit_error("sample at frame " + std::to_string(s.frame) +
                        " has sequence length " +
                        std::to_string(s.features.size()) + ", expected " +
                        std::to_string(cfg.seq_len));
      std::vector<std::vector<double>> seq;
      for (const auto& fv : s.features) {
        const auto a = fv.to_array();
        seq.emplace_back(a.begin(), a.end());
      }
      xs.push_back(std::move(seq));
      ys.push_back(static_cast<double>(s.label));
    }
    model.params = rnn_fit(xs, ys, cfg, info);
    return model;
  }

  std::vector<std::vector<double>> xs;
  xs.reserve(scaled.size());
  for (const auto& s : scaled) {
    const auto a = s.at_frame().to_array();
    xs.emplace_back(a.begin(), a.end());
  }
  if (kind == ModelKind::logreg) {
    std::vector<int> ys;
    ys.reserve(scaled.size());
    for (const auto& s : scaled) ys.push_back(s.label);
    model.params = logreg_fit(xs, ys, cfg, info);
  } else {
    std::vector<double> ys;
    ys.reserve(scaled.size());
    for (const auto& s : scaled) ys.push_back(static_cast<double>(s.label));
    model.params = mlp_fit(xs, ys, cfg, info);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Model file format

void save_model(std::ostream& out, const FittedModel& model) {
  out << "lcp-model 1\n";
  out << "kind " << to_string(model.kind()) << '\n';
  std::vector<double> flat;
  if (const auto* lr = std::get_if<LogRegParams>(&model.params)) {
    out << "classes " << lr->m << '\n';
    out << "input " << lr->dim << '\n';
    flat = flatten(*lr);
  } else if (const auto* m = std::get_if<MlpParams>(&model.params)) {
    out << "input " << m->input << '\n';
    out << "hidden " << m->hidden << '\n';
    out << "activations " << to_string(m->act1) << ' ' << to_string(m->act2)
        << '\n';
    flat = flatten(*m);
  } else {
    const auto& r = std::get<RnnParams>(model.params);
    out << "input " << r.input << '\n';
    out << "hidden " << r.hidden << '\n';
    out << "seq_len " << r.seq_len << '\n';
    out << "activations " << to_string(r.act) << ' ' << to_string(r.out_act)
        << '\n';
    flat = flatten(r);
  }
  out << "seed " << model.seed << '\n';
  out << "params " << flat.size() << '\n';
  for (double v : flat) out << format_exact(v) << '\n';
  out << "end\n";
}

FittedModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "lcp-model 1")
    throw parse_error("not a model file (missing 'lcp-model 1' header)");

  std::map<std::string, std::string> fields;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == "end") break;
    const std::size_t sp = line.find(' ');
    const std::string key = line.substr(0, sp);
    const std::string val = sp == std::string::npos ? "" : trim(line.substr(sp + 1));
    if (key == "params") {
      const long long count = parse_int(val, "model params count");
      flat.reserve(static_cast<std::size_t>(count));
      for (long long i = 0; i < count; ++i) {
        if (!std::getline(in, line))
          throw parse_error("model file truncated in parameter block");
        flat.push_back(parse_double(trim(line), "model parameter"));
      }
    } else {
      fields[key] = val;
    }
  }

  auto field = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end())
      throw parse_error("model file missing field '" + std::string(key) + "'");
    return it->second;
  };

  FittedModel model;
  const ModelKind kind = model_kind_from_string(field("kind"));
  if (fields.count("seed"))
    model.seed = static_cast<std::uint64_t>(parse_int(fields["seed"], "model seed"));

  if (kind == ModelKind::logreg) {
    LogRegParams p;
    p.m = static_cast<int>(parse_int(field("classes"), "model classes"));
    p.dim = static_cast<int>(parse_int(field("input"), "model input"));
    if (flat.size() != static_cast<std::size_t>(p.m - 1) * (p.dim + 1))
      throw parse_error("model parameter count does not match the shape");
    unflatten(flat, p);
    model.params = std::move(p);
  } else if (kind == ModelKind::mlp) {
    MlpParams p;
    p.input = static_cast<int>(parse_int(field("input"), "model input"));
    p.hidden = static_cast<int>(parse_int(field("hidden"), "model hidden"));
    const auto acts = split(field("activations"), ' ');
    if (acts.size() != 2) throw parse_error("mlp needs two activation ids");
    p.act1 = activation_from_string(acts[0]);
    p.act2 = activation_from_string(acts[1]);
    if (flat.size() != static_cast<std::size_t>(p.hidden) * p.input +
                           2 * static_cast<std::size_t>(p.hidden) + 1)
      throw parse_error("model parameter count does not match the shape");
    unflatten(flat, p);
    model.params = std::move(p);
  } else {
    RnnParams p;
    p.input = static_cast<int>(parse_int(field("input"), "model input"));
    p.hidden = static_cast<int>(parse_int(field("hidden"), "model hidden"));
    p.seq_len = static_cast<int>(parse_int(field("seq_len"), "model seq_len"));
    const auto acts = split(field("activations"), ' ');
    if (acts.size() != 2) throw parse_error("rnn needs two activation ids");
    p.act = activation_from_string(acts[0]);
    p.out_act = activation_from_string(acts[1]);
    if (flat.size() != static_cast<std::size_t>(p.hidden) * p.input +
                           static_cast<std::size_t>(p.hidden) * p.hidden +
                           static_cast<std::size_t>(p.hidden))
      throw parse_error("model parameter count does not match the shape");
    unflatten(flat, p);
    model.params = std::move(p);
  }
  return model;
}

}  // namespace lcp
