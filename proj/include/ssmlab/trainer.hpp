#pragma once

// Desk-scale gradient training of the diagonal SSM on synthetic convolution
// tasks. Gradients are exact analytic derivatives of the discrete kernel, so
// the optimizer stays dependency-light and finite-difference checks are
// meaningful.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ssmlab/common.hpp"
#include "ssmlab/init.hpp"
#include "ssmlab/ssm.hpp"

namespace ssmlab {

enum class TaskKind { Copying, Shift, FirstLast, CustomTarget };

struct Task {
  TaskKind kind = TaskKind::Shift;
  Index length = 128;
  Index dim = 1;       // input channels (Copying)
  Index delay = 0;     // Copying lag; defaults to L/2
  Index n_train = 1000;
  Index n_test = 1000;
  std::uint64_t seed = 0;
  Eigen::VectorXd target;  // CustomTarget rho*

  static Task shift(Index length) {
    Task t;
    t.kind = TaskKind::Shift;
    t.length = length;
    return t;
  }
  static Task first_last(Index length) {
    Task t;
    t.kind = TaskKind::FirstLast;
    t.length = length;
    return t;
  }
  static Task copying(Index length, Index dim, Index delay = 0) {
    Task t;
    t.kind = TaskKind::Copying;
    t.length = length;
    t.dim = dim;
    t.delay = delay > 0 ? delay : length / 2;
    return t;
  }
  static Task custom(const Eigen::VectorXd& rho) {
    Task t;
    t.kind = TaskKind::CustomTarget;
    t.length = rho.size();
    t.target = rho;
    return t;
  }

  void validate() const {
    require(length >= 2, "Task: L must be >= 2");
    require(dim >= 1, "Task: dim must be >= 1");
    require(n_train >= 1 && n_test >= 1, "Task: need samples");
    if (kind == TaskKind::Copying) {
      require(delay >= 1 && delay < length, "Task: delay must be in [1, L-1]");
    }
    if (kind == TaskKind::CustomTarget) {
      require(target.size() == length, "Task: target length mismatch");
    }
  }

  /// Whether the loss runs over every output position (vs the final output).
  bool per_position() const { return kind == TaskKind::Copying; }

  /// The target memory function rho* the task convolves with.
  Eigen::VectorXd target_kernel() const {
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(length);
    switch (kind) {
      case TaskKind::Shift: rho[length - 1] = 1.0; break;
      case TaskKind::FirstLast: rho[0] = 1.0; rho[length - 1] = 1.0; break;
      case TaskKind::Copying: rho[delay] = 1.0; break;
      case TaskKind::CustomTarget: rho = target; break;
    }
    return rho;
  }
};

/// Per-channel inputs and labels. Final-output tasks carry N x 1 labels,
/// per-position tasks N x L.
struct TaskData {
  std::vector<Eigen::MatrixXd> x_train, y_train, x_test, y_test;
};

namespace detail {

// y_{t+1} = sum_{k<=t} rho_k x_{t-k} for every row of x.
inline void causal_convolve(const Eigen::VectorXd& rho, const Eigen::MatrixXd& x,
                            Eigen::MatrixXd& y) {
  const Index length = x.cols();
  y.setZero(x.rows(), length);
  for (Index k = 0; k < length; ++k) {
    if (rho[k] != 0.0) y.rightCols(length - k) += rho[k] * x.leftCols(length - k);
  }
}

inline Eigen::MatrixXd task_labels(const Task& task, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd rho = task.target_kernel();
  if (task.per_position()) {
    Eigen::MatrixXd y;
    causal_convolve(rho, x, y);
    return y;
  }
  return x.rowwise().reverse() * rho;  // y*_L per sample
}

} // namespace detail

/// iid standard normal inputs; labels by convolving with the task's rho*.
inline TaskData make_task_data(const Task& task) {
  task.validate();
  TaskData data;
  auto fill = [&](Index n, std::uint64_t salt, std::vector<Eigen::MatrixXd>& xs,
                  std::vector<Eigen::MatrixXd>& ys) {
    for (Index c = 0; c < task.dim; ++c) {
      auto rng = make_rng(mix_seed(task.seed, mix_seed(salt, std::uint64_t(c))));
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::MatrixXd x(n, task.length);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < task.length; ++j) x(i, j) = normal(rng);
      ys.push_back(detail::task_labels(task, x));
      xs.push_back(std::move(x));
    }
  };
  fill(task.n_train, 0x7472ULL, data.x_train, data.y_train);
  fill(task.n_test, 0x7465ULL, data.x_test, data.y_test);
  return data;
}

/// One channel of trainable parameters: w = a + iv, read-out c, timescale.
struct ChannelParams {
  double delta = 0.1;
  Eigen::VectorXd a, v, c_re, c_im;

  Index state_size() const { return a.size(); }

  SsmModel to_model() const {
    SsmModel model;
    model.w.real = a;
    model.w.imag = v;
    model.c.resize(a.size());
    model.c.real() = c_re;
    model.c.imag() = c_im;
    model.delta = delta;
    return model;
  }
  static ChannelParams from_model(const SsmModel& model) {
    ChannelParams p;
    p.delta = model.delta;
    p.a = model.w.real;
    p.v = model.w.imag;
    p.c_re = model.c.real();
    p.c_im = model.c.imag();
    return p;
  }
};

struct TrainableModel {
  std::vector<ChannelParams> channels;

  Index dim() const { return static_cast<Index>(channels.size()); }
  Index state_size() const { return channels.at(0).state_size(); }

  static TrainableModel from_model(const SsmModel& model) {
    TrainableModel out;
    out.channels.push_back(ChannelParams::from_model(model));
    return out;
  }

  /// Fraction of Re(w) entries that are >= 0 across all channels.
  double re_nonneg_ratio() const {
    Index nonneg = 0, total = 0;
    for (const auto& ch : channels) {
      nonneg += (ch.a.array() >= 0.0).count();
      total += ch.a.size();
    }
    return double(nonneg) / double(total);
  }
};

/// Builds a d-channel model: shared InitSpec nodes, per-channel read-out
/// draws and per-channel timescales.
inline TrainableModel make_trainable(const InitSpec& spec, const Eigen::VectorXd& deltas) {
  TrainableModel model;
  for (Index c = 0; c < deltas.size(); ++c) {
    InitSpec chspec = spec;
    chspec.seed = mix_seed(spec.seed, std::uint64_t(c) * 2 + 1);
    ChannelParams p = ChannelParams::from_model(make_model(chspec, deltas[c]));
    model.channels.push_back(std::move(p));
  }
  return model;
}

struct ChannelGradients {
  double d_delta = 0.0;
  Eigen::VectorXd d_a, d_v, d_c_re, d_c_im;
};

struct Gradients {
  std::vector<ChannelGradients> channels;
  double loss = 0.0;
  bool finite = true;
};

namespace detail {

// Scratch space reused across channels and steps.
struct TrainWorkspace {
  RowMatrixXcd table;   // m x L: c_j f_j e^{dw_j k}
  RowMatrixXcd powers;  // m x L: e^{dw_j k}
  Eigen::VectorXd rho, g;
  Eigen::MatrixXd y;
};

inline void channel_kernel(const ChannelParams& p, Index length, TrainWorkspace& ws) {
  const Index m = p.state_size();
  ws.powers.resize(m, length);
  ws.table.resize(m, length);
  for (Index j = 0; j < m; ++j) {
    const Complex w(p.a[j], p.v[j]);
    fill_node_powers(p.delta * w, length, ws.powers.row(j).data());
    ws.table.row(j) = Complex(p.c_re[j], p.c_im[j]) * zoh_coefficient(w, p.delta) *
                      ws.powers.row(j);
  }
  ws.rho = ws.table.real().colwise().sum().transpose();
}

// Loss (sum of squared residuals, unnormalized) for one channel; fills ws.g
// with dLoss/drho if grad is requested.
inline double channel_residuals(const Eigen::VectorXd& rho, const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& labels, bool per_position,
                                bool want_grad, TrainWorkspace& ws) {
  const Index length = x.cols();
  if (!per_position) {
    const Eigen::VectorXd y = x.rowwise().reverse() * rho;
    const Eigen::VectorXd r = y - labels.col(0);
    if (want_grad) ws.g = 2.0 * (x.rowwise().reverse().transpose() * r);
    return r.squaredNorm();
  }
  causal_convolve(rho, x, ws.y);
  ws.y -= labels;
  if (want_grad) {
    ws.g.resize(length);
    for (Index k = 0; k < length; ++k) {
      ws.g[k] = 2.0 * ws.y.rightCols(length - k).cwiseProduct(x.leftCols(length - k)).sum();
    }
  }
  return ws.y.squaredNorm();
}

// Chain rule from dLoss/drho to the channel parameters:
//   rho_k = Re(c_j f_j lam_j^k),  f_j = (e^{dw_j}-1)/w_j,  lam_j = e^{dw_j};
//   P_j = sum_k g_k lam_j^k,  Q_j = sum_k g_k k lam_j^k,
//   dL/dc_j     = f_j P_j                     (conjugate split below)
//   dL/dw_j     = c_j (f'_j P_j + d f_j Q_j)
//   dL/ddelta   = sum_j Re(c_j (lam_j P_j + f_j w_j Q_j)).
inline void channel_chain(const ChannelParams& p, const TrainWorkspace& ws,
                          ChannelGradients& out) {
  const Index m = p.state_size();
  const Index length = ws.g.size();
  out.d_a.resize(m);
  out.d_v.resize(m);
  out.d_c_re.resize(m);
  out.d_c_im.resize(m);
  out.d_delta = 0.0;
  Eigen::VectorXd kg(length);
  for (Index k = 0; k < length; ++k) kg[k] = ws.g[k] * double(k);
  const Eigen::VectorXcd big_p = ws.powers * ws.g;
  const Eigen::VectorXcd big_q = ws.powers * kg;
  for (Index j = 0; j < m; ++j) {
    const Complex w(p.a[j], p.v[j]);
    const Complex c(p.c_re[j], p.c_im[j]);
    const Complex f = zoh_coefficient(w, p.delta);
    const Complex fp = p.delta * p.delta * ez_ratio_deriv(p.delta * w);
    const Complex lam = std::exp(p.delta * w);
    const Complex dc = f * big_p[j];
    out.d_c_re[j] = dc.real();
    out.d_c_im[j] = -dc.imag();
    const Complex dw = c * (fp * big_p[j] + p.delta * f * big_q[j]);
    out.d_a[j] = dw.real();
    out.d_v[j] = -dw.imag();
    out.d_delta += (c * (lam * big_p[j] + f * w * big_q[j])).real();
  }
}

} // namespace detail

/// Mean squared loss of the model on per-channel data (final-output or
/// per-position depending on the task).
inline double task_loss(const TrainableModel& model, const std::vector<Eigen::MatrixXd>& x,
                        const std::vector<Eigen::MatrixXd>& labels, bool per_position) {
  require(x.size() == model.channels.size() && labels.size() == x.size(),
          "task_loss: channel count mismatch");
  detail::TrainWorkspace ws;
  double total = 0.0;
  double count = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    detail::channel_kernel(model.channels[c], x[c].cols(), ws);
    total += detail::channel_residuals(ws.rho, x[c], labels[c], per_position, false, ws);
    count += double(x[c].rows()) * double(labels[c].cols());
  }
  return total / count;
}

/// Analytic gradients of the mean squared loss over all parameter groups.
inline Gradients gradients(const TrainableModel& model, const std::vector<Eigen::MatrixXd>& x,
                           const std::vector<Eigen::MatrixXd>& labels, bool per_position) {
  require(x.size() == model.channels.size() && labels.size() == x.size(),
          "gradients: channel count mismatch");
  detail::TrainWorkspace ws;
  Gradients out;
  out.channels.resize(model.channels.size());
  double total = 0.0;
  double count = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    count += double(x[c].rows()) * double(labels[c].cols());
  }
  for (std::size_t c = 0; c < x.size(); ++c) {
    detail::channel_kernel(model.channels[c], x[c].cols(), ws);
    total += detail::channel_residuals(ws.rho, x[c], labels[c], per_position, true, ws);
    ws.g /= count;  // d(mean)/drho
    detail::channel_chain(model.channels[c], ws, out.channels[c]);
    const auto& g = out.channels[c];
    if (!std::isfinite(g.d_delta) || !g.d_a.allFinite() || !g.d_v.allFinite() ||
        !g.d_c_re.allFinite() || !g.d_c_im.allFinite()) {
      out.finite = false;
    }
  }
  out.loss = total / count;
  if (!std::isfinite(out.loss)) out.finite = false;
  return out;
}

/// Convenience wrappers for the single-channel case.
inline Gradients gradients(const SsmModel& model, const Eigen::MatrixXd& x,
                           const Eigen::MatrixXd& labels, bool per_position = false) {
  return gradients(TrainableModel::from_model(model), {x}, {labels}, per_position);
}

struct TrainConfig {
  Index steps = 2000;
  double lr_state = 1e-3;   // delta, Re(w), Im(w)
  double lr_readout = 0.1;  // c
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  Index batch = 64;
  Index eval_interval = 100;
  std::uint64_t seed = 0;

  void validate() const {
    require(steps >= 0, "TrainConfig: steps must be >= 0");
    require(lr_state > 0.0 && lr_readout > 0.0, "TrainConfig: learning rates must be > 0");
    require(batch >= 1, "TrainConfig: batch must be >= 1");
    require(eval_interval >= 1, "TrainConfig: eval_interval must be >= 1");
  }
};

struct TrainReport {
  std::vector<Index> eval_steps;
  std::vector<double> loss_train, loss_test;
  Eigen::VectorXd kernel;  // channel-0 kernel after training
  double re_nonneg_ratio = 0.0;
  bool diverged = false;
};

namespace detail {

// Adam over one parameter array.
struct AdamState {
  Eigen::ArrayXd m1, m2;
  void init(Index n) {
    m1 = Eigen::ArrayXd::Zero(n);
    m2 = Eigen::ArrayXd::Zero(n);
  }
  void update(Eigen::Ref<Eigen::VectorXd> param, const Eigen::VectorXd& grad, double lr,
              const TrainConfig& cfg, Index t) {
    m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad.array();
    m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.array().square();
    const Eigen::ArrayXd mhat = m1 / (1.0 - std::pow(cfg.beta1, double(t)));
    const Eigen::ArrayXd vhat = m2 / (1.0 - std::pow(cfg.beta2, double(t)));
    param.array() -= lr * mhat / (vhat.sqrt() + cfg.epsilon);
  }
};

struct ChannelAdam {
  AdamState delta, a, v, c_re, c_im;
  void init(Index m) {
    delta.init(1);
    a.init(m);
    v.init(m);
    c_re.init(m);
    c_im.init(m);
  }
};

} // namespace detail

/// Adam training with separate state/read-out learning rates. Evaluates the
/// full train/test sets at step 0, every eval_interval steps and at the end.
/// Single-threaded and bitwise deterministic under the config seed.
inline TrainReport train(TrainableModel& model, const Task& task, const TrainConfig& config) {
  task.validate();
  config.validate();
  require(model.dim() == task.dim, "train: model/task channel count mismatch");
  const TaskData data = make_task_data(task);
  const bool per_position = task.per_position();

  TrainReport report;
  std::vector<detail::ChannelAdam> adam(model.channels.size());
  for (std::size_t c = 0; c < model.channels.size(); ++c) {
    adam[c].init(model.channels[c].state_size());
  }

  auto evaluate = [&](Index step) {
    report.eval_steps.push_back(step);
    report.loss_train.push_back(task_loss(model, data.x_train, data.y_train, per_position));
    report.loss_test.push_back(task_loss(model, data.x_test, data.y_test, per_position));
  };
  evaluate(0);

  auto rng = make_rng(mix_seed(config.seed, 0x626174ULL));
  std::uniform_int_distribution<Index> pick(0, task.n_train - 1);
  std::vector<Eigen::MatrixXd> bx(model.channels.size()), by(model.channels.size());

  for (Index step = 1; step <= config.steps && !report.diverged; ++step) {
    std::vector<Index> idx(config.batch);
    for (Index i = 0; i < config.batch; ++i) idx[i] = pick(rng);
    for (std::size_t c = 0; c < model.channels.size(); ++c) {
      bx[c].resize(config.batch, task.length);
      by[c].resize(config.batch, data.y_train[c].cols());
      for (Index i = 0; i < config.batch; ++i) {
        bx[c].row(i) = data.x_train[c].row(idx[i]);
        by[c].row(i) = data.y_train[c].row(idx[i]);
      }
    }

    const Gradients grads = gradients(model, bx, by, per_position);
    if (!grads.finite) {
      report.diverged = true;
      break;
    }
    for (std::size_t c = 0; c < model.channels.size(); ++c) {
      auto& p = model.channels[c];
      auto& g = grads.channels[c];
      Eigen::VectorXd dd(1);
      dd[0] = g.d_delta;
      Eigen::Map<Eigen::VectorXd> delta_view(&p.delta, 1);
      adam[c].delta.update(delta_view, dd, config.lr_state, config, step);
      adam[c].a.update(p.a, g.d_a, config.lr_state, config, step);
      adam[c].v.update(p.v, g.d_v, config.lr_state, config, step);
      adam[c].c_re.update(p.c_re, g.d_c_re, config.lr_readout, config, step);
      adam[c].c_im.update(p.c_im, g.d_c_im, config.lr_readout, config, step);
    }
    if (step % config.eval_interval == 0 || step == config.steps) evaluate(step);
  }

  detail::TrainWorkspace ws;
  detail::channel_kernel(model.channels[0], task.length, ws);
  report.kernel = ws.rho;
  report.re_nonneg_ratio = model.re_nonneg_ratio();
  return report;
}

inline TrainReport train(SsmModel& model, const Task& task, const TrainConfig& config) {
  TrainableModel trainable = TrainableModel::from_model(model);
  TrainReport report = train(trainable, task, config);
  model = trainable.channels[0].to_model();
  return report;
}

} // namespace ssmlab
