#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ssmlab/recovery.hpp"
#include "ssmlab/trainer.hpp"

using namespace ssmlab;
using Catch::Approx;

namespace {

TrainableModel random_trainable(std::uint64_t seed, Index channels, Index m, double delta) {
  InitSpec spec;
  spec.m = m;
  spec.seed = seed;
  return make_trainable(spec, Eigen::VectorXd::Constant(channels, delta));
}

// Central finite differences of the task loss over every parameter group.
double max_group_rel_error(TrainableModel model, const std::vector<Eigen::MatrixXd>& x,
                           const std::vector<Eigen::MatrixXd>& y, bool per_position, double h) {
  const Gradients g = gradients(model, x, y, per_position);
  double worst = 0.0;
  auto check = [&](double* param, double analytic) {
    const double keep = *param;
    *param = keep + h;
    const double up = task_loss(model, x, y, per_position);
    *param = keep - h;
    const double down = task_loss(model, x, y, per_position);
    *param = keep;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic) / scale);
  };
  for (std::size_t c = 0; c < model.channels.size(); ++c) {
    auto& p = model.channels[c];
    const auto& gc = g.channels[c];
    check(&p.delta, gc.d_delta);
    for (Index j = 0; j < p.state_size(); ++j) {
      check(&p.a[j], gc.d_a[j]);
      check(&p.v[j], gc.d_v[j]);
      check(&p.c_re[j], gc.d_c_re[j]);
      check(&p.c_im[j], gc.d_c_im[j]);
    }
  }
  return worst;
}

} // namespace

TEST_CASE("task targets", "[trainer]") {
  Task shift = Task::shift(4);
  shift.n_train = 3;
  shift.n_test = 2;
  const TaskData data = make_task_data(shift);
  // Shift target rho* = (0,0,0,1): y*_L = x_0.
  for (Index i = 0; i < 3; ++i) {
    REQUIRE(data.y_train[0](i, 0) == Approx(data.x_train[0](i, 0)));
  }

  Task fl = Task::first_last(4);
  fl.n_train = 3;
  const TaskData fdata = make_task_data(fl);
  for (Index i = 0; i < 3; ++i) {
    REQUIRE(fdata.y_train[0](i, 0) == Approx(fdata.x_train[0](i, 0) + fdata.x_train[0](i, 3)));
  }

  Task copy = Task::copying(8, 2, 3);
  copy.n_train = 4;
  const TaskData cdata = make_task_data(copy);
  REQUIRE(cdata.x_train.size() == 2);
  for (Index c = 0; c < 2; ++c) {
    for (Index i = 0; i < 4; ++i) {
      for (Index t = 0; t < 8; ++t) {
        const double expected = t >= 3 ? cdata.x_train[c](i, t - 3) : 0.0;
        REQUIRE(cdata.y_train[c](i, t) == Approx(expected).margin(1e-15));
      }
    }
  }

  // Same seed, same data.
  const TaskData again = make_task_data(copy);
  REQUIRE(again.x_train[1] == cdata.x_train[1]);
}

TEST_CASE("zero residual batches give zero gradients", "[trainer]") {
  TrainableModel model = random_trainable(1, 1, 3, 0.2);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(4, 16);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 16; ++j) x(i, j) = normal(rng);

  detail::TrainWorkspace ws;
  detail::channel_kernel(model.channels[0], 16, ws);
  const Eigen::MatrixXd labels = x.rowwise().reverse() * ws.rho;
  const Gradients g = gradients(model, {x}, {labels}, false);
  REQUIRE(g.loss == Approx(0.0).margin(1e-20));
  REQUIRE(std::abs(g.channels[0].d_delta) < 1e-14);
  REQUIRE(g.channels[0].d_a.cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(g.channels[0].d_c_re.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic gradients match finite differences", "[trainer]") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Single-sample m = 1 case at tight tolerance.
  {
    TrainableModel model = random_trainable(7, 1, 1, 0.3);
    Eigen::MatrixXd x(1, 12), y(1, 1);
    for (Index j = 0; j < 12; ++j) x(0, j) = normal(rng);
    y(0, 0) = normal(rng);
    REQUIRE(max_group_rel_error(model, {x}, {y}, false, 1e-5) < 1e-6);
  }

  // 50 random configurations across both loss modes.
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 1 + trial % 4;
    const Index length = 8 + 4 * (trial % 5);
    const Index batch = 1 + trial % 3;
    const bool per_position = trial % 2 == 1;
    TrainableModel model = random_trainable(100 + trial, 1, m, 0.05 + 0.1 * (trial % 4));
    // Random perturbation so real parts and read-outs are generic.
    for (auto& ch : model.channels) {
      for (Index j = 0; j < m; ++j) {
        ch.a[j] = -std::abs(normal(rng));
        ch.v[j] += 0.3 * normal(rng);
      }
    }
    Eigen::MatrixXd x(batch, length);
    for (Index i = 0; i < batch; ++i)
      for (Index j = 0; j < length; ++j) x(i, j) = normal(rng);
    Eigen::MatrixXd y(batch, per_position ? length : 1);
    for (Index i = 0; i < y.rows(); ++i)
      for (Index j = 0; j < y.cols(); ++j) y(i, j) = normal(rng);
    REQUIRE(max_group_rel_error(model, {x}, {y}, per_position, 1e-5) < 1e-5);
  }
}

TEST_CASE("delta gradient stays finite near zero", "[trainer]") {
  TrainableModel model = random_trainable(5, 1, 2, 1e-7);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(2, 10), y(2, 1);
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 10; ++j) x(i, j) = normal(rng);
    y(i, 0) = normal(rng);
  }
  const Gradients g = gradients(model, {x}, {y}, false);
  REQUIRE(std::isfinite(g.channels[0].d_delta));
  // Finite-difference the timescale alone: the other groups' gradients scale
  // as delta^2 here and sit below central-difference noise.
  const double h = 5e-8;
  auto& p = model.channels[0];
  p.delta += h;
  const double up = task_loss(model, {x}, {y}, false);
  p.delta -= 2.0 * h;
  const double down = task_loss(model, {x}, {y}, false);
  p.delta += h;
  const double fd = (up - down) / (2.0 * h);
  REQUIRE(g.channels[0].d_delta == Approx(fd).epsilon(1e-4));
}

TEST_CASE("steps 0 reports initialization diagnostics", "[trainer]") {
  TrainableModel model = random_trainable(9, 1, 4, 0.1);
  Task task = Task::shift(32);
  task.n_train = 64;
  task.n_test = 64;
  TrainConfig config;
  config.steps = 0;
  const TrainReport report = train(model, task, config);
  REQUIRE(report.eval_steps.size() == 1);
  REQUIRE(report.eval_steps[0] == 0);
  REQUIRE(report.loss_train.size() == 1);
  REQUIRE(report.kernel.size() == 32);
  // Kernel in the report is the (unchanged) initialization kernel.
  const DiscreteKernel k = zoh_kernel(model.channels[0].to_model(), 32);
  REQUIRE((report.kernel - k.values).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("training is deterministic under the seed", "[trainer]") {
  Task task = Task::shift(32);
  task.n_train = 128;
  task.n_test = 64;
  task.seed = 4;
  TrainConfig config;
  config.steps = 60;
  config.batch = 16;
  config.eval_interval = 20;
  config.seed = 11;
  TrainableModel m1 = random_trainable(21, 1, 4, 0.1);
  TrainableModel m2 = random_trainable(21, 1, 4, 0.1);
  const TrainReport r1 = train(m1, task, config);
  const TrainReport r2 = train(m2, task, config);
  REQUIRE(r1.loss_train == r2.loss_train);
  REQUIRE(r1.loss_test == r2.loss_test);
  REQUIRE(r1.kernel == r2.kernel);
}

TEST_CASE("train loss matches the kernel-distance identity on iid data", "[trainer]") {
  // On iid inputs E[(y_L - y*_L)^2] = ||rho~ - rho*||^2; the train-set loss
  // is its Monte Carlo estimate over n_train draws.
  Task task = Task::shift(48);
  task.n_train = 2000;
  task.n_test = 100;
  task.seed = 8;
  TrainConfig config;
  config.steps = 40;
  config.batch = 32;
  config.eval_interval = 40;
  config.seed = 3;
  TrainableModel model = random_trainable(31, 1, 4, 1.0 / std::sqrt(48.0));
  const TrainReport report = train(model, task, config);

  const DiscreteKernel final_kernel = zoh_kernel(model.channels[0].to_model(), 48);
  const double identity_value = expected_mse(final_kernel, task.target_kernel());
  // Var((y-y*)^2) = 2 ||rho~ - rho*||^4 for Gaussian errors.
  const double sigma = identity_value * std::sqrt(2.0 / double(task.n_train));
  REQUIRE(std::abs(report.loss_train.back() - identity_value) <= 3.0 * sigma);
}

TEST_CASE("divergence is flagged, not clipped", "[trainer]") {
  TrainableModel model = random_trainable(41, 1, 4, 0.1);
  Task task = Task::shift(32);
  task.n_train = 64;
  task.n_test = 32;
  TrainConfig config;
  config.steps = 400;
  config.lr_state = 1e9;  // deliberately unstable
  config.lr_readout = 1e9;
  const TrainReport report = train(model, task, config);
  REQUIRE(report.diverged);
}

TEST_CASE("re_nonneg_ratio counts nonnegative real parts", "[trainer]") {
  TrainableModel model = random_trainable(51, 2, 4, 0.1);
  model.channels[0].a << -1.0, 0.0, 0.5, -0.2;
  model.channels[1].a << -1.0, -2.0, -3.0, 4.0;
  REQUIRE(model.re_nonneg_ratio() == Approx(3.0 / 8.0));
}
