#include "bayes/gp_pf.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "bayes/error.hpp"
#include "bayes/kalman.hpp"
#include "bayes/scenarios.hpp"

namespace bayes {
namespace {

gp::TrainConfig quick_config(int iters = 300) {
  gp::TrainConfig cfg;
  cfg.max_iters = iters;
  cfg.grad_tol = 1e-4;
  cfg.step_init = 0.01;
  return cfg;
}

ObservationFn identity_obs() {
  return [](const Vector& x) { return x; };
}

double ungm_autonomous(double x) { return 0.5 * x + 25.0 * x / (1.0 + x * x); }

TEST(LearnDynamicsTest, NoiseFreeLinearMapIsInterpolated) {
  std::vector<gp_pf::DynamicsPair> pairs;
  for (int i = -5; i <= 5; ++i) pairs.push_back({static_cast<double>(i), 0.9 * i});
  gp_pf::LearnOptions opts;
  opts.noise_var_init = 0.0;
  const auto post =
      gp_pf::learn_dynamics(pairs, gp::KernelSpec::squared_exponential(2.0, 2.0), quick_config(), opts);
  EXPECT_EQ(post.prior().noise_var(), 0.0);
  EXPECT_EQ(post.chol().jitter(), 0.0);
  for (const auto& p : pairs) {
    double m = 0.0, v = 0.0;
    post.predict_point(gp::scalar_input(p.prev), m, v);
    EXPECT_NEAR(m, 0.9 * p.prev, 1e-6);
  }
}

TEST(LearnDynamicsTest, UngmAutonomousPartHeldOut) {
  RngStream rng{3};
  std::vector<gp_pf::DynamicsPair> pairs;
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-20.0, 20.0);
    pairs.push_back({x, ungm_autonomous(x)});
  }
  const auto post = gp_pf::learn_dynamics(pairs, gp::KernelSpec::squared_exponential(10.0, 2.0), quick_config());
  double lo = INFINITY, hi = -INFINITY, se = 0.0;
  const int held = 400;
  for (int i = 0; i < held; ++i) {
    const double x = rng.uniform(-20.0, 20.0);
    const double y = ungm_autonomous(x);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
    double m = 0.0, v = 0.0;
    post.predict_point(gp::scalar_input(x), m, v);
    se += (m - y) * (m - y);
  }
  EXPECT_LT(std::sqrt(se / held), 0.05 * (hi - lo));
}

TEST(LearnDynamicsTest, SingleDistinctPairRejected) {
  const std::vector<gp_pf::DynamicsPair> pairs(4, gp_pf::DynamicsPair{1.0, 2.0});
  EXPECT_THROW(gp_pf::learn_dynamics(pairs, gp::KernelSpec::squared_exponential(1.0, 1.0), quick_config()),
               InvalidArgument);
}

TEST(GpParticleFilterTest, TracksKalmanWithLearnedLinearDynamics) {
  const double f = 0.9, q = 0.5, r = 0.4;
  const LinearGaussianSSM lin{Matrix::Constant(1, 1, f), Matrix::Identity(1, 1), Matrix::Constant(1, 1, q),
                              Matrix::Constant(1, 1, r), Gaussian::scalar(0.0, 1.0)};
  RngStream rng{5};
  std::vector<gp_pf::DynamicsPair> pairs;
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-5.0, 5.0);
    pairs.push_back({x, f * x + std::sqrt(q) * rng.normal()});
  }
  gp_pf::LearnOptions opts;
  opts.noise_var_init = 0.3;
  const auto post = gp_pf::learn_dynamics(pairs, gp::KernelSpec::squared_exponential(2.0, 3.0), quick_config(), opts);
  const gp_pf::GpDynamicsModel model{post, identity_obs(), r, lin.initial()};

  const Trajectory traj = simulate(lin, 30, rng);
  const auto kf = kalman::filter_sequence(lin, traj.observations);
  const auto run = gp_pf::gp_particle_filter(model, traj.observations, 2000, 0.5, rng);
  double avg = 0.0;
  for (std::size_t k = 0; k < 30; ++k) {
    avg += std::abs(run.steps[k].mean[0] - kf[k].posterior.mean()[0]) / std::sqrt(kf[k].posterior.cov()(0, 0));
  }
  EXPECT_LT(avg / 30.0, 5.0);
}

TEST(GpParticleFilterTest, IdentityDynamicsFreezeParticles) {
  std::vector<gp_pf::DynamicsPair> pairs;
  for (int i = 0; i <= 40; ++i) {
    const double x = -2.0 + 0.1 * i;
    pairs.push_back({x, x});
  }
  gp_pf::LearnOptions opts;
  opts.noise_var_init = 0.0;
  const auto post = gp_pf::learn_dynamics(pairs, gp::KernelSpec::squared_exponential(1.0, 1.0), quick_config(), opts);
  const gp_pf::GpDynamicsModel model{post, identity_obs(), 1e12, Gaussian::scalar(0.0, 0.25)};
  const std::vector<Vector> zs(10, Vector::Zero(1));
  RngStream rng{6};
  const auto run = gp_pf::gp_particle_filter(model, zs, 500, 0.25, rng);
  for (const auto& s : run.steps) EXPECT_GT(s.ess, 0.99 * 500);
  EXPECT_EQ(run.resample_count(), 0u);
  double max_move = 0.0;
  for (std::size_t i = 0; i < 500; ++i) {
    max_move = std::max(max_move, std::abs(run.steps[9].particles.states()[i][0] -
                                           run.steps[0].particles.states()[i][0]));
  }
  EXPECT_LT(max_move, 0.05);
}

TEST(GpParticleFilterTest, BitIdenticalToParametricFilter) {
  const double c = 1.25, q = 0.7, r = 0.3;
  const NonlinearSSM parametric{[c](const Vector&, int) { return Vector::Constant(1, c); }, identity_obs(),
                                Vector::Constant(1, q), Vector::Constant(1, r), Gaussian::scalar(0.0, 1.0)};
  const gp::GpPrior prior{gp::MeanFunction::constant(c), gp::KernelSpec::squared_exponential(1e-200, 1.0), q};
  const std::vector<gp::Input> xs{gp::scalar_input(-1.0), gp::scalar_input(2.0)};
  const auto post = gp::condition(prior, xs, (Vector(2) << 0.3, 4.0).finished());
  const gp_pf::GpDynamicsModel model{post, identity_obs(), r, parametric.initial()};

  RngStream sim{7};
  const Trajectory traj = simulate(parametric, 25, sim);
  RngStream a{8}, b{8};
  const auto ref = smc::particle_filter(parametric, traj.observations, 300, 0.5, a);
  const auto got = gp_pf::gp_particle_filter(model, traj.observations, 300, 0.5, b);
  ASSERT_EQ(ref.steps.size(), got.steps.size());
  for (std::size_t k = 0; k < ref.steps.size(); ++k) {
    ASSERT_EQ(ref.steps[k].mean[0], got.steps[k].mean[0]) << k;
    ASSERT_EQ(ref.steps[k].ess, got.steps[k].ess) << k;
    ASSERT_EQ(ref.steps[k].resampled, got.steps[k].resampled) << k;
    for (std::size_t i = 0; i < 300; ++i) {
      ASSERT_EQ(ref.steps[k].particles.states()[i][0], got.steps[k].particles.states()[i][0]);
      ASSERT_EQ(ref.steps[k].particles.weights()[static_cast<Eigen::Index>(i)],
                got.steps[k].particles.weights()[static_cast<Eigen::Index>(i)]);
    }
  }
}

TEST(GpParticleFilterTest, UngmLearnedWithinTwiceKnown) {
  scenarios::ScenarioConfig cfg;
  cfg.scenario = "gp-pf-demo";
  cfg.seed = 1;
  cfg.output_dir = (std::filesystem::temp_directory_path() / "gp_pf_test_ungm").string();
  std::filesystem::create_directories(cfg.output_dir);
  const auto m = scenarios::run(cfg);
  EXPECT_LE(m.number("rmse_ratio"), 2.0);
  std::filesystem::remove_all(cfg.output_dir);
}

TEST(GpDynamicsModelTest, InvariantsEnforced) {
  const gp::GpPrior prior{gp::MeanFunction::zero(), gp::KernelSpec::squared_exponential(1.0, 1.0), 0.1};
  const auto one = gp::condition(prior, {gp::scalar_input(0.0)}, Vector::Zero(1));
  EXPECT_THROW(gp_pf::GpDynamicsModel(one, identity_obs(), 1.0, Gaussian::scalar(0.0, 1.0)), InvalidArgument);
  const auto two = gp::condition(prior, {gp::scalar_input(0.0), gp::scalar_input(1.0)}, Vector::Zero(2));
  EXPECT_THROW(gp_pf::GpDynamicsModel(two, identity_obs(), 0.0, Gaussian::scalar(0.0, 1.0)), InvalidArgument);
  EXPECT_THROW(gp_pf::GpDynamicsModel(two, identity_obs(), 1.0, Gaussian{Vector::Zero(2), Matrix::Identity(2, 2)}),
               InvalidArgument);
  EXPECT_THROW(gp_pf::GpDynamicsModel(two, identity_obs(), 1.0, Gaussian::scalar(0.0, 1.0), {}, true),
               InvalidArgument);
}

TEST(GpDynamicsModelTest, DriveAndTimeInput) {
  const gp::GpPrior prior{gp::MeanFunction::zero(), gp::KernelSpec::squared_exponential(1.0, 1.0), 0.1};
  const auto post = gp::condition(prior, {gp::scalar_input(0.0), gp::scalar_input(1.0)}, Vector::Ones(2));
  const gp_pf::GpDynamicsModel plain{post, identity_obs(), 1.0, Gaussian::scalar(0.0, 1.0)};
  const gp_pf::GpDynamicsModel driven{post, identity_obs(), 1.0, Gaussian::scalar(0.0, 1.0),
                                      [](int k) { return 10.0 * k; }};
  const auto a = plain.transition(Vector::Constant(1, 0.5), 3);
  const auto b = driven.transition(Vector::Constant(1, 0.5), 3);
  EXPECT_DOUBLE_EQ(b.mean[0], a.mean[0] + 30.0);
  EXPECT_DOUBLE_EQ(b.var[0], a.var[0]);

  std::vector<gp_pf::DynamicsPair> pairs;
  for (int k = 1; k <= 20; ++k) pairs.push_back({0.1 * k, 0.1 * k + std::cos(1.2 * (k - 1)), k});
  gp_pf::LearnOptions opts;
  opts.time_input = true;
  const auto timed = gp_pf::learn_dynamics(pairs, gp::KernelSpec::squared_exponential(1.0, 1.0), quick_config(), opts);
  EXPECT_EQ(timed.train_x().front().size(), 2);
  const gp_pf::GpDynamicsModel tm{timed, identity_obs(), 1.0, Gaussian::scalar(0.0, 1.0), {}, true};
  EXPECT_TRUE(std::isfinite(tm.transition(Vector::Constant(1, 0.3), 3).mean[0]));
}

TEST(PairsTest, FromTrajectorySubtractsDrive) {
  Trajectory traj;
  for (double v : {1.0, 2.0, 4.0}) traj.states.push_back(Vector::Constant(1, v));
  traj.observations.resize(2, Vector::Zero(1));
  const auto pairs = gp_pf::pairs_from_trajectory(traj, [](int k) { return static_cast<double>(k); });
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].prev, 1.0);
  EXPECT_EQ(pairs[0].next, 1.0);
  EXPECT_EQ(pairs[0].step, 1);
  EXPECT_EQ(pairs[1].next, 2.0);
}

TEST(PairsTest, CsvRoundTrip) {
  const std::vector<gp_pf::DynamicsPair> pairs{{0.5, 1.5, 1}, {-2.25, 3.0, 2}};
  const auto path = std::filesystem::temp_directory_path() / "gp_pf_pairs_roundtrip.csv";
  {
    std::ofstream out(path);
    gp_pf::write_pairs_csv(out, pairs);
  }
  const auto back = gp_pf::read_pairs_csv(path.string());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].prev, -2.25);
  EXPECT_EQ(back[1].next, 3.0);
  EXPECT_EQ(back[1].step, 2);
  std::filesystem::remove(path);
  EXPECT_THROW(gp_pf::read_pairs_csv(path.string()), IoError);
}

}  // namespace
}  // namespace bayes
