#include "bayes/smc.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "bayes/error.hpp"
#include "bayes/kalman.hpp"

namespace bayes {
namespace {

double normal_pdf(double x, double var) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

Vector random_weights(std::size_t n, RngStream& rng) {
  Vector w(static_cast<Eigen::Index>(n));
  for (auto& v : w) v = std::pow(rng.uniform(), 3.0);
  return w / w.sum();
}

std::vector<Vector> scalar_states(std::size_t n) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Vector::Constant(1, static_cast<double>(i)));
  return out;
}

TEST(McIntegrateTest, ConstantIntegrandIsExact) {
  RngStream rng{1};
  const auto est = smc::mc_integrate([](double) { return 1.0; }, [](RngStream& r) { return r.normal(); }, 100, rng);
  EXPECT_EQ(est.estimate, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(McIntegrateTest, SecondMomentOfStandardNormal) {
  RngStream rng{2};
  const auto est =
      smc::mc_integrate([](double x) { return x * x; }, [](RngStream& r) { return r.normal(); }, 1000000, rng);
  EXPECT_NEAR(est.estimate, 1.0, 0.01);
  EXPECT_NEAR(est.std_error, std::sqrt(2.0 / 1e6), 1e-4);
}

TEST(McIntegrateTest, Deterministic) {
  RngStream a{5}, b{5};
  auto f = [](double x) { return x; };
  auto s = [](RngStream& r) { return r.uniform(-1.0, 1.0); };
  EXPECT_EQ(smc::mc_integrate(f, s, 1000, a).estimate, smc::mc_integrate(f, s, 1000, b).estimate);
}

TEST(McIntegrateTest, RejectsTooFewSamples) {
  RngStream rng{1};
  EXPECT_THROW(smc::mc_integrate([](double) { return 1.0; }, [](RngStream& r) { return r.normal(); }, 1, rng),
               InvalidArgument);
}

TEST(ImportanceTest, WideProposalRecoversSecondMoment) {
  RngStream rng{3};
  const double est = smc::importance_estimate(
      [](double x) { return x * x; }, [](double x) { return std::exp(-0.5 * x * x); },
      [](RngStream& r) { return 2.0 * r.normal(); }, [](double x) { return normal_pdf(x, 4.0); }, 1000000, rng);
  EXPECT_NEAR(est, 1.0, 0.02);
}

TEST(ImportanceTest, ProposalEqualToTargetMatchesPlainMonteCarlo) {
  RngStream a{4}, b{4};
  auto f = [](double x) { return std::cos(x); };
  const double is = smc::importance_estimate(
      f, [](double x) { return normal_pdf(x, 1.0); }, [](RngStream& r) { return r.normal(); },
      [](double x) { return normal_pdf(x, 1.0); }, 20000, a);
  const auto mc = smc::mc_integrate(f, [](RngStream& r) { return r.normal(); }, 20000, b);
  EXPECT_NEAR(is, mc.estimate, 1e-12);
  EXPECT_NEAR(is, std::exp(-0.5), 4.0 * mc.std_error);
}

TEST(ImportanceTest, DisjointSupportThrows) {
  RngStream rng{5};
  EXPECT_THROW(smc::importance_estimate([](double x) { return x; }, [](double x) { return x > 100.0 ? 1.0 : 0.0; },
                                        [](RngStream& r) { return r.uniform(); }, [](double) { return 1.0; }, 100,
                                        rng),
               ZeroTotalWeight);
}

TEST(EssTest, KnownValues) {
  EXPECT_NEAR(smc::ess(Vector::Constant(500, 1.0 / 500)), 500.0, 1e-9);
  Vector degenerate = Vector::Zero(10);
  degenerate[3] = 1.0;
  EXPECT_DOUBLE_EQ(smc::ess(degenerate), 1.0);
  EXPECT_NEAR(smc::ess((Vector(3) << 0.5, 0.25, 0.25).finished()), 1.0 / 0.375, 1e-12);
}

TEST(EssTest, BoundsOnRandomWeights) {
  RngStream rng{6};
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 300);
    const double e = smc::ess(random_weights(n, rng));
    EXPECT_GE(e, 1.0 - 1e-12);
    EXPECT_LE(e, static_cast<double>(n) + 1e-9);
  }
}

TEST(SystematicTest, HandTraceWithFixedStart) {
  const auto idx = smc::systematic_indices((Vector(2) << 0.5, 0.5).finished(), 0.25);
  EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1}));
}

TEST(SystematicTest, DegenerateWeightCopiesOneParticle) {
  Vector w = Vector::Zero(6);
  w[4] = 1.0;
  RngStream rng{7};
  const auto out = smc::systematic_resample(smc::ParticleSet(scalar_states(6), w), rng);
  for (const auto& x : out.states()) EXPECT_EQ(x[0], 4.0);
  EXPECT_TRUE(out.weights().isApprox(Vector::Constant(6, 1.0 / 6)));
}

TEST(SystematicTest, UniformWeightsCopyEachOnce) {
  RngStream rng{8};
  const Vector w = Vector::Constant(7, 1.0 / 7);
  for (int t = 0; t < 50; ++t) {
    const auto idx = smc::systematic_indices(w, rng.uniform() / 7.0);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(idx[i], i);
  }
}

TEST(SystematicTest, OffspringCountsAreFloorOrCeil) {
  RngStream rng{9};
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 200);
    const Vector w = random_weights(n, rng);
    smc::ParticleSet p(scalar_states(n), w);
    const auto out = smc::systematic_resample(p, rng);
    std::vector<int> counts(n, 0);
    for (const auto& x : out.states()) ++counts[static_cast<std::size_t>(x[0])];
    for (std::size_t i = 0; i < n; ++i) {
      const double nw = static_cast<double>(n) * w[static_cast<Eigen::Index>(i)];
      EXPECT_GE(counts[i], std::floor(nw - 1e-9));
      EXPECT_LE(counts[i], std::ceil(nw + 1e-9));
    }
    EXPECT_NEAR(out.weights().sum(), 1.0, 1e-9);
  }
}

TEST(ParticleSetTest, RejectsUnnormalizedWeights) {
  EXPECT_THROW(smc::ParticleSet(scalar_states(2), (Vector(2) << 0.5, 0.6).finished()), InvalidArgument);
  EXPECT_THROW(smc::ParticleSet(scalar_states(2), (Vector(2) << 1.5, -0.5).finished()), InvalidArgument);
}

NonlinearSSM linear_1d(double f, double q, double r, double m0, double p0) {
  return as_nonlinear(LinearGaussianSSM{Matrix::Constant(1, 1, f), Matrix::Identity(1, 1), Matrix::Constant(1, 1, q),
                                        Matrix::Constant(1, 1, r), Gaussian::scalar(m0, p0)});
}

TEST(SisStepTest, FlatLikelihoodKeepsWeights) {
  const auto model = linear_1d(1.0, 1.0, 1e300, 0.0, 1.0);
  RngStream rng{10};
  const Vector w = random_weights(50, rng);
  const auto out = smc::sis_step(smc::ParticleSet(scalar_states(50), w), Vector::Constant(1, 3.0), model,
                                 smc::ProposalKind::Bootstrap, 1, rng);
  EXPECT_LT((out.weights() - w).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SisStepTest, SingleParticleKeepsUnitWeight) {
  const auto model = ungm_model(10.0, 1.0, Gaussian::scalar(0.0, 1.0));
  RngStream rng{11};
  smc::ParticleSet p = smc::ParticleSet::uniform(scalar_states(1));
  for (int k = 1; k <= 5; ++k) {
    p = smc::sis_step(p, Vector::Constant(1, 40.0), model, smc::ProposalKind::Bootstrap, k, rng);
    EXPECT_EQ(p.weights()[0], 1.0);
  }
}

TEST(SisStepTest, TracksKalmanOnLinearModel) {
  const double f = 0.9, q = 1.0, r = 0.5;
  const LinearGaussianSSM lin{Matrix::Constant(1, 1, f), Matrix::Identity(1, 1), Matrix::Constant(1, 1, q),
                              Matrix::Constant(1, 1, r), Gaussian::scalar(0.0, 1.0)};
  RngStream rng{12};
  const Trajectory traj = simulate(lin, 15, rng);
  const auto kf = kalman::filter_sequence(lin, traj.observations);
  const NonlinearSSM model = as_nonlinear(lin);
  const std::size_t n = 5000;
  smc::ParticleSet p = smc::ParticleSet::uniform(mvn_sample(lin.initial(), rng, n));
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    p = smc::sis_step(p, traj.observations[k], model, smc::ProposalKind::Bootstrap, static_cast<int>(k) + 1, rng);
    const double neff = smc::ess(p);
    const double sd = std::sqrt(kf[k].posterior.cov()(0, 0));
    EXPECT_LT(std::abs(p.weighted_mean()[0] - kf[k].posterior.mean()[0]), 3.0 * sd / std::sqrt(neff)) << k;
    if (neff < 0.5 * static_cast<double>(n)) p = smc::systematic_resample(p, rng);
  }
}

TEST(ParticleFilterTest, UngmRunsAndResamples) {
  const auto model = ungm_model(10.0, 1.0, Gaussian::scalar(0.1, 1.0));
  RngStream rng{13};
  const Trajectory traj = simulate(model, 50, rng);
  const auto run = smc::particle_filter(model, traj.observations, 500, 0.25, rng);
  ASSERT_EQ(run.steps.size(), 50u);
  EXPECT_GE(run.resample_count(), 1u);
  EXPECT_TRUE(std::isfinite(smc::rmse(traj, run.means())));
  for (const auto& s : run.steps) {
    EXPECT_GE(s.ess, 1.0 - 1e-9);
    EXPECT_LE(s.ess, 500.0 + 1e-9);
    EXPECT_NEAR(s.particles.weights().sum(), 1.0, 1e-9);
  }
}

TEST(ParticleFilterTest, PureSisDegenerates) {
  const auto model = ungm_model(10.0, 1.0, Gaussian::scalar(0.1, 1.0));
  RngStream rng{14};
  const Trajectory traj = simulate(model, 50, rng);
  const auto run = smc::particle_filter(model, traj.observations, 500, 0.0, rng);
  EXPECT_EQ(run.resample_count(), 0u);
  EXPECT_LT(run.steps.back().ess, 50.0);
}

TEST(ParticleFilterTest, DeterministicForSeed) {
  const auto model = ungm_model(10.0, 1.0, Gaussian::scalar(0.1, 1.0));
  RngStream sim{15};
  const Trajectory traj = simulate(model, 20, sim);
  RngStream a{16}, b{16};
  const auto ra = smc::particle_filter(model, traj.observations, 200, 0.25, a);
  const auto rb = smc::particle_filter(model, traj.observations, 200, 0.25, b);
  for (std::size_t k = 0; k < ra.steps.size(); ++k) {
    EXPECT_EQ(ra.steps[k].mean[0], rb.steps[k].mean[0]);
    for (std::size_t i = 0; i < 200; ++i)
      EXPECT_EQ(ra.steps[k].particles.states()[i][0], rb.steps[k].particles.states()[i][0]);
  }
}

TEST(ParticleFilterTest, PreconditionsAreChecked) {
  EXPECT_THROW(ungm_model(0.0, 0.0, Gaussian::scalar(0.1, 1.0)), InvalidArgument);
  const auto model = ungm_model(10.0, 1.0, Gaussian::scalar(0.1, 1.0));
  RngStream rng{1};
  const std::vector<Vector> zs(3, Vector::Zero(1));
  EXPECT_THROW(smc::particle_filter(model, zs, 1, 0.25, rng), InvalidArgument);
  EXPECT_THROW(smc::particle_filter(model, zs, 10, 1.5, rng), InvalidArgument);
}

}  // namespace
}  // namespace bayes
