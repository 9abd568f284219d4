#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "maxstorm/errors.hpp"
#include "maxstorm/spacetime_markov.hpp"
#include "test_support.hpp"

using namespace maxstorm;
using namespace maxstorm::testing;

namespace {

const Eigen::Vector2d kTau(-1.0, -1.0);
const SmithParams kSigma(1, 0, 1);
const MarkovParams kMarkov(0.7, kTau);

}  // namespace

TEST(MarkovParamsTest, RejectsOutOfRangeA) {
  EXPECT_THROW(MarkovParams(0.0, kTau), ValidationError);
  EXPECT_THROW(MarkovParams(1.0, kTau), ValidationError);
  EXPECT_THROW(MarkovParams(-0.2, kTau), ValidationError);
  EXPECT_NO_THROW(MarkovParams(0.5, kTau));
  EXPECT_NEAR(kMarkov.decay(2.5), std::pow(0.7, 2.5), 1e-15);
}

TEST(TemporalKernel, Modes) {
  const auto e = TemporalKernelParams::exponential_rate(0.5);
  EXPECT_NEAR(e.a(), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(e.weight(2.0), 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(e.weight(-1.0), 0.0);
  const auto g = TemporalKernelParams::geometric(0.7);
  EXPECT_DOUBLE_EQ(g.a(), 0.7);
  double total = 0.0;
  for (int t = 0; t < 200; ++t) total += g.weight(t);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_THROW((void)TemporalKernelParams::geometric(1.0), ValidationError);
  EXPECT_THROW((void)TemporalKernelParams::exponential_rate(0.0), ValidationError);
}

TEST(MarkovPlanar, LagOneAlongDriftGivesTwoMinusA) {
  const std::vector<PlanarSite> grid{PlanarSite(0, 0), translate(PlanarSite(0, 0), -1.0, kTau)};
  std::vector<double> x0, x1;
  for (int r = 0; r < 3000; ++r) {
    SeededStream s(41, r);
    const auto sim = simulate_markov_planar(grid, 2, kSigma, kMarkov, s);
    x0.push_back(sim.field.at(0, 0));
    x1.push_back(sim.field.at(1, 1));
  }
  EXPECT_NEAR(theta_from_pairs(x0, x1), 1.3, 0.05);
}

TEST(MarkovPlanar, RecursionArithmeticIsExact) {
  const std::vector<PlanarSite> grid{PlanarSite(0, 0), PlanarSite(1.5, 0.5), PlanarSite(3, 2)};
  MarkovSimulationOptions opts;
  opts.keep_trace = true;
  SeededStream s(42, 0);
  const auto sim = simulate_markov_planar(grid, 5, kSigma, kMarkov, s, opts);
  const std::size_t m = grid.size();
  ASSERT_EQ(sim.trace.size(), 5u);
  for (std::size_t d = 1; d < 5; ++d) {
    const auto& now = sim.trace[d];
    const auto& prev = sim.trace[d - 1];
    ASSERT_EQ(now.sites.size(), (5 - d) * m);
    for (std::size_t i = 0; i < now.sites.size(); ++i) {
      // Site i at date d reads site i + M (one more step back) at date d - 1.
      EXPECT_EQ(prev.sites[i + m], translate(now.sites[i], 1.0, kTau));
      EXPECT_EQ(now.state[i], std::max(0.7 * prev.state[i + m], 0.3 * now.innovations[i]));
    }
    for (std::size_t g = 0; g < m; ++g) EXPECT_EQ(sim.field.at(d, g), now.state[g]);
  }
  EXPECT_EQ(sim.trace[0].state, sim.trace[0].innovations);
}

TEST(MarkovPlanar, FrechetMarginsAtLaterDate) {
  const std::vector<PlanarSite> grid{PlanarSite(0, 0)};
  std::vector<double> v;
  for (int r = 0; r < 5000; ++r) {
    SeededStream s(43, r);
    v.push_back(simulate_markov_planar(grid, 4, kSigma, kMarkov, s).field.at(3, 0));
  }
  for (double z : {0.5, 1.0, 3.0}) EXPECT_NEAR(empirical_cdf(v, z), frechet(z), 0.02) << z;
}

TEST(MarkovPlanar, StationaryAlongMovingFrame) {
  // (X(1, x), X(2, x + tau)) vs (X(2, x), X(3, x + tau)): equal laws.
  const std::vector<PlanarSite> grid{PlanarSite(0, 0), translate(PlanarSite(0, 0), -1.0, kTau)};
  std::vector<double> early, late, early_theta_a, early_theta_b, late_theta_a, late_theta_b;
  for (int r = 0; r < 4000; ++r) {
    SeededStream s(44, r);
    const auto f = simulate_markov_planar(grid, 3, kSigma, kMarkov, s).field;
    early.push_back(std::max(f.at(0, 0), f.at(1, 1)));
    late.push_back(std::max(f.at(1, 0), f.at(2, 1)));
  }
  EXPECT_LT(ks_two_sample(early, late), 1.628 * std::sqrt(2.0 / 4000.0));
}

TEST(MarkovPlanar, RejectsEmptyInputs) {
  SeededStream s(45, 0);
  const std::vector<PlanarSite> none;
  EXPECT_THROW((void)simulate_markov_planar(none, 3, kSigma, kMarkov, s), ValidationError);
  const std::vector<PlanarSite> one{PlanarSite(0, 0)};
  EXPECT_THROW((void)simulate_markov_planar(one, 0, kSigma, kMarkov, s), ValidationError);
}

TEST(MarkovPlanar, SchlatherInnovationsRun) {
  const std::vector<PlanarSite> grid{PlanarSite(0, 0), PlanarSite(1, 0), PlanarSite(0, 1)};
  SeededStream s(46, 0);
  const auto sim = simulate_markov_planar(grid, 4, SchlatherParams(3, 1), kMarkov, s);
  EXPECT_EQ(sim.field.values.size(), 12u);
  for (double v : sim.field.values) EXPECT_GT(v, 0.0);
  EXPECT_FALSE(sim.warnings.empty());
}

TEST(MarkovSphere, ZeroRotationIsSitewiseMaxAr) {
  const std::vector<SphereSite> mesh{SphereSite(0, 0, 1)};
  const SphereMarkovParams markov(0.7, RotationSpec(0.0, Eigen::Vector3d::UnitZ()));
  std::vector<double> a, b;
  for (int r = 0; r < 3000; ++r) {
    SeededStream s(47, r);
    const auto f = simulate_markov_sphere(mesh, 2, VmfParams(1.0), markov, s).field;
    a.push_back(f.at(0, 0));
    b.push_back(f.at(1, 0));
  }
  EXPECT_NEAR(theta_from_pairs(a, b), 1.3, 0.05);
}

TEST(MarkovSphere, RotationCarriesThePreviousDate) {
  // X(t, x) reads X(t - 1, R x): the pair (X(t-1, R x), X(t, x)) has theta = 2 - a.
  const RotationSpec rot(0.4, Eigen::Vector3d::UnitZ());
  const SphereMarkovParams markov(0.7, rot);
  const SphereSite x(1, 0, 0);
  const std::vector<SphereSite> mesh{x, rotate(rotation_matrix(rot, 1.0), x)};
  std::vector<double> prev, now;
  for (int r = 0; r < 3000; ++r) {
    SeededStream s(48, r);
    const auto f = simulate_markov_sphere(mesh, 2, VmfParams(5.0), markov, s).field;
    prev.push_back(f.at(0, 1));
    now.push_back(f.at(1, 0));
  }
  EXPECT_NEAR(theta_from_pairs(prev, now), 1.3, 0.05);
}

TEST(MarkovSphere, ZeroKappaConstantPerDate) {
  const std::vector<SphereSite> mesh{SphereSite(0, 0, 1), SphereSite(1, 0, 0), SphereSite(0, 1, 0)};
  const SphereMarkovParams markov(0.6, RotationSpec(0.3, Eigen::Vector3d::UnitX()));
  SeededStream s(49, 0);
  const auto f = simulate_markov_sphere(mesh, 4, VmfParams(0.0), markov, s).field;
  for (std::size_t d = 0; d < 4; ++d) {
    EXPECT_EQ(f.at(d, 0), f.at(d, 1));
    EXPECT_EQ(f.at(d, 0), f.at(d, 2));
  }
}

TEST(MarkovSphere, FrechetMargins) {
  const std::vector<SphereSite> mesh{SphereSite(0, 0, 1)};
  const SphereMarkovParams markov(0.7, RotationSpec(0.5, Eigen::Vector3d::UnitX()));
  std::vector<double> v;
  for (int r = 0; r < 5000; ++r) {
    SeededStream s(50, r);
    v.push_back(simulate_markov_sphere(mesh, 3, VmfParams(1.0), markov, s).field.at(2, 0));
  }
  for (double z : {0.5, 1.0, 3.0}) EXPECT_NEAR(empirical_cdf(v, z), frechet(z), 0.02) << z;
}

TEST(MovingMax, SingleTermScale) {
  const std::vector<PlanarSite> site{PlanarSite(0, 0)};
  std::vector<double> inv;
  for (int r = 0; r < 5000; ++r) {
    SeededStream s(51, r);
    const auto res = truncated_moving_max(site, 1, kSigma, kMarkov, 0, s);
    EXPECT_NEAR(res.truncated_mass, 0.7, 1e-15);
    inv.push_back(1.0 / res.field.at(0, 0));
  }
  // 1 / X ~ Exp(rate s) for X Frechet with scale s.
  EXPECT_NEAR(1.0 / mean(inv), 0.3, 0.03);
}

TEST(MovingMax, TruncatedMassIsGeometricTail) {
  const std::vector<PlanarSite> site{PlanarSite(0, 0)};
  SeededStream s(52, 0);
  const auto res = truncated_moving_max(site, 2, kSigma, kMarkov, 10, s);
  double scale = 0.0;
  for (int j = 0; j <= 10; ++j) scale += std::pow(0.7, j) * 0.3;
  EXPECT_NEAR(scale, 1.0 - res.truncated_mass, 1e-15);
  EXPECT_EQ(res.truncation, 10u);
}

TEST(MovingMax, MatchesRecursion) {
  const std::vector<PlanarSite> site{PlanarSite(0, 0), PlanarSite(1, 0.5)};
  std::vector<double> rec, rep;
  for (int r = 0; r < 5000; ++r) {
    SeededStream s1(53, r), s2(54, r);
    rec.push_back(simulate_markov_planar(site, 3, kSigma, kMarkov, s1).field.at(2, 1));
    rep.push_back(truncated_moving_max(site, 3, kSigma, kMarkov, 50, s2).field.at(2, 1));
  }
  EXPECT_LE(ks_two_sample(rec, rep), 0.03);
}

TEST(FiniteDimCdf, Reductions) {
  const SmithExponentOracle oracle(kSigma);
  const std::vector<SpaceTimePoint> one{{1.0, PlanarSite(0, 0)}};
  const std::vector<double> z1{1.0};
  EXPECT_NEAR(finite_dim_neg_log_cdf(one, z1, kMarkov, oracle), 1.0, 1e-15);
  const std::vector<double> z2{2.5};
  EXPECT_NEAR(finite_dim_neg_log_cdf(one, z2, kMarkov, oracle), 0.4, 1e-15);

  const std::vector<SpaceTimePoint> drift{{1.0, PlanarSite(0, 0)}, {2.0, PlanarSite(-1, -1)}};
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_NEAR(finite_dim_neg_log_cdf(drift, ones, kMarkov, oracle), 1.3, 1e-12);

  const std::vector<SpaceTimePoint> far{{0.0, PlanarSite(0, 0)}, {30.0, PlanarSite(0.5, 0.2)}};
  EXPECT_GE(finite_dim_neg_log_cdf(far, ones, kMarkov, oracle), 1.99);

  // Same date: the spatial exponent.
  const std::vector<SpaceTimePoint> same{{1.0, PlanarSite(0, 0)}, {1.0, PlanarSite(1, 0)}};
  EXPECT_NEAR(finite_dim_neg_log_cdf(same, ones, kMarkov, oracle), 2 * normal_cdf(0.5), 1e-14);
}

TEST(FiniteDimCdf, Errors) {
  const SmithExponentOracle oracle(kSigma);
  const std::vector<SpaceTimePoint> unsorted{{2.0, PlanarSite(0, 0)}, {1.0, PlanarSite(1, 0)}};
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_THROW((void)finite_dim_neg_log_cdf(unsorted, ones, kMarkov, oracle), ValidationError);
  const std::vector<SpaceTimePoint> five{{1, PlanarSite(0, 0)}, {1, PlanarSite(1, 0)}, {1, PlanarSite(2, 0)},
                                         {1, PlanarSite(3, 0)}, {1, PlanarSite(4, 0)}};
  const std::vector<double> z5(5, 1.0);
  EXPECT_THROW((void)finite_dim_neg_log_cdf(five, z5, kMarkov, oracle), CapabilityError);
}

TEST(FiniteDimCdf, MonotoneAndLimits) {
  const SmithExponentOracle oracle(kSigma);
  const std::vector<SpaceTimePoint> pts{{1.0, PlanarSite(0, 0)}, {2.0, PlanarSite(0.5, -0.3)},
                                        {4.0, PlanarSite(-1.0, 0.2)}};
  const std::vector<double> z{1.0, 1.2, 0.8};
  const double base = finite_dim_neg_log_cdf(pts, z, kMarkov, oracle);
  for (std::size_t m = 0; m < 3; ++m) {
    std::vector<double> bigger = z;
    bigger[m] *= 1.5;
    EXPECT_LE(finite_dim_neg_log_cdf(pts, bigger, kMarkov, oracle), base + 1e-9);
  }
  // z_3 -> infinity removes the third point.
  std::vector<double> huge = z;
  huge[2] = 1e12;
  const std::vector<SpaceTimePoint> two(pts.begin(), pts.begin() + 2);
  const std::vector<double> z_two{1.0, 1.2};
  EXPECT_NEAR(finite_dim_neg_log_cdf(pts, huge, kMarkov, oracle), finite_dim_neg_log_cdf(two, z_two, kMarkov, oracle),
              1e-6);
}

TEST(FiniteDimCdf, ThreePointsMatchMonteCarlo) {
  const SmithExponentOracle oracle(kSigma);
  const std::vector<PlanarSite> grid{PlanarSite(0, 0), PlanarSite(0.5, -0.3), PlanarSite(-1.0, 0.2)};
  const std::vector<SpaceTimePoint> pts{{1.0, grid[0]}, {2.0, grid[1]}, {3.0, grid[2]}};
  const std::vector<double> z{1.5, 2.0, 1.8};
  const double exact = finite_dim_neg_log_cdf(pts, z, kMarkov, oracle);
  int hits = 0;
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    SeededStream s(55, r);
    const auto f = simulate_markov_planar(grid, 3, kSigma, kMarkov, s).field;
    if (f.at(0, 0) <= z[0] && f.at(1, 1) <= z[1] && f.at(2, 2) <= z[2]) ++hits;
  }
  EXPECT_NEAR(-std::log(hits / static_cast<double>(reps)), exact, 0.03);
}
