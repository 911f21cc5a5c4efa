#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dirlap/bounds.hpp"
#include "dirlap/geometry.hpp"
#include "dirlap/localization.hpp"
#include "dirlap/spectral.hpp"
#include "test_util.hpp"

namespace dirlap {
namespace {

DomainSpec unit_interval() { return parse_domain("dim=1\ninterval 0 1\n"); }

double input_of(const BoundReport& r, const std::string& key) {
  for (const auto& [k, v] : r.inputs)
    if (k == key) return v;
  ADD_FAILURE() << "missing input " << key << " in " << r.id << "/" << r.kind;
  return std::numeric_limits<double>::quiet_NaN();
}

bool has_flag(const BoundReport& r, const std::string& f) {
  for (const auto& x : r.flags)
    if (x == f) return true;
  return false;
}

DecayParams params_2d(double r, double t) {
  const auto g = testutil::load_golden();
  return make_decay_params(2, g["mollifier"]["laplacian_l1_2d"].get<double>(),
                           g["partition"]["c0_2d"].get<double>(), r, t);
}

DecayParams params_1d(double r, double t) {
  const auto g = testutil::load_golden();
  return make_decay_params(1, g["mollifier"]["laplacian_l1_1d"].get<double>(),
                           g["partition"]["c0_1d"].get<double>(), r, t);
}

// ---------------------------------------------------------------- sup norm

TEST(Supnorm, ExactIntervalSharpConstants) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 0, 20);
  const auto reports = check_supnorm(e);
  ASSERT_EQ(reports.size(), 40u);
  EXPECT_TRUE(all_pass(reports));
  for (std::size_t k = 0; k < 20; ++k) {
    const BoundReport& up = reports[2 * k];
    const BoundReport& lo = reports[2 * k + 1];
    const double lam = e.eigenvalues[k];
    ASSERT_EQ(up.kind, "supnorm_upper");
    ASSERT_EQ(lo.kind, "l1_lower");
    EXPECT_EQ(up.index, long(k) + 1);
    EXPECT_EQ(up.verdict, "pass");
    EXPECT_EQ(lo.verdict, "pass");
    // d = 1 closed forms, no discretization slack on exact data
    EXPECT_DOUBLE_EQ(
        up.rhs, std::pow(std::exp(1.0) / (2.0 * PI), 0.25) * std::pow(lam, 0.25));
    EXPECT_DOUBLE_EQ(
        lo.rhs, std::pow(2.0 * PI / std::exp(1.0), 0.25) * std::pow(lam, -0.25));
    EXPECT_DOUBLE_EQ(up.lhs, std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(lo.lhs, 2.0 * std::sqrt(2.0) / PI);
  }
  // ground state: |phi|_inf = sqrt(2) sits just under the bound ~1.4375,
  // |phi|_1 = 2 sqrt(2)/pi well above ~0.6957
  EXPECT_NEAR(reports[0].rhs, 1.4375, 2.5e-3);
  EXPECT_GT(reports[0].ratio, 0.95);
  EXPECT_LT(reports[0].ratio, 1.0);
  EXPECT_NEAR(reports[1].rhs, 0.6957, 2.5e-3);
  EXPECT_GT(reports[1].ratio, 1.0);
}

TEST(Supnorm, GridAppliesDiscretizationSlack) {
  const double h = 1.0 / 8;
  const GridMask m = rasterize(unit_interval(), h);
  SolveOptions opts;
  opts.count = 3;
  const EigenData e = lowest_eigenpairs(m, unit_interval(), opts);
  EXPECT_DOUBLE_EQ(slack_factor(e), 1.0 + 50.0 * h);

  const auto reports = check_supnorm(e);
  ASSERT_EQ(reports.size(), 6u);
  EXPECT_TRUE(all_pass(reports));
  const double slack = slack_factor(e);
  for (std::size_t k = 0; k < 3; ++k) {
    const double lam = input_of(reports[2 * k], "lambda");
    EXPECT_DOUBLE_EQ(lam, e.eigenvalues[k]);
    EXPECT_DOUBLE_EQ(reports[2 * k].rhs,
                     slack * std::pow(std::exp(1.0) / (2.0 * PI), 0.25) *
                         std::pow(lam, 0.25));
    EXPECT_DOUBLE_EQ(reports[2 * k + 1].rhs,
                     std::pow(2.0 * PI / std::exp(1.0), 0.25) *
                         std::pow(lam, -0.25) / slack);
  }

  const EigenData x = exact_interval_spectrum(unit_interval(), 0, 1);
  EXPECT_DOUBLE_EQ(slack_factor(x), 1.0);
}

TEST(Supnorm, PreconditionErrors) {
  EigenData e = synthetic_spectrum({1.0, 2.0});
  e.norms.pop_back();
  try {
    check_supnorm(e);
    FAIL() << "missing norms should throw";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind, "precondition");
  }

  const EigenData neg = synthetic_spectrum({-1.0, 2.0});
  try {
    check_supnorm(neg);
    FAIL() << "nonpositive eigenvalue should throw";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind, "precondition");
  }
}

// ------------------------------------------------------------ sharp 1D law

TEST(Sharp1d, SingleIntervalAttainsEquality) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 0, 12);
  const auto reports = check_sharp1d(e);
  ASSERT_EQ(reports.size(), 12u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.verdict, "pass");
    // (2 sqrt(2)/pi)^2 = (8/pi) lambda_j^{-1/2} j exactly for every mode
    EXPECT_NEAR(r.ratio, 1.0, 1e-10);
    EXPECT_LE(input_of(r, "lhs_random_max"),
              input_of(r, "lhs_extremal") * (1.0 + 1e-9));
  }
}

TEST(Sharp1d, CongruentUnionStaysTight) {
  const DomainSpec two = parse_domain("dim=1\ninterval 0 1\ninterval 1.5 2.5\n");
  const EigenData e = exact_interval_spectrum(two, 0, 12);
  const auto reports = check_sharp1d(e);
  ASSERT_EQ(reports.size(), 6u);  // every level is a congruent pair
  for (const auto& r : reports) {
    EXPECT_EQ(r.verdict, "pass");
    EXPECT_DOUBLE_EQ(input_of(r, "multiplicity"), 2.0);
    EXPECT_NEAR(r.ratio, 1.0, 1e-10);
    // the extremal combination beats equal weights only on uneven clusters
    EXPECT_NEAR(input_of(r, "lhs_extremal"), input_of(r, "lhs_equal_weights"),
                1e-12);
  }
}

TEST(Sharp1d, MixedUnionRatiosBelowOne) {
  const DomainSpec mix = parse_domain("dim=1\ninterval 0 1\ninterval 2 2.5\n");
  // 13 modes end on the simple level 81 pi^2, so no cluster is cut open
  const EigenData e = exact_interval_spectrum(mix, 0, 13);
  const auto reports = check_sharp1d(e);
  ASSERT_GE(reports.size(), 5u);
  double rmax = 0, rmin = 10;
  for (const auto& r : reports) {
    EXPECT_EQ(r.verdict, "pass");
    rmax = std::max(rmax, r.ratio);
    rmin = std::min(rmin, r.ratio);
  }
  // lowest levels still attain the bound; once the short component starts
  // contributing to N_lambda the ratio drops strictly below one
  EXPECT_NEAR(rmax, 1.0, 1e-10);
  EXPECT_LT(rmin, 0.999);
}

TEST(Sharp1d, RequiresExactData) {
  const GridMask m = rasterize(unit_interval(), 1.0 / 8);
  SolveOptions opts;
  opts.count = 2;
  const EigenData g = lowest_eigenpairs(m, unit_interval(), opts);
  EXPECT_THROW(check_sharp1d(g), Error);
  EXPECT_THROW(exact1d_inscribed_volume(g), Error);

  const DomainSpec mix = parse_domain("dim=1\ninterval 0 1\ninterval 2 2.5\n");
  const EigenData e = exact_interval_spectrum(mix, 0, 4);
  EXPECT_DOUBLE_EQ(exact1d_inscribed_volume(e), 1.0);
}

// ------------------------------------------------------ counting from below

TEST(CountingLower, SyntheticSquareClosedForm) {
  std::vector<double> vals;
  for (int j = 1; j <= 40; ++j)
    for (int k = 1; k <= 40; ++k) vals.push_back(PI * PI * (j * j + k * k));
  EigenData e = synthetic_spectrum(vals);
  e.dim = 2;
  // the smallest omitted tensor mode has index (1, 41)
  e.complete_below = PI * PI * (1.0 + 41.0 * 41.0);

  // thresholds written the same way as the values so ties count as included
  const BoundReport r = check_counting_lower(e, 1.0, PI * PI * 2.0);
  EXPECT_EQ(r.verdict, "pass");
  EXPECT_DOUBLE_EQ(r.lhs, 1.0);
  // (2 pi)^{-2} 2^{-1} * 1 * (2 pi^2) = 1/4
  EXPECT_NEAR(r.rhs, 0.25, 1e-12);
  EXPECT_NEAR(r.ratio, 4.0, 1e-11);

  // a larger threshold: N(50 pi^2) = #{j^2 + k^2 <= 50} = 33 vs 50/8
  const BoundReport r2 = check_counting_lower(e, 1.0, PI * PI * 50.0);
  EXPECT_EQ(r2.verdict, "pass");
  EXPECT_DOUBLE_EQ(r2.lhs, 33.0);
  EXPECT_NEAR(r2.rhs, 6.25, 1e-11);
}

TEST(CountingLower, SkippedAndPreconditions) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 50.0);
  const BoundReport r = check_counting_lower(e, 1.0, 60.0);
  EXPECT_EQ(r.verdict, "skipped");
  EXPECT_TRUE(has_flag(r, "incomplete-spectrum"));

  try {
    check_counting_lower(e, 1.0, 1.0);  // below the ground state
    FAIL() << "threshold below lambda_1 should throw";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind, "precondition");
  }
  EXPECT_THROW(check_counting_lower(synthetic_spectrum({}), 1.0, 1.0), Error);
}

// ------------------------------------------------- closed-range RHS terms

TEST(Cor25Terms, ThetaScalingFloorAndPrefactor) {
  // halving theta scales the terms by 2^d and 2^{4d}; the flo factor is the
  // same on both sides so the log floor cannot mask a wrong exponent
  for (int d = 1; d <= 2; ++d) {
    const auto [a1, a2] = cor25_rhs_terms(1.0, 1.0, 1.0, 9, d);
    const auto [b1, b2] = cor25_rhs_terms(1.0, 1.0, 0.5, 9, d);
    EXPECT_DOUBLE_EQ(b1 / a1, std::pow(2.0, d));
    EXPECT_DOUBLE_EQ(b2 / a2, std::pow(2.0, 4.0 * d));
  }

  bool fl = false;
  const auto [t1_2, unused] = cor25_rhs_terms(1.0, 1.0, 1.0, 2, 1, &fl);
  (void)unused;
  EXPECT_TRUE(fl);            // log 2 < 1
  EXPECT_DOUBLE_EQ(t1_2, 2.0);  // flo = 1, so t1 = N
  const auto [t1_3, t2_3] = cor25_rhs_terms(1.0, 1.0, 1.0, 3, 1, &fl);
  EXPECT_FALSE(fl);           // log 3 > 1
  EXPECT_DOUBLE_EQ(t1_3, 3.0 * std::log(3.0));
  EXPECT_DOUBLE_EQ(t2_3, 1.0);

  // joint dilation of (lambda1, lambda_k) only moves the lambda1^{-d/2} front
  for (int d = 1; d <= 2; ++d) {
    const auto [u1, u2] = cor25_rhs_terms(1.0, 5.0, 0.7, 9, d);
    const auto [v1, v2] = cor25_rhs_terms(4.0, 20.0, 0.7, 9, d);
    EXPECT_NEAR(v1, u1 * std::pow(4.0, -d / 2.0), 1e-15 * u1);
    EXPECT_NEAR(v2, u2 * std::pow(4.0, -d / 2.0), 1e-15 * u2);
  }
}

// ----------------------------------------------------------- L1 ratio runs

TEST(RatioL1, UnitIntervalHandValue) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 0, 40);
  const BoundReport r = ratio_l1(e, 1, 1.0);
  EXPECT_EQ(r.verdict, "ratio-only");
  EXPECT_EQ(r.constant_mode, "unit-constant");
  EXPECT_EQ(r.index, 1);
  // N(2 lambda_1) = 1, so the floor engages and both terms equal 1/pi
  EXPECT_TRUE(has_flag(r, "log-floored"));
  EXPECT_DOUBLE_EQ(input_of(r, "N"), 1.0);
  EXPECT_NEAR(input_of(r, "term_counting"), 1.0 / PI, 1e-15);
  EXPECT_NEAR(input_of(r, "term_polynomial"), 1.0 / PI, 1e-15);
  EXPECT_NEAR(r.lhs, 8.0 / (PI * PI), 1e-14);
  EXPECT_NEAR(r.ratio, 4.0 / PI, 1e-12);

  EXPECT_THROW(ratio_l1(e, 1, 0.0), Error);
  EXPECT_THROW(ratio_l1(e, 1, 1.5), Error);
  EXPECT_THROW(ratio_l1(e, 0, 1.0), Error);
  EXPECT_THROW(ratio_l1(e, 99, 1.0), Error);
}

TEST(RatioL1, ScaleInvarianceAcrossDilation) {
  const EigenData a = exact_interval_spectrum(unit_interval(), 0, 40);
  const DomainSpec wide = parse_domain("dim=1\ninterval 0 3.7\n");
  const EigenData b = exact_interval_spectrum(wide, 0, 40);
  for (long k : {1L, 2L, 3L, 4L, 5L}) {
    for (double theta : {1.0, 0.5}) {
      const BoundReport ra = ratio_l1(a, k, theta);
      const BoundReport rb = ratio_l1(b, k, theta);
      EXPECT_DOUBLE_EQ(input_of(ra, "N"), input_of(rb, "N"));
      EXPECT_NEAR(rb.ratio, ra.ratio, 1e-10 * ra.ratio)
          << "k=" << k << " theta=" << theta;
    }
  }
}

TEST(RatioL1, NoVectorsFlagOnDegenerateGrid) {
  const DomainSpec balls = parse_preset("disjoint_balls(2)");
  const GridMask m = rasterize(balls, 1.0 / 32);
  SolveOptions opts;
  opts.count = 2;
  opts.keep_vectors = false;
  const EigenData e = lowest_eigenpairs(m, balls, opts);
  ASSERT_EQ(e.eigenvalues.size(), 2u);
  ASSERT_NEAR(e.eigenvalues[0], e.eigenvalues[1], 1e-6 * e.eigenvalues[0]);

  // count-mode data is certified to the midpoint toward lambda_3, so theta
  // must keep (1 + theta) lambda_1 inside that window
  const BoundReport r = ratio_l1(e, 1, 0.5);
  EXPECT_EQ(r.verdict, "ratio-only");
  EXPECT_DOUBLE_EQ(input_of(r, "cluster_size"), 2.0);
  EXPECT_TRUE(has_flag(r, "no-vectors"));
}

// ------------------------------------------------- essential-style ratio

TEST(RatioEssential, HandComputedRhs) {
  EigenData e = synthetic_spectrum({1.0, 2.0, 3.0});
  for (auto& n : e.norms) n.l1 = 0.5;

  const BoundReport r = ratio_essential(e, 1, 1.0, 4.0, 2.0);
  EXPECT_EQ(r.verdict, "ratio-only");
  EXPECT_DOUBLE_EQ(input_of(r, "t_r"), 10.0 / 3.0);
  EXPECT_DOUBLE_EQ(input_of(r, "N"), 3.0);
  EXPECT_DOUBLE_EQ(input_of(r, "X"), 8.0);
  // d = 1: X log(3) N + (Lambda/Sigma)^3 X^4 = 24 log 3 + 64
  EXPECT_NEAR(r.rhs, 24.0 * std::log(3.0) + 64.0, 1e-12 * r.rhs);
  EXPECT_DOUBLE_EQ(r.lhs, 0.25);
  EXPECT_FALSE(has_flag(r, "log-floored"));

  // pushing the cut toward Sigma blows up X and collapses the ratio
  const BoundReport tight = ratio_essential(e, 1, 1.0, 4.0, 3.9);
  EXPECT_LT(tight.ratio, r.ratio / 100.0);
}

TEST(RatioEssential, WindowAndUsageErrors) {
  EigenData e = synthetic_spectrum({1.0, 2.0, 3.0});
  auto kind_of = [&](long k, double L, double S, double rc) {
    try {
      ratio_essential(e, k, L, S, rc);
      return std::string("none");
    } catch (const Error& err) {
      return std::string(err.kind);
    }
  };
  EXPECT_EQ(kind_of(1, 1.0, 4.0, 0.9), "precondition");  // below max(L, S/4)
  EXPECT_EQ(kind_of(1, 1.0, 4.0, 4.0), "precondition");  // at Sigma
  EXPECT_EQ(kind_of(3, 1.0, 4.0, 2.0), "precondition");  // lambda_3 > r
  EXPECT_EQ(kind_of(1, -1.0, 4.0, 2.0), "usage");
  EXPECT_EQ(kind_of(1, 1.0, std::numeric_limits<double>::infinity(), 2.0),
            "usage");
  EXPECT_EQ(kind_of(99, 1.0, 4.0, 2.0), "usage");
}

TEST(RatioEssential, SkippedWhenCountingUncertified) {
  EigenData e = synthetic_spectrum({1.0, 2.0, 3.0});
  e.complete_below = 3.0;  // t_r = 10/3 exceeds the certified range
  const BoundReport r = ratio_essential(e, 1, 1.0, 4.0, 2.0);
  EXPECT_EQ(r.verdict, "skipped");
  EXPECT_TRUE(has_flag(r, "incomplete-spectrum"));
}

// ------------------------------------------------------ cluster RHS pieces

TEST(ClusterRhs, StructureMatchesClosedForm) {
  const DecayParams p = params_2d(1.0, 2.0);
  const double n = 7.0;
  // f(N) = a sqrt(N) + b N with a = n^{d/2}
  const double f0 = cluster_rhs(p, n, 0.0);
  const double f1 = cluster_rhs(p, n, 1.0);
  const double f4 = cluster_rhs(p, n, 4.0);
  const double f9 = cluster_rhs(p, n, 9.0);
  EXPECT_DOUBLE_EQ(f0, 0.0);
  // recovering a cancels two ~1e8 terms, so allow absolute noise ~1e-6
  const double a = (4.0 * f1 - f4) / 2.0;
  const double b = f1 - a;
  EXPECT_NEAR(a, 7.0, 1e-6);  // n^{d/2} with d = 2
  EXPECT_NEAR(f9, 3.0 * a + 9.0 * b, 1e-12 * f9);
  const double b_want = (std::sqrt(p.r) / p.beta) *
                        (std::pow(n, 2.0) / p.alpha + n / (p.alpha * p.alpha)) *
                        std::exp(-p.alpha * n);
  EXPECT_NEAR(b, b_want, 1e-9 * b_want);
}

TEST(ClusterRhs, FloorPrecondition) {
  const DecayParams p = params_2d(1.0, 2.0);
  ASSERT_GT(p.n0, 6.0);
  try {
    cluster_rhs(p, 6.0, 10.0);
    FAIL() << "scale below n0 should throw";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind, "precondition");
  }
  EXPECT_GT(cluster_rhs(p, p.n0, 10.0), 0.0);

  // wide spectral window pushes n0 below 1; the floor becomes 1
  const DecayParams q = params_1d(1.0, 25.0);
  ASSERT_LT(q.n0, 1.0);
  EXPECT_THROW(cluster_rhs(q, 0.95, 5.0), Error);
  EXPECT_GT(cluster_rhs(q, 1.0, 5.0), 0.0);
}

TEST(ChooseScale, BranchesAndTailIdentity) {
  const DecayParams p = params_2d(1.0, 2.0);
  // d = 2: threshold = max(1, c0) = c0 ~ 2.212, so N = 9 stays on branch 1
  const ScaleChoice s1 = choose_scale(p, 9.0);
  EXPECT_EQ(s1.branch, 1);
  EXPECT_DOUBLE_EQ(s1.n, p.n0);

  const ScaleChoice s2 = choose_scale(p, 10.0);
  EXPECT_EQ(s2.branch, 2);
  EXPECT_DOUBLE_EQ(s2.n, 2.0 * std::log(10.0) / p.alpha);
  // the chosen scale turns e^{-alpha n} N into 1/N
  EXPECT_NEAR(std::exp(-p.alpha * s2.n) * 10.0, 0.1, 1e-12);

  // n0 < 1 case: branch 1 returns the unit floor
  const DecayParams q = params_1d(1.0, 25.0);
  const ScaleChoice s3 = choose_scale(q, 2.0);
  EXPECT_EQ(s3.branch, 1);
  EXPECT_DOUBLE_EQ(s3.n, 1.0);
}

TEST(RatioCluster, ScaledIntervalProfile) {
  // interval of length pi: lambda_j = j^2, so lambda_1 = 1 = r exactly
  const DomainSpec seg = parse_domain("dim=1\ninterval 0 3.14159265358979323846\n");
  const EigenData e = exact_interval_spectrum(seg, 50.0);
  ASSERT_NEAR(e.eigenvalues[0], 1.0, 1e-12);

  const DecayParams p = params_1d(1.0, 2.0);
  const BoundReport r = ratio_cluster_rhs(e, p, 1, 5.0, 2.0);
  EXPECT_EQ(r.verdict, "ratio-only");
  EXPECT_EQ(r.constant_mode, "unit-constant");
  EXPECT_DOUBLE_EQ(input_of(r, "N_t"), 1.0);
  EXPECT_DOUBLE_EQ(r.rhs, cluster_rhs(p, 5.0, 1.0));
  EXPECT_NEAR(r.lhs, (2.0 * std::sqrt(2.0) / PI) * std::sqrt(PI), 1e-9);
  EXPECT_TRUE(std::isfinite(r.ratio));
  EXPECT_GT(r.ratio, 1e-5);
  EXPECT_LT(r.ratio, 1e-2);

  auto kind_of = [&](long k, double n) {
    try {
      ratio_cluster_rhs(e, p, k, n, 2.0);
      return std::string("none");
    } catch (const Error& err) {
      return std::string(err.kind);
    }
  };
  EXPECT_EQ(kind_of(2, 5.0), "precondition");  // lambda_2 = 4 > r
  EXPECT_EQ(kind_of(1, 3.0), "precondition");  // below the n0 floor
  EXPECT_EQ(kind_of(0, 5.0), "usage");
}

// --------------------------------------------------- extremal cluster L1

TEST(ClusterExtremal, GridSignAscentOnTwinBalls) {
  const DomainSpec one = parse_domain("dim=2\ndisc 0 0 1\n");
  const GridMask m1 = rasterize(one, 1.0 / 32);
  SolveOptions o1;
  o1.count = 1;
  const EigenData single = lowest_eigenpairs(m1, one, o1);
  const double b = single.norms[0].l1;

  const DomainSpec two = parse_preset("disjoint_balls(2)");
  const GridMask m2 = rasterize(two, 1.0 / 32);
  SolveOptions o2;
  o2.count = 2;
  const EigenData pair = lowest_eigenpairs(m2, two, o2);
  ASSERT_EQ(pair.vectors.size(), 2u);

  const ClusterExtremal ex = cluster_extremal_l1(pair, 0);
  EXPECT_EQ(ex.method, "sign-ascent");
  EXPECT_EQ(ex.cluster.size(), 2u);
  EXPECT_GE(ex.rounds, 1);
  // disjoint congruent supports: the extremum is sqrt(2) times the L1 norm
  // of one pure component mode, whatever basis the solver returned
  EXPECT_NEAR(ex.l1, std::sqrt(2.0) * b, 1e-6 * b);
  const double a0 = pair.norms[0].l1, a1 = pair.norms[1].l1;
  EXPECT_LE(ex.l1, std::sqrt(a0 * a0 + a1 * a1) * (1.0 + 1e-9));
}

TEST(ClusterExtremal, SingleAndClosedFormPaths) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 0, 3);
  const ClusterExtremal lone = cluster_extremal_l1(e, 1);
  EXPECT_EQ(lone.method, "single");
  EXPECT_DOUBLE_EQ(lone.l1, e.norms[1].l1);

  const DomainSpec two = parse_domain("dim=1\ninterval 0 1\ninterval 1.5 2.5\n");
  const EigenData u = exact_interval_spectrum(two, 0, 4);
  const ClusterExtremal ex = cluster_extremal_l1(u, 0);
  EXPECT_EQ(ex.method, "closed-form");
  EXPECT_EQ(ex.cluster.size(), 2u);
  EXPECT_NEAR(ex.l1, std::sqrt(2.0) * 2.0 * std::sqrt(2.0) / PI, 1e-14);

  EXPECT_THROW(cluster_extremal_l1(e, 99), Error);
}

// ------------------------------------------- vacuous and boundary verdicts

TEST(DecayChecks, VacuousSkippedAndBoundary) {
  const DecayParams p = params_2d(1.0, 2.0);

  DecayProfile empty;
  empty.total_mass = 0.0;
  const BoundReport v = check_decay_mass(empty, p);
  EXPECT_EQ(v.verdict, "pass");
  EXPECT_TRUE(has_flag(v, "vacuous"));
  EXPECT_FALSE(v.note.empty());

  DecayProfile thin;
  thin.total_mass = 1e-3;
  thin.fit_points = 1;
  EXPECT_EQ(check_decay_mass(thin, p).verdict, "skipped");

  DecayProfile shaky;
  shaky.total_mass = 1e-3;
  shaky.fit_points = 6;
  shaky.fitted_rate = 0.1;
  shaky.reliable = false;
  const BoundReport sr = check_decay_mass(shaky, p);
  EXPECT_EQ(sr.verdict, "skipped");
  EXPECT_TRUE(has_flag(sr, "unreliable"));

  DecayProfile good = shaky;
  good.reliable = true;
  EXPECT_EQ(check_decay_mass(good, p).verdict, "pass");
  good.fitted_rate = p.alpha / 2.0;
  EXPECT_EQ(check_decay_mass(good, p).verdict, "fail");

  RemainderGap none;
  none.vacuous = true;
  const BoundReport rv = check_remainder(none, p, 1.0 / 64);
  EXPECT_EQ(rv.verdict, "pass");
  EXPECT_TRUE(has_flag(rv, "vacuous"));

  RemainderGap gap;
  gap.vacuous = false;
  gap.n_nodes = 100;
  const double h = 1e-3;
  gap.lambda1 = p.s - 5.0 * h * p.s - 1e-9;  // just under the slack line
  EXPECT_EQ(check_remainder(gap, p, h).verdict, "fail");
  gap.lambda1 = p.s;
  EXPECT_EQ(check_remainder(gap, p, h).verdict, "pass");

  std::vector<BoundReport> mixed = {v, sr, check_remainder(gap, p, h)};
  EXPECT_TRUE(all_pass(mixed));
  gap.lambda1 = 0.1;
  mixed.push_back(check_remainder(gap, p, h));
  EXPECT_FALSE(all_pass(mixed));
}

// ------------------------------------------------- trace-content and count

TEST(TraceContent, DeepIntervalPasses) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 25000.0);
  const std::vector<double> times = {0.05, 0.1, 0.2, 0.5, 1.0};
  const auto reports = check_trace_content(e, times);
  ASSERT_EQ(reports.size(), times.size());
  for (const auto& r : reports) {
    EXPECT_EQ(r.verdict, "pass");
    EXPECT_FALSE(has_flag(r, "tail-dominated"));
  }
  // short-time ratio tends to 1/sqrt(2) as both sides become free-space
  EXPECT_GT(reports[0].ratio, 0.3);
  EXPECT_LT(reports[0].ratio, 1.0);
  // long-time ratio collapses with the spectral gap
  EXPECT_LT(reports.back().ratio, 0.1);
}

TEST(TraceContent, TailFlagOnShallowData) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 30.0);
  ASSERT_EQ(e.eigenvalues.size(), 1u);
  const auto reports = check_trace_content(e, {0.05});
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].verdict, "pass");
  EXPECT_TRUE(has_flag(reports[0], "tail-dominated"));
}

TEST(CountingTrace, DeepIntervalOptimalT) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 25000.0);
  const std::vector<double> Ts = {0.01, 0.02, 0.05, 0.1, 0.2};
  const auto reports = check_counting_trace(e, Ts, 10);
  ASSERT_EQ(reports.size(), 10u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.verdict, "pass");
    EXPECT_FALSE(has_flag(r, "tail-dominated"));
    const double T = input_of(r, "T");
    EXPECT_TRUE(std::find(Ts.begin(), Ts.end(), T) != Ts.end());
  }
  // higher eigenvalues favor shorter times in the exponential tradeoff
  EXPECT_LE(input_of(reports[9], "T"), input_of(reports[0], "T"));
  EXPECT_DOUBLE_EQ(input_of(reports[0], "N_2lambda"), 1.0);
}

TEST(CountingTrace, SkippedAndUsage) {
  const EigenData e = exact_interval_spectrum(unit_interval(), 50.0);
  const auto reports = check_counting_trace(e, {0.05}, 3);
  ASSERT_EQ(reports.size(), 2u);  // only two certified modes below 50
  EXPECT_EQ(reports[0].verdict, "pass");
  EXPECT_EQ(reports[1].verdict, "skipped");
  EXPECT_TRUE(has_flag(reports[1], "incomplete-spectrum"));

  EXPECT_THROW(check_counting_trace(e, {}, 1), Error);
  EXPECT_THROW(check_counting_trace(e, {-1.0}, 1), Error);
}

}  // namespace
}  // namespace dirlap
