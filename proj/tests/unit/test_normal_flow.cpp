#include "afp/normal_flow.hpp"
#include "afp/test_surfaces.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace afp;

namespace {

ShapeSpectrum spectrum(std::vector<double> l) { return ShapeSpectrum{std::move(l)}; }

double mobius(double l, double t) { return (l + std::tanh(t)) / (1 + l * std::tanh(t)); }

}  // namespace

TEST(JacobiTransfer, HyperbolicClosedForm) {
  for (double beta : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    const TransferTrace tr = jacobi_transfer(1.0, beta, 3.0, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.ts.size(); ++i) {
      const double t = tr.ts[i];
      const double j = std::cosh(t) + beta * std::sinh(t);
      worst = std::max(worst, std::abs(tr.f[i] - j * j) / (j * j));
    }
    EXPECT_LT(worst, 1e-8) << beta;
  }
  const TransferTrace tr = jacobi_transfer(1.0, 0.0, 2.0, 1.0);
  EXPECT_NEAR(tr.f.back(), std::cosh(2.0) * std::cosh(2.0), 1e-8);
}

TEST(JacobiTransfer, StrictBranchAboveHyperbolic) {
  const TransferTrace tr = jacobi_transfer(1.0, 0.0, 3.0, 1.5);
  for (std::size_t i = 1; i < tr.ts.size(); ++i) {
    const double c = std::cosh(std::sqrt(1.5) * tr.ts[i]);
    EXPECT_NEAR(tr.f[i], c * c, 1e-8 * c * c);
    EXPECT_GT(tr.f[i], std::cosh(tr.ts[i]) * std::cosh(tr.ts[i]));
  }
}

TEST(JacobiTransfer, Preconditions) {
  EXPECT_THROW(jacobi_transfer(0.0, 0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(jacobi_transfer(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(jacobi_transfer(1.0, 0.0, 21.0, 1.0), std::invalid_argument);
  EXPECT_THROW(jacobi_transfer(1.0, 0.0, 1.0, 0.5), std::invalid_argument);
}

TEST(JacobiTransfer, PositiveForAllowedSlopes) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    const double alpha = afp::testing::uniform(rng, 0.1, 2.0);
    const double beta = alpha * afp::testing::uniform(rng, -0.999, 0.999);
    const TransferTrace tr = jacobi_transfer(alpha, beta, 20.0, 1.0, 1e-2 / 10);
    EXPECT_GT(*std::min_element(tr.f.begin(), tr.f.end()), 0.0);
  }
}

TEST(TransferCheck, UnitCurvatureIdentity) {
  for (double beta : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    const TransferCheck c = transfer_equation_check(jacobi_transfer(1.0, beta, 3.0, 1.0));
    EXPECT_LT(c.max_rel_residual, 1e-5);
    EXPECT_NEAR(c.min_logf_combo, 2.0, 1e-4);
    EXPECT_TRUE(c.unit_identity_ok);
    EXPECT_TRUE(c.passed);
  }
}

TEST(TransferCheck, StrictBranch) {
  for (double beta : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    const TransferCheck c = transfer_equation_check(jacobi_transfer(1.0, beta, 3.0, 2.0), 0.1);
    EXPECT_GT(c.min_sqrt_excess, 0.0);
    EXPECT_TRUE(c.strict_branch_ok);
    EXPECT_GE(c.min_logf_combo, 2.0 - 1e-5);
  }
}

TEST(TransferCheck, CsvColumns) {
  std::ostringstream out;
  write_trace_csv(jacobi_transfer(1.0, 0.0, 0.01, 1.0), out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "t,f,sqrtf_residual,logf_combo");
}

TEST(EquidistantSpectrum, ClosedFormExamples) {
  EXPECT_NEAR(equidistant_spectrum(spectrum({0.0, 0.0}), 1.0, 3).tangential[0], 0.7615941559557649, 1e-6);
  EXPECT_NEAR(equidistant_spectrum(spectrum({0.5, -0.5}), 15.0, 3).tangential[0], 1.0, 1e-6);
  EXPECT_NEAR(equidistant_spectrum(spectrum({-0.5, 0.5}), std::atanh(0.5), 3).tangential[0], 0.0, 1e-8);
}

TEST(EquidistantSpectrum, RiccatiMatchesMobius) {
  for (double l = -0.95; l <= 0.95 + 1e-12; l += 0.05) {
    for (double t : {0.0, 0.1, 0.5, 1.0, 2.5, 5.0, 10.0}) {
      const EquidistantSpectrum e = equidistant_spectrum(spectrum({l, -l}), t, 3);
      EXPECT_NEAR(e.tangential[0], mobius(l, t), 1e-7);
      EXPECT_NEAR(e.tangential_closed[0], mobius(l, t), 1e-14);
      EXPECT_LE(e.tangential[0], 1.0);
    }
  }
}

TEST(EquidistantSpectrum, SemigroupAndMonotonicity) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 30; ++i) {
    const double l = afp::testing::uniform(rng, -0.95, 0.95);
    const double s = afp::testing::uniform(rng, 0.0, 3.0), t = afp::testing::uniform(rng, 0.0, 3.0);
    const double ls = equidistant_spectrum(spectrum({l, -l}), s, 3).tangential[0];
    const double lst = equidistant_spectrum(spectrum({ls, -ls}), t, 3).tangential[0];
    EXPECT_NEAR(lst, equidistant_spectrum(spectrum({l, -l}), s + t, 3).tangential[0], 1e-7);
    EXPECT_GT(equidistant_spectrum(spectrum({l, -l}), s + 0.01, 3).tangential[0], ls);
  }
}

TEST(EquidistantSpectrum, NormalBlock) {
  const EquidistantSpectrum e = equidistant_spectrum(spectrum({-0.5, 0.5}), 1.0, 5);
  ASSERT_EQ(e.normal.size(), 2u);
  EXPECT_NEAR(e.normal[0], 1.3130352854993313, 1e-12);  // coth 1
  EXPECT_EQ(e.lambda_t.size(), 4u);
  EXPECT_TRUE(std::is_sorted(e.lambda_t.begin(), e.lambda_t.end()));
  const EquidistantSpectrum z = equidistant_spectrum(spectrum({-0.5, 0.5}), 0.0, 5);
  EXPECT_FALSE(z.normal_block);
  EXPECT_EQ(z.lambda_t.size(), 2u);
  const EquidistantSpectrum k2 = equidistant_spectrum(spectrum({-0.5, 0.5}), 1.0, 5, 4.0);
  EXPECT_NEAR(k2.normal[0], 2.0746294414550962, 1e-12);  // 2 coth 2
}

TEST(BoundedSlice, Examples) {
  const SliceReport near = bounded_slice_check(spectrum({-0.99, 0.99}), 5.0);
  EXPECT_LT(near.max_value, 1.0);
  EXPECT_TRUE(near.passed);
  const SliceReport zero = bounded_slice_check(spectrum({0.0, 0.0}), 0.0);
  EXPECT_EQ(zero.max_value, 0.0);
  EXPECT_TRUE(zero.passed);
  for (int i = -9; i <= 9; ++i) {
    for (int j = 1; j <= 30; ++j) {
      const double l = 0.1 * i;
      EXPECT_TRUE(bounded_slice_check(spectrum({l, -l}), 0.1 * j).passed);
    }
  }
}

TEST(KConvexity, Examples) {
  const KConvexityReport r = k_convexity_check(spectrum({-0.5, 0.5}), 1.0, 3);
  ASSERT_EQ(r.partial_sums.size(), 2u);
  EXPECT_NEAR(r.partial_sums[1], 1.3361401224951952, 1e-7);
  EXPECT_TRUE(r.minimal_base);
  EXPECT_TRUE(r.passed);

  for (double t : {0.1, 1.0, 4.0}) {
    const KConvexityReport f = k_convexity_check(spectrum({0.0, 0.0}), t, 3);
    EXPECT_NEAR(f.partial_sums[0], std::tanh(t), 1e-7);
    EXPECT_GT(f.partial_sums[0], 0.0);
  }

  const KConvexityReport n = k_convexity_check(spectrum({-0.5, 0.5}), 1.0, 4);
  ASSERT_EQ(n.partial_sums.size(), 3u);
  EXPECT_NEAR(n.partial_sums[2] - n.partial_sums[1], 1.3130352854993313, 1e-7);
  EXPECT_TRUE(n.passed);
}

TEST(ConvexityRadius, Examples) {
  const ConvexityRadius z = convexity_radius(0.0);
  EXPECT_EQ(z.r_spectral, 0.0);
  EXPECT_EQ(z.r_paper, kMaxDistance);
  EXPECT_TRUE(z.paper_saturated);

  const ConvexityRadius h = convexity_radius(0.5);
  EXPECT_NEAR(h.r_paper, 0.5493061443340548, 1e-12);
  EXPECT_NEAR(h.r_spectral, 0.5493061443340548, 1e-12);
  EXPECT_FALSE(h.disagree);

  const ConvexityRadius t = convexity_radius(0.3);
  EXPECT_NEAR(t.r_paper, 0.8673005276940531, 1e-12);
  EXPECT_NEAR(t.r_spectral, 0.3095196042031117, 1e-12);
  EXPECT_TRUE(t.disagree);
  EXPECT_EQ(t.safe(), t.r_paper);
  const EquidistantSpectrum e = equidistant_spectrum(spectrum({-0.3, 0.3}), t.r_paper, 3);
  EXPECT_GE(e.tangential[0], 0.0);

  EXPECT_THROW(convexity_radius(1.0), std::invalid_argument);
}

TEST(ExpMetric, TotallyGeodesicBase) {
  const ModelSpace s(3);
  const ExpMetricReport r = exp_metric_lower_bound(surfaces::geodesic_plane(s, 65, 1.0), {0.5, 1.0, 2.0}, 8);
  EXPECT_NEAR(r.radial_min, 1.0, 1e-6);
  EXPECT_NEAR(r.tangential_min, 1.0, 2e-3);
  EXPECT_NEAR(r.mixed_min, 1.0, 2e-3);
  EXPECT_TRUE(r.passed);
}

TEST(ExpMetric, HalfPinchedBase) {
  const ModelSpace s(3);
  const ParametricPatch p = surfaces::equidistant(s, 33, 1.0, std::atanh(0.5));
  const ExpMetricReport r = exp_metric_lower_bound(p, {1.0}, 16);
  EXPECT_NEAR(r.delta, 0.5, 1e-3);
  EXPECT_GE(r.tangential_min, 1.5336490345629144 - kExpMetricSlack);
  EXPECT_GT(r.min_ratio, 1.0);
  EXPECT_TRUE(r.passed);
  EXPECT_THROW(exp_metric_lower_bound(surfaces::horosphere(s, 17, 1.0), {1.0}, 4), GeometryError);
}
