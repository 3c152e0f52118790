#include "afp/immersion.hpp"
#include "afp/patch_io.hpp"
#include "afp/test_surfaces.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace afp;

namespace {

// Worst deviation of the principal curvatures from `expected` (up to the sign
// of the normal) over the interior.
double spectrum_error(const ParametricPatch& p, double expected) {
  double worst = 0.0;
  for (std::size_t v : p.interior_vertices()) {
    for (double l : shape_spectrum(fundamental_forms(p, v), 0).eigenvalues) {
      worst = std::max(worst, std::abs(std::abs(l) - expected));
    }
  }
  return worst;
}

}  // namespace

TEST(FundamentalForms, GeodesicPlane) {
  const ModelSpace s(3);
  const ParametricPatch p = surfaces::geodesic_plane(s, 33, 1.5);
  for (std::size_t v : p.interior_vertices()) {
    const FundamentalForms f = fundamental_forms(p, v);
    EXPECT_LT(f.second[0].cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LT(mink_norm(mean_curvature_vector(f).v), 1e-5);
  }
  EXPECT_LT(sup_second_form(p).sup, 1e-5);
}

TEST(FundamentalForms, EquidistantSecondFormIsTanhMetric) {
  const ModelSpace s(3);
  const double t = 0.5;
  const ParametricPatch p = surfaces::equidistant(s, 129, 1.0, t);
  for (std::size_t v : p.interior_vertices()) {
    const FundamentalForms f = fundamental_forms(p, v);
    const SmallMatrix diff = f.second[0].cwiseAbs() - std::tanh(t) * f.first.cwiseAbs();
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_NEAR(mink_norm(mean_curvature_vector(f).v), 2 * std::tanh(t), 1e-3);
    const double e1[2] = {1, 0}, e2[2] = {0, 1};
    EXPECT_NEAR(induced_sectional_curvature(s, f, e1, e2), -1 + std::tanh(t) * std::tanh(t), 1e-3);
  }
  EXPECT_LT(spectrum_error(p, std::tanh(t)), 1e-4);
  EXPECT_NEAR(sup_second_form(p).sup, std::tanh(t), 1e-4);
}

TEST(FundamentalForms, Horosphere) {
  const ModelSpace s(3);
  const ParametricPatch p = surfaces::horosphere(s, 33, 1.0);
  EXPECT_LT(spectrum_error(p, 1.0), 1e-4);
  for (std::size_t v : p.interior_vertices()) {
    EXPECT_NEAR(mink_norm(mean_curvature_vector(p, v).v), 2.0, 1e-3);
  }
  const SecondFormBound b = sup_second_form(p);
  EXPECT_NEAR(b.sup, 1.0, 1e-4);
  EXPECT_EQ(pinching_check(p).applicable, b.sup < 1.0);
}

TEST(FundamentalForms, SecondOrderConvergence) {
  const ModelSpace s(3);
  const double t = 0.7;
  const double coarse = spectrum_error(surfaces::equidistant(s, 17, 2.0, t), std::tanh(t));
  const double fine = spectrum_error(surfaces::equidistant(s, 33, 2.0, t), std::tanh(t));
  EXPECT_GT(coarse / fine, 3.0);
}

TEST(FundamentalForms, IsometryInvariance) {
  std::mt19937_64 rng(21);
  const ModelSpace s(3);
  const ParametricPatch p = surfaces::equidistant(s, 17, 1.0, 0.3);
  const auto m = LorentzTransform::boost(3, 2, 0.8).then(LorentzTransform::rotation(3, 1, 2, 1.1));
  std::vector<HyperboloidPoint> moved;
  for (const auto& x : p.points()) moved.push_back(m.apply(x));
  const ParametricPatch q(s, p.shape(), p.spacing(), moved, p.boundary_mask());
  for (std::size_t v : p.interior_vertices()) {
    const auto a = shape_spectrum(fundamental_forms(p, v), 0).eigenvalues;
    const auto b = shape_spectrum(fundamental_forms(q, v), 0).eigenvalues;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-8);
  }
}

TEST(FundamentalForms, MeanCurvatureIsTrace) {
  const ModelSpace s(3);
  const ParametricPatch p = surfaces::equidistant(s, 17, 1.0, -0.4);
  for (std::size_t v : p.interior_vertices()) {
    const FundamentalForms f = fundamental_forms(p, v);
    EXPECT_NEAR(mink_norm(mean_curvature_vector(f).v), std::abs(shape_spectrum(f, 0).sum()), 1e-8);
  }
}

TEST(FundamentalForms, HigherCodimensionAndDimension) {
  // Totally geodesic H^2 and H^3 inside H^4.
  const ModelSpace s(4);
  auto plane = [&](std::span<const double> u) {
    Vec x = Vec::Zero(5);
    x[0] = 1.0;
    for (std::size_t i = 0; i < u.size(); ++i) x[static_cast<Eigen::Index>(i) + 1] = u[i];
    return s.from_klein(x.tail(4));
  };
  const ParametricPatch p2 = ParametricPatch::sample(s, {9, 9}, {-0.4, -0.4}, {0.1, 0.1}, plane);
  const ParametricPatch p3 = ParametricPatch::sample(s, {7, 7, 7}, {-0.3, -0.3, -0.3}, {0.1, 0.1, 0.1}, plane);
  for (const auto* p : {&p2, &p3}) {
    const FundamentalForms f = fundamental_forms(*p, p->interior_vertices().front());
    EXPECT_EQ(f.normal_frame.size(), static_cast<std::size_t>(4 - p->dim()));
    EXPECT_LT(sup_second_form(*p).sup, 1e-8);
  }
}

TEST(InducedCurvature, GaussEquationOnPrescribedForms) {
  const ModelSpace s(3);
  FundamentalForms f;
  f.point = s.origin();
  f.first = SmallMatrix::Identity(2, 2);
  SmallMatrix second = SmallMatrix::Zero(2, 2);
  second(0, 0) = 0.5;
  second(1, 1) = -0.5;
  f.second = {second};
  f.tangent_frame = {afp::testing::vec({0, 1, 0, 0}), afp::testing::vec({0, 0, 1, 0})};
  const double e1[2] = {1, 0}, e2[2] = {0, 1};
  EXPECT_NEAR(induced_sectional_curvature(s, f, e1, e2), -1.25, 1e-12);
  EXPECT_THROW(induced_sectional_curvature(s, f, e1, e1), GeometryError);
}

TEST(InducedCurvature, BrioschiAgreesOnSmoothPatches) {
  const ModelSpace s(3);
  const double t = 0.6;
  const ParametricPatch p = surfaces::equidistant(s, 33, 1.0, t);
  const double e1[2] = {1, 0}, e2[2] = {0, 1};
  int checked = 0;
  for (std::size_t v : p.interior_vertices()) {
    bool full = true;
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const int off[2] = {di, dj};
        const auto nb = p.neighbor(v, off);
        full = full && nb && p.has_stencil(*nb);
      }
    }
    if (!full) continue;
    EXPECT_NEAR(intrinsic_curvature_brioschi(p, v), induced_sectional_curvature(p, v, e1, e2), 5e-3);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Pinching, TotallyGeodesicAndEquidistant) {
  const ModelSpace s(3);
  const PinchingReport g = pinching_check(surfaces::geodesic_plane(s, 17, 1.0));
  EXPECT_TRUE(g.applicable);
  EXPECT_TRUE(g.passed);
  EXPECT_NEAR(g.upper_bound, -1.0, 1e-5);
  EXPECT_NEAR(g.lower_bound, -1.0, 1e-5);

  // sup |II| = 0.5 gives the window [-1.5, -0.75]
  const PinchingReport e = pinching_check(surfaces::equidistant(s, 65, 1.0, std::atanh(0.5)));
  EXPECT_NEAR(e.sup_second_form, 0.5, 1e-3);
  EXPECT_NEAR(e.upper_bound, -0.75, 2e-3);
  EXPECT_NEAR(e.lower_bound, -1.5, 4e-3);
  const double eps = 1 - e.sup_second_form;
  EXPECT_DOUBLE_EQ(e.upper_bound, -eps * (2 - eps));
  EXPECT_DOUBLE_EQ(e.lower_bound, -1 - 2 * (1 - eps) * (1 - eps));
  EXPECT_TRUE(e.applicable);
  // not minimal: K = -0.75 breaks the surface bound K <= -1
  EXPECT_FALSE(e.passed);
  EXPECT_FALSE(e.violations.empty());
  EXPECT_GE(e.k_min, e.lower_bound);
  EXPECT_LE(e.k_max, e.upper_bound);
}

TEST(QuasiIsometry, GeodesicPlaneAndEquidistant) {
  const ModelSpace s(3);
  const QuasiIsometryReport g = quasi_isometry_check(surfaces::geodesic_plane(s, 17, 1.0), 200, 3);
  EXPECT_GE(g.min_ratio, 1.0 - 1e-9);
  EXPECT_LE(g.max_ratio, 1.05);
  EXPECT_TRUE(g.lower_ok && g.upper_ok);
  const QuasiIsometryReport e = quasi_isometry_check(surfaces::equidistant(s, 17, 1.0, 0.4), 200, 3);
  EXPECT_LE(e.max_ratio, e.upper_limit);
  EXPECT_THROW(quasi_isometry_check(surfaces::horosphere(s, 17, 1.0), 10, 1), GeometryError);
}

TEST(Patch, Validation) {
  const ModelSpace s(3);
  std::vector<HyperboloidPoint> pts(9, s.origin());
  EXPECT_THROW(ParametricPatch(s, {3, 3}, {0.1}, pts, std::vector<std::uint8_t>(9, 0)), std::invalid_argument);
  EXPECT_THROW(ParametricPatch(s, {3, 2}, {0.1, 0.1}, pts, std::vector<std::uint8_t>(9, 0)), std::invalid_argument);
  EXPECT_THROW(ParametricPatch(s, {3, 3}, {0.1, 0.1}, pts, std::vector<std::uint8_t>(8, 0)), std::invalid_argument);
  const ParametricPatch p = surfaces::geodesic_plane(s, 9, 1.0);
  EXPECT_THROW(local_jet(p, 0), std::out_of_range);
}

TEST(Patch, PolarCentreAndNeighbours) {
  const ModelSpace s(3);
  const ParametricPatch p = ParametricPatch::polar(s, 8, 16, 0.1, [&](double rho, double th) {
    return s.geodesic(s.tangent(s.origin(), afp::testing::vec({0, std::cos(th), std::sin(th), 0})), rho);
  });
  EXPECT_TRUE(p.is_center(p.flat(0, 5)));
  const auto interior = p.interior_vertices();
  EXPECT_EQ(std::count_if(interior.begin(), interior.end(), [&](std::size_t v) { return p.is_center(v); }), 1);
  const int wrap[2] = {0, 1};
  EXPECT_EQ(*p.neighbor(p.flat(3, 15), wrap), p.flat(3, 0));
  for (std::size_t v : interior) EXPECT_LT(mink_norm(mean_curvature_vector(p, v).v), 1e-6);
}

TEST(PatchIo, RoundTrip) {
  const ModelSpace s(3, 1.5);
  const ParametricPatch p = surfaces::equidistant(s, 9, 1.0, 0.2);
  const auto path = std::filesystem::temp_directory_path() / "afp_patch_roundtrip.json";
  write_patch(path, p);
  const ParametricPatch q = read_patch(path);
  std::filesystem::remove(path);
  ASSERT_EQ(q.size(), p.size());
  EXPECT_EQ(q.space().kappa(), 1.5);
  EXPECT_EQ(q.shape(), p.shape());
  EXPECT_EQ(q.boundary_mask(), p.boundary_mask());
  for (std::size_t v = 0; v < p.size(); ++v) EXPECT_EQ(q.point(v).x, p.point(v).x);
  EXPECT_THROW(patch_from_json(Json{{"format", "other"}}), std::invalid_argument);
}
