#include "afp/normal_flow.hpp"
#include "afp/patch_distance.hpp"
#include "afp/plateau.hpp"
#include "afp/test_surfaces.hpp"
#include "afp/uniqueness.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace afp;
using afp::testing::vec;

namespace {

PlateauProblem problem(const std::string& curve, double radius = 4.0, int n_r = 32, int n_theta = 64) {
  PlateauProblem p;
  p.curve = IdealCurve::parse(curve);
  p.radius = radius;
  p.n_r = n_r;
  p.n_theta = n_theta;
  return p;
}

// Solves are shared between tests; each is a few hundred milliseconds.
const FlowState& circle_cone() {
  static const FlowState s = solve(problem("circle"), InitSpec::parse("cone"));
  return s;
}

const FlowState& wavy_cone() {
  static const FlowState s = solve(problem("wavy:3:0.1"), InitSpec::parse("cone"));
  return s;
}

double plane_distance(const ModelSpace& s, const ParametricPatch& p) {
  double worst = 0.0;
  for (const auto& x : p.points()) worst = std::max(worst, std::asinh(s.sqrt_kappa() * std::abs(x.x[3])) / s.sqrt_kappa());
  return worst;
}

}  // namespace

TEST(InitSpec, ParseAndFormat) {
  EXPECT_EQ(InitSpec::parse("cone").kind, InitSpec::Kind::Cone);
  EXPECT_EQ(InitSpec::parse("graph").kind, InitSpec::Kind::Graph);
  const InitSpec p = InitSpec::parse("perturbed:7:0.2");
  EXPECT_EQ(p.kind, InitSpec::Kind::Perturbed);
  EXPECT_EQ(p.seed, 7u);
  EXPECT_EQ(p.amplitude, 0.2);
  EXPECT_EQ(p.str(), "perturbed:7:0.2");
  EXPECT_THROW(InitSpec::parse("sphere"), std::invalid_argument);
}

TEST(PlateauProblem, Validation) {
  EXPECT_THROW(problem("circle", 21.0).validate(), std::invalid_argument);
  EXPECT_THROW(problem("circle", 4.0, 2, 64).validate(), std::invalid_argument);
  PlateauProblem p = problem("circle");
  p.flow.tol_h = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(InitialSurface, RingIsPinned) {
  const PlateauProblem pr = problem("wavy:3:0.1");
  const ParametricPatch p = initial_surface(pr, InitSpec::parse("perturbed:3:0.2"));
  for (int j = 0; j < pr.n_theta; ++j) {
    const HyperboloidPoint& x = p.point(p.flat(pr.n_r, j));
    const IdealPoint dir = pr.curve.at(2 * M_PI * j / pr.n_theta);
    EXPECT_LT((x.x - pr.space.toward_ideal(dir, pr.radius).x).norm(), 1e-12);
  }
}

TEST(Solve, CircleConvergesToGeodesicDisc) {
  const FlowState& s = circle_cone();
  ASSERT_TRUE(s.converged()) << s.diagnostics;
  EXPECT_LT(s.residual, 1e-4);
  EXPECT_LT(plane_distance(s.patch.space(), s.patch), 1e-3);
  const KleinHull h = build_hull(IdealCurve::parse("circle").sample(256));
  EXPECT_TRUE(barrier_check(h, s.patch, 2e-3).passed);
}

TEST(Solve, CirclePerturbedStartReachesSameLimit) {
  const FlowState p = solve(problem("circle"), InitSpec::parse("perturbed:7:0.2"));
  ASSERT_TRUE(p.converged()) << p.diagnostics;
  EXPECT_LT(hausdorff(p.patch, circle_cone().patch), 2e-3);
  EXPECT_LT(plane_distance(p.patch.space(), p.patch), 1e-3);
}

TEST(Solve, WavyIsAlmostFuchsianAndMinimal) {
  const FlowState& s = wavy_cone();
  ASSERT_TRUE(s.converged()) << s.diagnostics;
  EXPECT_LT(s.sup_second_form, 1.0);
  for (std::size_t v : s.patch.interior_vertices()) {
    EXPECT_LT(std::abs(shape_spectrum(fundamental_forms(s.patch, v), 0).sum()), 10 * 1e-4);
  }
  const KleinHull h = build_hull(IdealCurve::parse("wavy:3:0.1").sample(256));
  EXPECT_TRUE(barrier_check(h, s.patch, 2e-3).passed);
}

TEST(Solve, ResidualAndAreaAlongTheFlow) {
  const FlowState s = solve(problem("wavy:3:0.1"), InitSpec::parse("graph"));
  ASSERT_TRUE(s.converged());
  ASSERT_GE(s.history.size(), 2u);
  double last_area = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < s.history.size(); ++i) {
    EXPECT_LE(s.history[i].residual, s.history[i - 1].residual);
    if (!std::isnan(s.history[i].area)) {
      EXPECT_LE(s.history[i].area, last_area * (1 + 1e-9));
      last_area = s.history[i].area;
    }
  }
  EXPECT_LT(s.area, discrete_area(initial_surface(problem("wavy:3:0.1"), InitSpec::parse("graph"))));
}

TEST(Solve, SolverAndVerifierResidualsAgree) {
  const FlowState& s = wavy_cone();
  EXPECT_LT(s.verified_residual, 10 * 1e-4);
  EXPECT_NEAR(s.verified_residual, s.residual, 0.5 * s.residual + 1e-6);
  for (std::size_t v : s.patch.interior_vertices()) {
    if (s.patch.is_center(v) || v >= static_cast<std::size_t>(s.patch.flat(31, 0))) continue;
    const double a = mink_norm(plateau_mean_curvature(s.patch, v));
    const double b = mink_norm(mean_curvature_vector(s.patch, v).v);
    EXPECT_NEAR(a, b, 1e-4);
  }
}

TEST(Solve, JacobiPreconditionerStillSelectable) {
  PlateauProblem pr = problem("circle", 3.0, 12, 24);
  pr.flow.preconditioner = Preconditioner::Jacobi;
  pr.flow.max_iterations = 50;
  const FlowState s = solve(pr, InitSpec::parse("cone"));
  EXPECT_LE(s.iteration, 50);
  EXPECT_TRUE(s.converged());  // the cone over a great circle is already flat
}

TEST(Solve, TruncationStability) {
  const FlowState& core = wavy_cone();
  const FlowState wide = solve(problem("wavy:3:0.1", 5.0, 40, 64), InitSpec::parse("cone"));
  ASSERT_TRUE(wide.converged());
  double one_sided = 0.0;
  for (std::size_t v : collar_interior(core.patch)) {
    one_sided = std::max(one_sided, distance_to_patch(core.patch.point(v), wide.patch).distance);
  }
  EXPECT_LT(one_sided, 5e-3);
}

TEST(Solve, HistoryCsv) {
  std::ostringstream out;
  write_history_csv(circle_cone(), out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "iteration,residual,max_displacement,factor,area");
}

TEST(DistanceToPatch, OnPatchAndAlongNormal) {
  std::mt19937_64 rng(51);
  const ModelSpace s(3);
  const ParametricPatch y = surfaces::geodesic_plane(s, 33, 1.5);
  for (int i = 0; i < 20; ++i) {
    const double u = afp::testing::uniform(rng, -1.0, 1.0), w = afp::testing::uniform(rng, -1.0, 1.0);
    const HyperboloidPoint x = surfaces::geodesic_plane_point(s, u, w);
    EXPECT_NEAR(distance_to_patch(x, y).distance, 0.0, 1e-8);
    const double t = afp::testing::uniform(rng, 0.05, 1.0);
    const PatchFoot f = distance_to_patch(s.geodesic(TangentVector{x, vec({0, 0, 0, 1})}, t), y);
    EXPECT_NEAR(f.distance, t, 1e-6);
    EXPECT_FALSE(f.clipped);
  }
}

TEST(DistanceToPatch, RotationSymmetryOfTheDisc) {
  const FlowState& disc = circle_cone();
  const ModelSpace& s = disc.patch.space();
  const HyperboloidPoint x = s.from_klein(vec({0.3, 0.1, 0.2}));
  const double d0 = distance_to_patch(x, disc.patch).distance;
  for (int j = 1; j < 8; ++j) {
    const auto r = LorentzTransform::rotation(3, 1, 2, 2 * M_PI * j / 64);
    EXPECT_NEAR(distance_to_patch(r.apply(x), disc.patch).distance, d0, 1e-8);
  }
}

TEST(Hausdorff, Examples) {
  const ModelSpace s(3);
  const ParametricPatch y = surfaces::geodesic_plane(s, 33, 1.0);
  EXPECT_NEAR(hausdorff(y, y), 0.0, 1e-12);
  for (double t : {0.1, 0.4}) EXPECT_NEAR(hausdorff(y, surfaces::equidistant(s, 33, 1.0, t)), t, 1e-3);
}

TEST(BoundedDistance, ExamplesAndNegativeControl) {
  const ModelSpace s(3);
  const ParametricPatch y = surfaces::equidistant(s, 33, 1.0, std::atanh(0.5));
  const BoundedDistanceReport self = bounded_distance_check(y, y);
  EXPECT_NEAR(self.max_distance, 0.0, 1e-12);
  EXPECT_TRUE(self.passed);
  const ParametricPatch plane = surfaces::geodesic_plane(s, 33, 1.0);
  const double r = convexity_radius(0.3).safe();
  const BoundedDistanceReport far = bounded_distance_check(surfaces::equidistant(s, 33, 1.0, 2 * r), plane, 1e-6, 0.3);
  EXPECT_NEAR(far.radius, r, 1e-12);
  EXPECT_NEAR(far.max_distance, 2 * r, 1e-3);
  EXPECT_FALSE(far.passed);
}

TEST(Phi, Values) {
  for (int k : {2, 3}) EXPECT_EQ(phi_inf(0.0, k, 0.5).value, 0.0);
  const PhiResult p = phi_inf(0.5, 2, 0.5);
  EXPECT_NEAR(p.value, 0.7322702276912715, 1e-8);
  EXPECT_NEAR(p.reduction, 0.7322702276912715, 1e-8);
  EXPECT_NEAR(std::abs(p.minimizer[0]), 0.5, 1e-4);
  for (double sup : {0.3, 0.5, 0.7}) {
    for (double d : {0.1, 0.5, 1.0}) {
      const double tau = std::tanh(d);
      EXPECT_NEAR(phi_inf(d, 2, sup).value, 2 * tau * (1 - sup * sup) / (1 - sup * sup * tau * tau), 1e-8);
    }
  }
}

TEST(Phi, SlopePositivityAndOracleAgreement) {
  for (int k : {2, 3}) {
    for (double sup : {0.3, 0.5, 0.7}) {
      const double h = 1e-3;
      EXPECT_GE(phi_inf(h, k, sup).value / h, k * (1 - sup * sup) - 1e-2);
      const double r = convexity_radius(sup).safe();
      for (int i = 1; i <= 10; ++i) {
        const PhiResult p = phi_inf(r * i / 10, k, sup);
        EXPECT_GT(p.value, 0.0);
        EXPECT_NEAR(p.brute, p.polished, 1e-4);
      }
    }
  }
  EXPECT_THROW(phi_inf(0.5, 1, 0.5), std::invalid_argument);
  EXPECT_THROW(phi_inf(0.5, 2, 1.0), std::invalid_argument);
}

TEST(Phi, CEstimate) {
  const CEstimate c = estimate_c(2, 0.5);
  EXPECT_GT(c.c_est, 0.0);
  EXPECT_NEAR(c.radius, 0.5493061443340548, 1e-12);
  EXPECT_LE(c.c_est, 2 * phi_inf(c.radius, 2, 0.5).value / c.radius + 1e-9);
}

TEST(Subharmonicity, SelfAndEquidistantCrosscheck) {
  const ModelSpace s(3);
  const ParametricPatch y = surfaces::geodesic_plane(s, 33, 1.0);
  const SubharmonicityReport self = subharmonicity_check(y, y, 1.0);
  EXPECT_NEAR(self.max_u, 0.0, 1e-24);
  EXPECT_TRUE(self.passed);
  const SubharmonicityReport eq = subharmonicity_check(surfaces::equidistant(s, 33, 1.0, 0.3), y, 1.0);
  EXPECT_NEAR(eq.max_u, 0.09, 1e-6);
  EXPECT_GT(eq.crosscheck_vertices, 0u);
  EXPECT_TRUE(eq.crosscheck_ok);
}

TEST(Subharmonicity, MinimalSurfaceOverGeodesicDisc) {
  // Z minimal over a wavy curve, Y the flat disc: u is a genuine separation here
  const FlowState& z = wavy_cone();
  const FlowState& y = circle_cone();
  const CEstimate c = estimate_c(2, y.sup_second_form);
  const SubharmonicityReport r = subharmonicity_check(z.patch, y.patch, c.c_est);
  EXPECT_GT(r.max_u, 1.0);
  EXPECT_GT(r.checked, 1000u);
  EXPECT_EQ(r.fraction, 1.0);
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.interior_max_ok);
  EXPECT_TRUE(r.crosscheck_ok);
  EXPECT_LT(r.crosscheck_max_rel, kCrosscheckRelTol);
}

TEST(Uniqueness, DefaultInits) {
  UniquenessOptions o;
  o.starts = 4;
  const auto inits = default_inits(o);
  ASSERT_EQ(inits.size(), 4u);
  EXPECT_EQ(inits[0].str(), "cone");
  EXPECT_EQ(inits[1].str(), "graph");
  EXPECT_EQ(inits[2].str(), "perturbed:7:0.2");
  EXPECT_EQ(inits[3].str(), "perturbed:8:0.2");
}

TEST(Uniqueness, CircleScenario) {
  UniquenessOptions o;
  const UniquenessRun run = uniqueness_experiment(problem("circle", 4.0, 16, 32), o);
  const UniquenessReport& r = run.report;
  EXPECT_TRUE(r.all_converged);
  EXPECT_TRUE(r.almost_fuchsian);
  EXPECT_LT(r.sup_second_form, 1e-2);
  EXPECT_LT(r.hausdorff, 2e-3);
  EXPECT_LT(r.barrier_margin, 2e-3);
  EXPECT_TRUE(r.bounded_ok);
}

TEST(Uniqueness, GateOutsideAlmostFuchsianRegime) {
  UniquenessOptions o;
  o.starts = 2;
  const UniquenessRun run = uniqueness_experiment(problem("wavy:2:0.7", 4.0, 16, 32), o);
  const UniquenessReport& r = run.report;
  ASSERT_TRUE(r.all_converged);
  EXPECT_GE(r.sup_second_form, 1.0);
  EXPECT_FALSE(r.almost_fuchsian);
  EXPECT_TRUE(std::isnan(r.r_paper));
  EXPECT_NE(std::find(r.notes.begin(), r.notes.end(), "outside almost-fuchsian regime; uniqueness not asserted"),
            r.notes.end());
}
