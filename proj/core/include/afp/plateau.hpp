#pragma once

// Discrete asymptotic Plateau problem in H^3: a polar-grid disc whose outer
// ring is pinned on the radial geodesics towards an ideal curve at distance R
// from the origin, flowed along its mean curvature vector until |H| is small.

#include "afp/hull.hpp"
#include "afp/immersion.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace afp {

/// Jacobi: per-vertex diagonal scaling of H. Operator: H mapped through the
/// inverse of the discrete linearized mean-curvature operator (shifted to stay
/// positive), one sparse factorization per accepted step.
enum class Preconditioner { Jacobi, Operator };

struct FlowPolicy {
  Preconditioner preconditioner = Preconditioner::Operator;
  double tol_h = 1e-4;            // stop when sup |H| < tol_h
  int max_iterations = 100000;
  double initial_factor = 0.5;    // fraction of the preconditioned step
  double max_factor = 1.0;
  double growth = 1.1;            // factor growth after an accepted step
  double min_factor = 1e-6;       // below this the flow gives up
  double step_cap = 0.2;          // displacement <= step_cap / max(1, |lambda|)
  int stagnation_window = 500;
  double stagnation_gain = 1e-3;  // best residual must drop by this fraction per window
  int history_stride = 10;        // area is sampled every this many accepted steps
  int threads = 1;
};

struct PlateauProblem {
  ModelSpace space{3};
  IdealCurve curve = IdealCurve::parse("circle");
  double radius = 4.0;  // truncation radius R
  int n_r = 32;
  int n_theta = 64;
  FlowPolicy flow;

  void validate() const;
};

/// cone                 geodesic cone from the origin over the pinned ring
/// graph                normal graph over the plane z = 0, height growing like rho^2
/// perturbed:seed:amp   cone pushed along the projected e3 by a seeded low-mode field
struct InitSpec {
  enum class Kind { Cone, Graph, Perturbed };
  Kind kind = Kind::Cone;
  std::uint64_t seed = 0;
  double amplitude = 0.2;

  static InitSpec parse(const std::string& s);
  std::string str() const;
};

enum class FlowStatus { Converged, MaxIterations, Stagnated, StepUnderflow, Degenerate };

std::string to_string(FlowStatus s);

struct FlowRecord {
  int iteration = 0;
  double residual = 0.0;
  double max_displacement = 0.0;
  double factor = 0.0;
  double area = 0.0;  // NaN when not sampled
};

struct FlowState {
  explicit FlowState(ParametricPatch p) : patch(std::move(p)) {}

  ParametricPatch patch;
  FlowStatus status = FlowStatus::MaxIterations;
  double residual = 0.0;           // solver's sup |H| over free vertices
  double verified_residual = 0.0;  // same quantity from the fundamental-form pipeline
  int iteration = 0;
  int rejected = 0;
  std::vector<FlowRecord> history;
  double area = 0.0;
  double sup_second_form = 0.0;
  PinchingReport pinching;
  std::string diagnostics;

  bool converged() const { return status == FlowStatus::Converged; }
};

/// Polar patch with the Dirichlet ring pinned and the interior from the init.
ParametricPatch initial_surface(const PlateauProblem& problem, const InitSpec& init);

FlowState solve(const PlateauProblem& problem, const InitSpec& init);
/// Continues the flow from an arbitrary polar patch of the problem's shape.
FlowState solve_from(const PlateauProblem& problem, ParametricPatch start);

/// Sum of hyperbolic triangle areas over the grid cells (two triangles per quad).
double discrete_area(const ParametricPatch& patch);

/// Solver-side mean curvature vector at a free vertex (normal projection of
/// g^{ij} d_ij x), for cross-checking against mean_curvature_vector.
Vec plateau_mean_curvature(const ParametricPatch& patch, std::size_t v);

/// CSV: iteration, residual, max_displacement, factor, area.
void write_history_csv(const FlowState& state, std::ostream& out);

}  // namespace afp
