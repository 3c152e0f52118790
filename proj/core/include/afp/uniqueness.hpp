#pragma once

// Multi-start experiment: solve one Plateau problem from several initial
// surfaces and compare the limits (Hausdorff distance, bounded distance,
// convex-hull barrier, subharmonicity of the squared distance).

#include "afp/patch_distance.hpp"
#include "afp/plateau.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace afp {

struct StartResult {
  std::string init;
  FlowStatus status = FlowStatus::MaxIterations;
  int iterations = 0;
  double residual = 0.0;
  double verified_residual = 0.0;
  double sup_second_form = 0.0;
  double area = 0.0;
  bool pinching_passed = false;
  double barrier_margin = 0.0;
  std::string diagnostics;
};

struct UniquenessReport {
  std::vector<StartResult> starts;
  bool all_converged = false;
  double sup_second_form = 0.0;  // max over converged starts
  double delta = 0.0;
  double epsilon = 0.0;
  double r_paper = 0.0;
  double r_spectral = 0.0;
  bool almost_fuchsian = false;
  double hausdorff = 0.0;     // max pairwise, collar excluded
  double max_distance = 0.0;  // max over starts of the bounded-distance check against start 0
  bool bounded_ok = false;
  double c_est = 0.0;
  double subharmonicity_fraction = 0.0;  // min over starts >= 1
  double subharmonicity_margin = 0.0;    // min of Laplacian u - C u
  double subharmonicity_tol = 0.0;
  double barrier_margin = 0.0;           // max over starts
  bool barrier_ok = false;
  std::vector<std::string> notes;
};

struct UniquenessOptions {
  int starts = 3;
  std::uint64_t seed = 7;
  double amplitude = 0.2;
  int hull_samples = 256;
  double barrier_tol = 2e-3;
};

/// Start 0 is the cone, start 1 the graph, later starts are seeded perturbations
/// (seed, seed + 1, ...).
std::vector<InitSpec> default_inits(const UniquenessOptions& opt);

struct UniquenessRun {
  UniquenessReport report;
  std::vector<FlowState> states;
};

UniquenessRun uniqueness_experiment(const PlateauProblem& problem, const UniquenessOptions& opt);

}  // namespace afp
