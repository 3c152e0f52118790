#include "afp/uniqueness.hpp"

#include "afp/normal_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace afp {

std::vector<InitSpec> default_inits(const UniquenessOptions& opt) {
  std::vector<InitSpec> inits;
  for (int i = 0; i < opt.starts; ++i) {
    InitSpec s;
    if (i == 1) {
      s.kind = InitSpec::Kind::Graph;
    } else if (i >= 2) {
      s.kind = InitSpec::Kind::Perturbed;
      s.seed = opt.seed + static_cast<std::uint64_t>(i - 2);
      s.amplitude = opt.amplitude;
    }
    inits.push_back(s);
  }
  return inits;
}

UniquenessRun uniqueness_experiment(const PlateauProblem& problem, const UniquenessOptions& opt) {
  if (opt.starts < 2) throw std::invalid_argument("uniqueness_experiment: need at least two starts");
  problem.validate();

  UniquenessRun run;
  UniquenessReport& rep = run.report;
  const KleinHull hull = build_hull(problem.curve.sample(opt.hull_samples));

  rep.all_converged = true;
  rep.barrier_ok = true;
  rep.barrier_margin = -std::numeric_limits<double>::infinity();
  for (const InitSpec& init : default_inits(opt)) {
    FlowState st = solve(problem, init);
    StartResult s;
    s.init = init.str();
    s.status = st.status;
    s.iterations = st.iteration;
    s.residual = st.residual;
    s.verified_residual = st.verified_residual;
    s.sup_second_form = st.sup_second_form;
    s.area = st.area;
    s.pinching_passed = st.pinching.passed;
    s.diagnostics = st.diagnostics;
    const BarrierReport b = barrier_check(hull, st.patch, opt.barrier_tol);
    s.barrier_margin = b.max_margin;
    rep.barrier_margin = std::max(rep.barrier_margin, b.max_margin);
    rep.barrier_ok = rep.barrier_ok && b.passed;
    if (!st.converged()) {
      rep.all_converged = false;
      rep.notes.push_back("start " + s.init + " did not converge: " + to_string(st.status) +
                          (st.diagnostics.empty() ? "" : " (" + st.diagnostics + ")"));
    } else {
      rep.sup_second_form = std::max(rep.sup_second_form, st.sup_second_form);
    }
    rep.starts.push_back(s);
    run.states.push_back(std::move(st));
  }

  rep.almost_fuchsian = rep.sup_second_form < 1.0;
  rep.delta = 1.0 - rep.sup_second_form;
  rep.epsilon = rep.delta;
  if (!rep.almost_fuchsian) {
    rep.notes.push_back("outside almost-fuchsian regime; uniqueness not asserted");
    rep.r_paper = rep.r_spectral = std::numeric_limits<double>::quiet_NaN();
    rep.c_est = std::numeric_limits<double>::quiet_NaN();
  } else {
    const ConvexityRadius cr = convexity_radius(rep.sup_second_form);
    rep.r_paper = cr.r_paper;
    rep.r_spectral = cr.r_spectral;
    rep.c_est = estimate_c(2, rep.sup_second_form).c_est;
  }
  if (!rep.all_converged) {
    rep.notes.push_back("partial report: comparisons skipped");
    return run;
  }

  for (std::size_t a = 0; a < run.states.size(); ++a) {
    for (std::size_t b = a + 1; b < run.states.size(); ++b) {
      rep.hausdorff = std::max(rep.hausdorff, hausdorff(run.states[a].patch, run.states[b].patch));
    }
  }
  if (!rep.almost_fuchsian) return run;

  const ParametricPatch& ref = run.states[0].patch;
  rep.bounded_ok = true;
  rep.subharmonicity_fraction = 1.0;
  rep.subharmonicity_margin = std::numeric_limits<double>::infinity();
  for (std::size_t a = 1; a < run.states.size(); ++a) {
    const auto bd = bounded_distance_check(run.states[a].patch, ref, 1e-6, rep.sup_second_form);
    rep.max_distance = std::max(rep.max_distance, bd.max_distance);
    rep.bounded_ok = rep.bounded_ok && bd.passed;
    const auto sh = subharmonicity_check(run.states[a].patch, ref, rep.c_est, false);
    rep.subharmonicity_fraction = std::min(rep.subharmonicity_fraction, sh.fraction);
    rep.subharmonicity_margin = std::min(rep.subharmonicity_margin, sh.min_margin);
    rep.subharmonicity_tol = std::max(rep.subharmonicity_tol, sh.tol);
  }
  return run;
}

}  // namespace afp
