#include "cli.hpp"

#include "afp/hadamard.hpp"
#include "afp/hull.hpp"
#include "afp/immersion.hpp"
#include "afp/normal_flow.hpp"
#include "afp/patch_distance.hpp"
#include "afp/patch_io.hpp"
#include "afp/plateau.hpp"
#include "afp/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>

#ifndef AFP_VERSION
#define AFP_VERSION "0.0.0"
#endif

namespace afp::cli {
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Context {
  const Config& cfg;
  fs::path dir;
  std::ostream& log;
  Outcome out;

  double real(const char* k) const { return cfg.params.at(k).get<double>(); }
  int integer(const char* k) const { return static_cast<int>(cfg.params.at(k).get<long long>()); }
  std::string text(const char* k) const { return cfg.params.at(k).get<std::string>(); }
  std::vector<double> list(const char* k) const { return cfg.params.at(k).get<std::vector<double>>(); }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    out.artifacts.push_back(name);
    return f;
  }
  void write(const std::string& name, const Json& j) {
    write_json_file(dir / name, j);
    out.artifacts.push_back(name);
  }
  void write(const std::string& name, const ParametricPatch& p) {
    write_patch(dir / name, p);
    out.artifacts.push_back(name);
  }
};

// Null for non-finite values so reports stay valid JSON.
Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string cell(double x) { return std::isfinite(x) ? format_double(x) : std::string(); }

PlateauProblem problem_from(const Context& c) {
  PlateauProblem p;
  p.curve = IdealCurve::parse(c.text("boundary"));
  p.radius = c.real("R");
  p.n_r = c.integer("n_r");
  p.n_theta = c.integer("n_theta");
  p.flow.tol_h = c.real("tol_h");
  p.flow.max_iterations = c.integer("max_iterations");
  p.flow.threads = c.cfg.threads;
  const std::string pre = c.text("preconditioner");
  if (pre == "operator") {
    p.flow.preconditioner = Preconditioner::Operator;
  } else if (pre == "jacobi") {
    p.flow.preconditioner = Preconditioner::Jacobi;
  } else {
    throw ConfigError("preconditioner must be 'operator' or 'jacobi'");
  }
  p.validate();
  return p;
}

Json pinching_json(const PinchingReport& r) {
  Json j;
  j["applicable"] = r.applicable;
  j["sup_second_form"] = num(r.sup_second_form);
  j["epsilon"] = num(r.epsilon);
  j["lower_bound"] = num(r.lower_bound);
  j["upper_bound"] = num(r.upper_bound);
  j["surface_lower_bound"] = num(r.surface_lower_bound);
  j["surface_upper_bound"] = num(r.surface_upper_bound);
  j["k_min"] = num(r.k_min);
  j["k_max"] = num(r.k_max);
  j["vertices_checked"] = r.vertices_checked;
  j["violations"] = r.violations.size();
  j["passed"] = r.passed;
  return j;
}

Json state_json(const FlowState& s) {
  Json j;
  j["status"] = to_string(s.status);
  j["iterations"] = s.iteration;
  j["rejected"] = s.rejected;
  j["residual"] = num(s.residual);
  j["verified_residual"] = num(s.verified_residual);
  j["area"] = num(s.area);
  j["sup_second_form"] = num(s.sup_second_form);
  j["pinching"] = pinching_json(s.pinching);
  j["diagnostics"] = s.diagnostics;
  return j;
}

void write_history(Context& c, const std::string& name, const FlowState& s) {
  auto f = c.open(name);
  write_history_csv(s, f);
}

void fail_numerically(Context& c, std::string why) {
  c.out.numerical_failure = true;
  if (!c.out.diagnostics.empty()) c.out.diagnostics += "; ";
  c.out.diagnostics += why;
}

// ---------------------------------------------------------------- commands

void jacobi_check(Context& c) {
  const double kappa = c.real("kappa");
  const TransferTrace tr = jacobi_transfer(c.real("alpha"), c.real("beta"), c.real("T"), kappa, c.real("step"));
  const TransferCheck chk = transfer_equation_check(tr, c.real("strict_from"));
  {
    auto f = c.open("trace.csv");
    write_trace_csv(tr, f);
  }
  Json& r = c.out.results;
  r["max_rel_residual"] = num(chk.max_rel_residual);
  r["max_rel_unit_residual"] = num(chk.max_rel_unit_residual);
  r["min_sqrt_excess"] = num(chk.min_sqrt_excess);
  r["min_logf_combo"] = num(chk.min_logf_combo);
  r["final_f"] = num(tr.f.back());

  c.out.check("jacobi.ode_residual", "(sqrt f)'' = kappa sqrt f along the trace", chk.max_rel_residual < kTransferRelTol,
              chk.max_rel_residual, kTransferRelTol, kTransferRelTol - chk.max_rel_residual);
  if (kappa == 1.0) {
    c.out.check("jacobi.sqrt_identity", "(sqrt f)'' = sqrt f for kappa = 1", chk.unit_identity_ok,
                chk.max_rel_unit_residual, kTransferRelTol, kTransferRelTol - chk.max_rel_unit_residual);
  } else {
    c.out.check("jacobi.strict_branch", "(sqrt f)'' > sqrt f for kappa > 1", chk.strict_branch_ok, chk.min_sqrt_excess,
                0.0, chk.min_sqrt_excess);
  }
  c.out.check("jacobi.log_bound", "(ln f)'' + ((ln f)')^2 / 2 >= 2", chk.log_bound_ok, chk.min_logf_combo,
              2.0 - kLogComboTol, chk.min_logf_combo - (2.0 - kLogComboTol));
}

void equidistant_spectrum_cmd(Context& c) {
  std::vector<double> lambdas = c.list("lambdas");
  if (lambdas.empty()) throw ConfigError("lambdas must not be empty");
  std::sort(lambdas.begin(), lambdas.end());
  const double t = c.real("t"), kappa = c.real("kappa");
  const int n = c.integer("n");
  ShapeSpectrum base{lambdas};
  const EquidistantSpectrum e = equidistant_spectrum(base, t, n, kappa);

  double max_err = 0.0, max_tangential = -kInf;
  {
    auto f = c.open("spectrum.csv");
    f << "index,lambda,riccati,closed_form,abs_error\n";
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const double err = std::abs(e.tangential[i] - e.tangential_closed[i]);
      max_err = std::max(max_err, err);
      max_tangential = std::max(max_tangential, e.tangential[i]);
      f << i << ',' << format_double(lambdas[i]) << ',' << format_double(e.tangential[i]) << ','
        << format_double(e.tangential_closed[i]) << ',' << format_double(err) << '\n';
    }
  }
  Json& r = c.out.results;
  r["tangential"] = e.tangential;
  r["tangential_closed"] = e.tangential_closed;
  r["normal"] = e.normal;
  r["lambda_t"] = e.lambda_t;
  r["max_abs_error"] = max_err;

  constexpr double tol = 1e-7;
  c.out.check("equidistant.closed_form", "Riccati flow matches the Moebius closed form", max_err <= tol, max_err, tol,
              tol - max_err);
  const bool bounded_base = std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return std::abs(l) < 1.0; });
  if (bounded_base) {
    c.out.check("equidistant.tangential_bound", "tangential principal curvatures stay <= sqrt kappa",
                max_tangential <= std::sqrt(kappa) + 1e-12, max_tangential, std::sqrt(kappa),
                std::sqrt(kappa) - max_tangential);
  }
  if (kappa == 1.0 && bounded_base && static_cast<int>(lambdas.size()) < n) {
    const KConvexityReport k = k_convexity_check(base, t, n);
    r["k_convexity"] = {{"partial_sums", k.partial_sums},
                        {"lower_bounds", k.lower_bounds},
                        {"k_smallest_sum", k.k_smallest_sum},
                        {"min_slack", k.min_slack},
                        {"above_convexity_radius", k.above_convexity_radius}};
    c.out.check("equidistant.k_convexity", "partial sums of the equidistant spectrum dominate the closed-form bounds",
                k.passed, k.min_slack, -1e-9, k.min_slack + 1e-9);
  }

  const int nl = c.integer("sweep_lambdas"), nt = c.integer("sweep_times");
  if (nl > 0 && nt > 0) {
    const double lmax = c.real("lambda_max"), tmax = c.real("t_max");
    if (!(lmax >= 0.0 && lmax < 1.0) || !(tmax > 0.0)) throw ConfigError("sweep needs 0 <= lambda_max < 1, t_max > 0");
    double sweep_err = 0.0, sweep_max = -kInf;
    auto f = c.open("sweep.csv");
    f << "lambda,t,riccati,closed_form\n";
    for (int a = 0; a < nl; ++a) {
      const double l = nl == 1 ? 0.0 : -lmax + 2.0 * lmax * a / (nl - 1);
      for (int b = 1; b <= nt; ++b) {
        const double tt = tmax * b / nt;
        const double v = riccati_flow(l, tt, kappa), w = mobius_flow(l, tt, kappa);
        sweep_err = std::max(sweep_err, std::abs(v - w));
        sweep_max = std::max(sweep_max, v);
        f << format_double(l) << ',' << format_double(tt) << ',' << format_double(v) << ',' << format_double(w) << '\n';
      }
    }
    r["sweep"] = {{"points", nl * nt}, {"max_abs_error", sweep_err}, {"max_value", sweep_max}};
    c.out.check("equidistant.sweep_closed_form", "Riccati flow matches the closed form over the sweep",
                sweep_err <= tol, sweep_err, tol, tol - sweep_err);
    c.out.check("equidistant.sweep_bound", "tangential values stay <= sqrt kappa over the sweep",
                sweep_max <= std::sqrt(kappa) + 1e-12, sweep_max, std::sqrt(kappa), std::sqrt(kappa) - sweep_max);
  }
}

void phi_table(Context& c) {
  const int k = c.integer("k"), steps = c.integer("steps");
  const double sup = c.real("sup_ii");
  if (steps < 1) throw ConfigError("steps must be positive");
  const ConvexityRadius cr = convexity_radius(sup);
  double dmax = c.real("d_max");
  if (dmax == 0.0) dmax = cr.safe();
  if (!(dmax > 0.0)) throw ConfigError("d_max must be positive");

  double phi0 = 0.0, min_pos = kInf, max_gap = 0.0;
  {
    auto f = c.open("phi.csv");
    f << "d,phi,phi_over_d,brute,polished,reduction\n";
    for (int i = 0; i <= steps; ++i) {
      const double d = dmax * i / steps;
      const PhiResult p = phi_inf(d, k, sup);
      if (i == 0) phi0 = p.value;
      else min_pos = std::min(min_pos, p.value);
      max_gap = std::max(max_gap, std::abs(p.brute - p.polished));
      f << format_double(d) << ',' << format_double(p.value) << ',' << (i == 0 ? "" : format_double(p.value / d))
        << ',' << format_double(p.brute) << ',' << format_double(p.polished) << ',' << cell(p.reduction) << '\n';
    }
  }
  constexpr double h = 1e-3;
  const double slope = phi_inf(h, k, sup).value / h;
  const double slope_bound = k * (1.0 - sup * sup) - 1e-2;
  const CEstimate ce = estimate_c(k, sup, c.integer("c_samples"));

  Json& r = c.out.results;
  r["d_max"] = dmax;
  r["r_paper"] = num(cr.r_paper);
  r["r_spectral"] = num(cr.r_spectral);
  r["phi_zero"] = phi0;
  r["min_positive"] = num(min_pos);
  r["slope_at_zero"] = slope;
  r["max_oracle_gap"] = max_gap;
  r["c_est"] = ce.c_est;
  r["c_argmin_d"] = ce.argmin_d;

  c.out.check("phi.zero", "Phi(0) = 0", std::abs(phi0) <= 1e-12, phi0, 0.0, 1e-12 - std::abs(phi0));
  c.out.check("phi.positive", "Phi(d) > 0 on (0, d_max]", min_pos > 0.0, min_pos, 0.0, min_pos);
  c.out.check("phi.slope", "forward slope at 0 >= k (1 - sup^2) - 1e-2", slope >= slope_bound, slope, slope_bound,
              slope - slope_bound);
  c.out.check("phi.oracle_agreement", "brute force and polished optimum agree within 1e-4", max_gap <= 1e-4, max_gap,
              1e-4, 1e-4 - max_gap);
}

void hull_check(Context& c) {
  const IdealCurve curve = IdealCurve::parse(c.text("boundary"));
  const KleinHull hull = build_hull(curve.sample(c.integer("hull_samples")));
  c.write("hull.json", hull_to_json(hull));
  Json& r = c.out.results;
  r["boundary"] = curve.name();
  r["rank"] = hull.rank;
  r["degenerate"] = hull.degenerate;
  r["facets"] = hull.facets.size();
  r["vertices"] = hull.vertices.size();
  r["thickness"] = hull.thickness;
  r["max_violation"] = hull.max_violation;
  constexpr double tol = 1e-9;
  c.out.check("hull.samples_inside", "every boundary sample lies in the hull", hull.max_violation <= tol,
              hull.max_violation, tol, tol - hull.max_violation);

  const std::string patch = c.text("patch");
  if (!patch.empty()) {
    const double btol = c.real("barrier_tol");
    const ParametricPatch p = read_patch(patch);
    const BarrierReport b = barrier_check(hull, p, btol);
    r["barrier"] = {{"vertices_checked", b.vertices_checked},
                    {"violations", b.violations},
                    {"max_margin", b.max_margin},
                    {"worst_vertex", b.worst_vertex}};
    c.out.check("hull.barrier", "free patch vertices lie in the Klein hull of the boundary", b.passed, b.max_margin, btol,
                btol - b.max_margin);
  }
}

void plateau_solve(Context& c) {
  const PlateauProblem problem = problem_from(c);
  const InitSpec init = InitSpec::parse(c.text("init"));
  c.log << "solving " << problem.curve.name() << " from " << init.str() << " on " << problem.n_r << "x"
        << problem.n_theta << "\n";
  const FlowState st = solve(problem, init);
  c.log << "  " << to_string(st.status) << " after " << st.iteration << " iterations, sup|H| = "
        << format_double(st.residual) << "\n";
  write_history(c, "history.csv", st);
  c.write("surface.json", st.patch);

  const KleinHull hull = build_hull(problem.curve.sample(c.integer("hull_samples")));
  const double btol = c.real("barrier_tol");
  const BarrierReport b = barrier_check(hull, st.patch, btol);

  Json& r = c.out.results;
  r["boundary"] = problem.curve.name();
  r["init"] = init.str();
  r["state"] = state_json(st);
  r["barrier_margin"] = b.max_margin;

  const double tol_h = problem.flow.tol_h;
  if (!st.converged()) fail_numerically(c, "flow did not converge: " + to_string(st.status) + " (" + st.diagnostics + ")");
  c.out.check("plateau.converged", "flow reaches sup |H| < tol_h", st.converged(), st.residual, tol_h,
              tol_h - st.residual);
  c.out.check("plateau.verified_residual", "independent mean-curvature evaluation agrees", st.verified_residual < tol_h,
              st.verified_residual, tol_h, tol_h - st.verified_residual);
  c.out.check("plateau.barrier", "surface lies in the Klein hull of its ideal boundary", b.passed, b.max_margin, btol,
              btol - b.max_margin);
  if (st.pinching.applicable) {
    c.out.check("plateau.pinching", "induced curvature lies in the pinching window", st.pinching.passed,
                st.pinching.k_max, st.pinching.upper_bound, st.pinching.upper_bound - st.pinching.k_max);
  }
  if (problem.curve.name() == "circle") {
    const double s = problem.space.sqrt_kappa();
    double worst = 0.0;
    for (const auto& p : st.patch.points()) worst = std::max(worst, std::asinh(s * std::abs(p.x[3])) / s);
    const double ptol = c.real("plane_tol");
    r["plane_distance"] = worst;
    c.out.check("plateau.exact_plane", "round boundary gives the totally geodesic disc", worst <= ptol, worst, ptol,
                ptol - worst);
  }
}

Json uniqueness_json(const UniquenessReport& u) {
  Json j;
  Json starts = Json::array();
  for (const auto& s : u.starts) {
    starts.push_back({{"init", s.init},
                      {"status", to_string(s.status)},
                      {"iterations", s.iterations},
                      {"residual", num(s.residual)},
                      {"verified_residual", num(s.verified_residual)},
                      {"sup_second_form", num(s.sup_second_form)},
                      {"area", num(s.area)},
                      {"pinching_passed", s.pinching_passed},
                      {"barrier_margin", num(s.barrier_margin)},
                      {"diagnostics", s.diagnostics}});
  }
  j["starts"] = starts;
  j["all_converged"] = u.all_converged;
  j["sup_second_form"] = num(u.sup_second_form);
  j["delta"] = num(u.delta);
  j["epsilon"] = num(u.epsilon);
  j["almost_fuchsian"] = u.almost_fuchsian;
  j["r_paper"] = num(u.r_paper);
  j["r_spectral"] = num(u.r_spectral);
  j["hausdorff"] = num(u.hausdorff);
  j["max_distance"] = num(u.max_distance);
  j["bounded_ok"] = u.bounded_ok;
  j["c_est"] = num(u.c_est);
  j["subharmonicity_fraction"] = num(u.subharmonicity_fraction);
  j["subharmonicity_margin"] = num(u.subharmonicity_margin);
  j["subharmonicity_tol"] = num(u.subharmonicity_tol);
  j["barrier_margin"] = num(u.barrier_margin);
  j["barrier_ok"] = u.barrier_ok;
  j["notes"] = u.notes;
  return j;
}

void uniqueness_cmd(Context& c) {
  const PlateauProblem problem = problem_from(c);
  UniquenessOptions opt;
  opt.starts = c.integer("starts");
  opt.seed = c.cfg.seed;
  opt.amplitude = c.real("amplitude");
  opt.hull_samples = c.integer("hull_samples");
  opt.barrier_tol = c.real("barrier_tol");
  c.log << "uniqueness: " << problem.curve.name() << ", " << opt.starts << " starts\n";
  const UniquenessRun run = uniqueness_experiment(problem, opt);
  const UniquenessReport& u = run.report;
  for (std::size_t i = 0; i < run.states.size(); ++i) {
    c.log << "  start " << u.starts[i].init << ": " << to_string(u.starts[i].status) << "\n";
    write_history(c, "history_" + std::to_string(i) + ".csv", run.states[i]);
    c.write("surface_" + std::to_string(i) + ".json", run.states[i].patch);
  }
  c.out.results = uniqueness_json(u);
  c.write("report.json", c.out.results);

  if (!u.all_converged) fail_numerically(c, "not every start converged");
  c.out.check("uniqueness.converged", "every start converges", u.all_converged, u.all_converged ? 1.0 : 0.0, 1.0,
              u.all_converged ? 0.0 : -1.0);
  c.out.check("uniqueness.almost_fuchsian", "limits have sup |II| < 1", u.almost_fuchsian, u.sup_second_form, 1.0,
              1.0 - u.sup_second_form, false);
  c.out.check("uniqueness.barrier", "every limit lies in the Klein hull", u.barrier_ok, u.barrier_margin,
              opt.barrier_tol, opt.barrier_tol - u.barrier_margin);
  const bool gate = u.all_converged && u.almost_fuchsian;
  const double htol = c.real("hausdorff_tol");
  c.out.check("uniqueness.hausdorff", "pairwise Hausdorff distance (collar excluded) is small", u.hausdorff < htol,
              u.hausdorff, htol, htol - u.hausdorff, gate);
  const double radius = std::max(u.r_paper, u.r_spectral);
  c.out.check("uniqueness.bounded_distance", "limits lie within the convexity radius of each other", u.bounded_ok,
              u.max_distance, radius, radius - u.max_distance, gate);
  const double need = c.real("subharmonic_fraction");
  c.out.check("uniqueness.subharmonicity", "Lap u >= C_est u - tol at the required fraction of vertices",
              u.subharmonicity_fraction >= need, u.subharmonicity_fraction, need, u.subharmonicity_fraction - need, gate);
}

void hessian_check(Context& c) {
  const double kappa = c.real("kappa");
  const ModelSpace space(c.integer("n"), kappa);
  double a = c.real("a"), b = c.real("b");
  if (a == 0.0) a = space.sqrt_kappa();
  if (b == 0.0) b = space.sqrt_kappa();
  const double tol = c.real("tol");
  const HyperboloidPoint p = space.origin();
  Vec dir = Vec::Zero(space.ambient_size());
  dir[1] = 1.0;

  double worst = 0.0;
  bool window = true;
  double window_margin = kInf;
  Json rows = Json::array();
  auto f = c.open("hessian.csv");
  f << "f,index,eigenvalue,exact,lower_bound,upper_bound\n";
  for (double dist : c.list("f")) {
    const HyperboloidPoint x = space.exp(space.tangent(p, dist * dir));
    const HessianReport h = distance_hessian_check(space, p, x, a, b);
    for (std::size_t i = 0; i < h.eigenvalues.size(); ++i) {
      const double e = h.eigenvalues[i];
      worst = std::max(worst, std::abs(e - h.exact));
      window_margin = std::min({window_margin, e - h.lower_bound, h.upper_bound - e});
      f << format_double(dist) << ',' << i << ',' << format_double(e) << ',' << format_double(h.exact) << ','
        << format_double(h.lower_bound) << ',' << format_double(h.upper_bound) << '\n';
    }
    window = window && h.within_lower && h.within_upper;
    rows.push_back({{"f", h.f},
                    {"radial_eigenvalue", h.radial_eigenvalue},
                    {"eigenvalues", h.eigenvalues},
                    {"exact", h.exact},
                    {"lower_bound", h.lower_bound},
                    {"upper_bound", h.upper_bound}});
  }
  c.out.results["a"] = a;
  c.out.results["b"] = b;
  c.out.results["rows"] = rows;
  c.out.results["max_abs_error"] = worst;
  c.out.check("hessian.exact", "orthocomplement eigenvalues equal sqrt(kappa) coth(sqrt(kappa) f)", worst <= tol, worst,
              tol, tol - worst);
  c.out.check("hessian.window", "eigenvalues lie in [a coth(a f), b coth(b f)]", window, window_margin,
              -kHessianBoundTol, window_margin + kHessianBoundTol);
}

void pinching_cmd(Context& c) {
  const std::string file = c.text("patch");
  ParametricPatch patch = [&] {
    if (!file.empty()) return read_patch(file);
    const PlateauProblem problem = problem_from(c);
    const FlowState st = solve(problem, InitSpec::parse(c.text("init")));
    c.log << "  " << to_string(st.status) << " after " << st.iteration << " iterations\n";
    c.out.results["state"] = state_json(st);
    if (!st.converged()) fail_numerically(c, "flow did not converge: " + to_string(st.status));
    c.write("surface.json", st.patch);
    return st.patch;
  }();

  const PinchingReport pr = pinching_check(patch);
  c.out.results["pinching"] = pinching_json(pr);

  // Gauss-equation curvature against -kappa - lambda^2; the metric-only
  // (Brioschi) curvature is reported alongside.
  const double kappa = patch.space().kappa();
  const double e1[2] = {1.0, 0.0}, e2[2] = {0.0, 1.0};
  double worst = 0.0, worst_intrinsic = 0.0;
  std::size_t checked = 0, intrinsic_checked = 0;
  auto f = c.open("curvature.csv");
  f << "vertex,i,j,gauss,minus_kappa_minus_lambda2,difference,intrinsic\n";
  for (std::size_t v : patch.interior_vertices()) {
    if (patch.is_center(v)) continue;
    const FundamentalForms forms = fundamental_forms(patch, v);
    const auto ev = shape_spectrum(forms, 0).eigenvalues;
    const double lam = 0.5 * (ev.back() - ev.front());
    const double kg = induced_sectional_curvature(patch.space(), forms, e1, e2);
    const double ke = -kappa - lam * lam;
    worst = std::max(worst, std::abs(kg - ke));
    ++checked;
    bool full = true;
    for (int di = -1; di <= 1 && full; ++di) {
      for (int dj = -1; dj <= 1 && full; ++dj) {
        const int off[2] = {di, dj};
        const auto nb = patch.neighbor(v, off);
        full = nb && patch.has_stencil(*nb) && !patch.is_center(*nb);
      }
    }
    double ki = std::numeric_limits<double>::quiet_NaN();
    if (full) {
      ki = intrinsic_curvature_brioschi(patch, v);
      worst_intrinsic = std::max(worst_intrinsic, std::abs(ki - kg));
      ++intrinsic_checked;
    }
    const GridIndex g = patch.index(v);
    f << v << ',' << g[0] << ',' << g[1] << ',' << format_double(kg) << ',' << format_double(ke) << ','
      << format_double(kg - ke) << ',' << cell(ki) << '\n';
  }
  const double gtol = c.real("gauss_tol");
  c.out.results["gauss_vertices"] = checked;
  c.out.results["gauss_max_difference"] = worst;
  c.out.results["intrinsic_vertices"] = intrinsic_checked;
  c.out.results["intrinsic_max_difference"] = worst_intrinsic;
  c.out.check("pinching.gauss_equation", "Gauss-equation curvature equals -kappa - lambda^2",
              checked > 0 && worst <= gtol, worst, gtol, gtol - worst);
  c.out.check("pinching.intrinsic", "metric-only curvature agrees with the Gauss equation", worst_intrinsic <= gtol,
              worst_intrinsic, gtol, gtol - worst_intrinsic, false);
  c.out.check("pinching.window", "curvature lies in the pinching window", pr.applicable && pr.passed, pr.k_max,
              pr.upper_bound, pr.upper_bound - pr.k_max, pr.applicable);
  if (pr.surface_case) {
    c.out.check("pinching.surface_upper", "surface curvature stays <= -kappa", pr.k_max <= -kappa + kPinchingTol,
                pr.k_max, -kappa, -kappa - pr.k_max, pr.applicable);
  }
}

const std::map<std::string, std::function<void(Context&)>> kDispatch = {
    {"jacobi-check", jacobi_check},   {"equidistant-spectrum", equidistant_spectrum_cmd},
    {"phi-table", phi_table},         {"hull-check", hull_check},
    {"plateau-solve", plateau_solve}, {"uniqueness", uniqueness_cmd},
    {"hessian-check", hessian_check}, {"pinching-check", pinching_cmd},
};

Json matrix_json(const Config& cfg, const Outcome& o) {
  Json checks = Json::array();
  bool all = true;
  for (const auto& ch : o.checks) {
    checks.push_back({{"id", ch.id},
                      {"statement", ch.statement},
                      {"asserted", ch.asserted},
                      {"passed", ch.passed},
                      {"value", num(ch.value)},
                      {"threshold", num(ch.threshold)},
                      {"margin", num(ch.margin)}});
    if (ch.asserted && !ch.passed) all = false;
  }
  return {{"format", "afp-verification"}, {"command", cfg.command}, {"all_passed", all}, {"checks", checks}};
}

}  // namespace

int run(const Config& cfg, std::ostream& log) {
  const auto it = kDispatch.find(cfg.command);
  if (it == kDispatch.end()) {
    log << "error: unknown command '" << cfg.command << "'\n";
    return kConfigError;
  }
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec || !fs::is_directory(cfg.output_dir)) {
    log << "error: cannot create output directory " << cfg.output_dir.string() << "\n";
    return kConfigError;
  }

  Context c{cfg, cfg.output_dir, log, {}};
  try {
    it->second(c);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    c.out.numerical_failure = true;
    c.out.diagnostics = e.what();
  }

  int status = kPass;
  for (const auto& ch : c.out.checks) {
    if (ch.asserted && !ch.passed) status = kCheckFailed;
  }
  if (c.out.numerical_failure) {
    status = kNumericalFailure;
    c.write("diagnostics.json", Json{{"command", cfg.command}, {"error", c.out.diagnostics}});
  }
  c.write("results.json", c.out.results);
  c.write("verification_matrix.json", matrix_json(cfg, c.out));
  Json manifest;
  manifest["format"] = "afp-manifest";
  manifest["version"] = AFP_VERSION;
  manifest["config"] = cfg.to_json();
  manifest["artifacts"] = c.out.artifacts;
  manifest["exit_status"] = status;
  write_json_file(cfg.output_dir / "manifest.json", manifest);

  for (const auto& ch : c.out.checks) {
    log << (ch.passed ? "PASS " : "FAIL ") << ch.id << (ch.asserted ? "" : " (reported)") << "  value "
        << format_double(ch.value) << "  margin " << format_double(ch.margin) << "\n";
  }
  if (c.out.numerical_failure) log << "numerical failure: " << c.out.diagnostics << "\n";
  return status;
}

}  // namespace afp::cli
