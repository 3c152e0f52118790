#include "afp/plateau.hpp"

#include "afp/parallel.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace afp {

namespace {

using V4 = Eigen::Vector4d;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double mink4(const V4& a, const V4& b) {
  return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double det3(const V4& a, const V4& b, const V4& c, int skip) {
  int idx[3];
  for (int i = 0, k = 0; i < 4; ++i) {
    if (i != skip) idx[k++] = i;
  }
  const double a0 = a[idx[0]], a1 = a[idx[1]], a2 = a[idx[2]];
  const double b0 = b[idx[0]], b1 = b[idx[1]], b2 = b[idx[2]];
  const double c0 = c[idx[0]], c1 = c[idx[1]], c2 = c[idx[2]];
  return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0);
}

struct VertexEval {
  V4 H = V4::Zero();
  V4 nu = V4::Zero();
  double hs = 0.0;        // H = hs nu
  double gi[3] = {0, 0, 0};  // inverse metric (11, 12, 22)
  double gam[2] = {0, 0};    // contracted Christoffel symbols g^{ab} Gamma^c_ab
  double a2 = 0.0;           // |II|^2
  double precond = 0.0;
  double lam = 0.0;      // max |principal curvature|
  double min_eig = 0.0;  // smallest eigenvalue of the metric
};

// Jet (first and second parameter derivatives) to mean curvature and the
// diagonal of the linearized operator.
VertexEval evaluate(const V4& P, const V4& Pa, const V4& Pb, const V4& Paa, const V4& Pab, const V4& Pbb,
                    double ha, double hb, double kappa) {
  VertexEval e;
  const V4 T1 = Pa + kappa * mink4(P, Pa) * P;
  const V4 T2 = Pb + kappa * mink4(P, Pb) * P;
  const double g11 = mink4(T1, T1), g12 = mink4(T1, T2), g22 = mink4(T2, T2);
  const double det = g11 * g22 - g12 * g12;
  const double half_tr = 0.5 * (g11 + g22);
  e.min_eig = half_tr - std::sqrt(std::max(0.0, half_tr * half_tr - det));
  if (!(e.min_eig > 1e-8)) return e;
  const double i11 = g22 / det, i12 = -g12 / det, i22 = g11 / det;

  V4 nu;
  for (int a = 0; a < 4; ++a) nu[a] = ((3 + a) % 2 == 0 ? 1.0 : -1.0) * det3(P, T1, T2, a);
  nu[0] = -nu[0];
  const double nn = mink4(nu, nu);
  if (!(nn > 0.0)) {
    e.min_eig = 0.0;
    return e;
  }
  nu /= std::sqrt(nn);
  const double b11 = mink4(Paa, nu), b12 = mink4(Pab, nu), b22 = mink4(Pbb, nu);
  const double hs = i11 * b11 + 2 * i12 * b12 + i22 * b22;
  e.H = hs * nu;
  e.nu = nu;
  e.hs = hs;
  e.gi[0] = i11;
  e.gi[1] = i12;
  e.gi[2] = i22;
  const V4 lap = i11 * Paa + 2 * i12 * Pab + i22 * Pbb;
  const double w1 = mink4(lap, T1), w2 = mink4(lap, T2);
  e.gam[0] = i11 * w1 + i12 * w2;
  e.gam[1] = i12 * w1 + i22 * w2;
  const double dS = (b11 * b22 - b12 * b12) / det;
  e.a2 = hs * hs - 2 * dS;
  const double disc = std::sqrt(std::max(0.0, 0.25 * hs * hs - dS));
  e.lam = std::abs(0.5 * hs) + disc;
  e.precond = 1.0 / (2.0 * (i11 / (ha * ha) + i22 / (hb * hb)));
  return e;
}

class PolarGrid {
 public:
  PolarGrid(int n_r, int n_theta, double hr, double kappa)
      : nr_(n_r), nt_(n_theta), hr_(hr), dt_(2 * std::numbers::pi / n_theta), kappa_(kappa) {}

  std::size_t at(int i, int j) const {
    j %= nt_;
    if (j < 0) j += nt_;
    return static_cast<std::size_t>(i) * nt_ + j;
  }

  VertexEval eval(const std::vector<V4>& X, int i, int j) const {
    if (i == 0) {
      V4 mean = V4::Zero(), c1 = V4::Zero(), s1 = V4::Zero(), c2 = V4::Zero(), s2 = V4::Zero();
      for (int q = 0; q < nt_; ++q) {
        const V4& p = X[at(1, q)];
        const double th = q * dt_;
        mean += p;
        c1 += std::cos(th) * p;
        s1 += std::sin(th) * p;
        c2 += std::cos(2 * th) * p;
        s2 += std::sin(2 * th) * p;
      }
      const double w = 2.0 / nt_;
      mean /= nt_;
      c1 *= w;
      s1 *= w;
      c2 *= w;
      s2 *= w;
      const V4& p0 = X[at(0, 0)];
      const double h2 = hr_ * hr_;
      return evaluate(p0, c1 / hr_, s1 / hr_, 2 * (mean - p0 + c2) / h2, 2 * s2 / h2, 2 * (mean - p0 - c2) / h2,
                      hr_, hr_, kappa_);
    }
    const V4& P = X[at(i, j)];
    const V4& rp = X[at(i + 1, j)];
    const V4& rm = X[at(i - 1, j)];
    const V4& tp = X[at(i, j + 1)];
    const V4& tm = X[at(i, j - 1)];
    const V4 mixed = (X[at(i + 1, j + 1)] - X[at(i + 1, j - 1)] - X[at(i - 1, j + 1)] + X[at(i - 1, j - 1)]) /
                     (4 * hr_ * dt_);
    return evaluate(P, (rp - rm) / (2 * hr_), (tp - tm) / (2 * dt_), (rp - 2 * P + rm) / (hr_ * hr_), mixed,
                    (tp - 2 * P + tm) / (dt_ * dt_), hr_, dt_, kappa_);
  }

  int nr() const { return nr_; }
  double hr() const { return hr_; }
  int nt() const { return nt_; }

 private:
  int nr_, nt_;
  double hr_, dt_, kappa_;
};

V4 exp4(const V4& P, const V4& w, double kappa) {
  const double L = std::sqrt(std::max(0.0, mink4(w, w)));
  const double sk = std::sqrt(kappa);
  V4 y = P;
  if (L > 0.0) y = std::cosh(sk * L) * P + (std::sinh(sk * L) / (sk * L)) * w;
  return y / std::sqrt(-kappa * mink4(y, y));
}

V4 to4(const Vec& v) { return V4(v[0], v[1], v[2], v[3]); }
Vec from4(const V4& v) {
  Vec out(4);
  out << v[0], v[1], v[2], v[3];
  return out;
}

double triangle_area(const V4& a, const V4& b, const V4& c, double kappa) {
  auto angle = [kappa](const V4& p, const V4& q, const V4& r) {
    const V4 u = q + kappa * mink4(p, q) * p;
    const V4 w = r + kappa * mink4(p, r) * p;
    const double uu = mink4(u, u), ww = mink4(w, w), uw = mink4(u, w);
    return std::atan2(std::sqrt(std::max(0.0, uu * ww - uw * uw)), uw);
  };
  if ((a - b).norm() == 0.0 || (b - c).norm() == 0.0 || (a - c).norm() == 0.0) return 0.0;
  const double defect = std::numbers::pi - angle(a, b, c) - angle(b, c, a) - angle(c, a, b);
  return std::max(0.0, defect) / kappa;
}

double grid_area(const std::vector<V4>& X, const PolarGrid& g, double kappa) {
  double area = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    for (int j = 0; j < g.nt(); ++j) {
      const V4& a = X[g.at(i, j)];
      const V4& b = X[g.at(i + 1, j)];
      const V4& c = X[g.at(i + 1, j + 1)];
      const V4& d = X[g.at(i, j + 1)];
      area += triangle_area(a, b, c, kappa);
      if (i > 0) area += triangle_area(a, c, d, kappa);
    }
  }
  return area;
}

// Normal speeds phi = M^{-1} hs with M = -Laplacian + max(2 kappa - |II|^2, kappa / 2),
// the discrete linearization of the mean curvature with a positive zeroth-order
// term. Unknowns: the centre, then rows 1 .. n_r - 1; the outer ring is fixed.
constexpr double kOperatorFallback = 1e-3;

bool operator_speeds(const std::vector<VertexEval>& ev, const std::vector<std::pair<int, int>>& free, int nr,
                     int nt, double hr, double kappa, Eigen::VectorXd& phi) {
  const double dt = 2 * std::numbers::pi / nt;
  auto unknown = [&](int i, int j) -> int {
    j %= nt;
    if (j < 0) j += nt;
    if (i == 0) return 0;
    if (i >= nr) return -1;
    return 1 + (i - 1) * nt + j;
  };
  const auto n = static_cast<Eigen::Index>(free.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(free.size() * 10 + 4 * static_cast<std::size_t>(nt));
  Eigen::VectorXd rhs(n);
  for (std::size_t q = 0; q < free.size(); ++q) {
    const auto& e = ev[q];
    const auto [i, j] = free[q];
    const int row = unknown(i, j);
    auto add = [&](int ii, int jj, double lap_coeff) {
      const int col = unknown(ii, jj);
      if (col >= 0) trip.emplace_back(row, col, -lap_coeff);
    };
    const double shift = std::max(2 * kappa - e.a2, 0.5 * kappa);
    if (i == 0) {
      const double h2 = hr * hr;
      for (int c = 0; c < nt; ++c) {
        const double th = c * dt;
        const double coeff = e.gi[0] * 2 * (1.0 / nt + 2.0 / nt * std::cos(2 * th)) / h2 +
                             2 * e.gi[1] * 2 * (2.0 / nt) * std::sin(2 * th) / h2 +
                             e.gi[2] * 2 * (1.0 / nt - 2.0 / nt * std::cos(2 * th)) / h2 -
                             e.gam[0] * (2.0 / nt) * std::cos(th) / hr - e.gam[1] * (2.0 / nt) * std::sin(th) / hr;
        add(1, c, coeff);
      }
      add(0, 0, -2 * (e.gi[0] + e.gi[2]) / h2);
    } else {
      const double wrr = e.gi[0] / (hr * hr), wtt = e.gi[2] / (dt * dt), wrt = 2 * e.gi[1] / (4 * hr * dt);
      add(i + 1, j, wrr - e.gam[0] / (2 * hr));
      add(i - 1, j, wrr + e.gam[0] / (2 * hr));
      add(i, j + 1, wtt - e.gam[1] / (2 * dt));
      add(i, j - 1, wtt + e.gam[1] / (2 * dt));
      add(i + 1, j + 1, wrt);
      add(i + 1, j - 1, -wrt);
      add(i - 1, j + 1, -wrt);
      add(i - 1, j - 1, wrt);
      add(i, j, -2 * (wrr + wtt));
    }
    trip.emplace_back(row, row, shift);
    rhs[row] = e.hs;
  }
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) return false;
  phi.resize(n);
  for (std::size_t q = 0; q < free.size(); ++q) phi[static_cast<Eigen::Index>(q)] = sol[unknown(free[q].first, free[q].second)];
  return true;
}

}  // namespace

void PlateauProblem::validate() const {
  if (space.dimension() != 3) throw std::invalid_argument("plateau: only H^3 is supported");
  if (!(radius > 0.0) || radius > 20.0) throw std::invalid_argument("plateau: need 0 < R <= 20");
  if (n_r < 4) throw std::invalid_argument("plateau: need n_r >= 4");
  if (n_theta < 8 || n_theta % 2 != 0) throw std::invalid_argument("plateau: n_theta must be even and >= 8");
  if (!(flow.tol_h > 0.0)) throw std::invalid_argument("plateau: tol_h must be positive");
  if (flow.max_iterations < 1) throw std::invalid_argument("plateau: max_iterations must be positive");
  if (!(flow.initial_factor > 0.0 && flow.initial_factor <= flow.max_factor && flow.max_factor <= 1.0)) {
    throw std::invalid_argument("plateau: need 0 < initial_factor <= max_factor <= 1");
  }
  if (!(flow.growth >= 1.0)) throw std::invalid_argument("plateau: growth must be >= 1");
  if (!(flow.step_cap > 0.0)) throw std::invalid_argument("plateau: step_cap must be positive");
  if (flow.stagnation_window < 1) throw std::invalid_argument("plateau: stagnation_window must be positive");
  if (flow.history_stride < 1) throw std::invalid_argument("plateau: history_stride must be positive");
  if (flow.threads < 1) throw std::invalid_argument("plateau: threads must be positive");
}

InitSpec InitSpec::parse(const std::string& s) {
  InitSpec init;
  if (s == "cone") return init;
  if (s == "graph") {
    init.kind = Kind::Graph;
    return init;
  }
  const std::string prefix = "perturbed:";
  if (s.rfind(prefix, 0) == 0) {
    const std::string rest = s.substr(prefix.size());
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("init spec: expected perturbed:<seed>:<amp>");
    try {
      std::size_t used = 0;
      init.seed = std::stoull(rest.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument("seed");
      const std::string amp = rest.substr(colon + 1);
      init.amplitude = std::stod(amp, &used);
      if (used != amp.size()) throw std::invalid_argument("amplitude");
    } catch (const std::exception&) {
      throw std::invalid_argument("init spec: bad perturbed parameters in '" + s + "'");
    }
    if (!(init.amplitude >= 0.0) || !std::isfinite(init.amplitude)) {
      throw std::invalid_argument("init spec: amplitude must be >= 0");
    }
    init.kind = Kind::Perturbed;
    return init;
  }
  throw std::invalid_argument("unknown init spec '" + s + "'");
}

std::string InitSpec::str() const {
  switch (kind) {
    case Kind::Cone:
      return "cone";
    case Kind::Graph:
      return "graph";
    case Kind::Perturbed: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, amplitude);
      return "perturbed:" + std::to_string(seed) + ':' + std::string(buf, res.ptr);
    }
  }
  return "cone";
}

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged:
      return "converged";
    case FlowStatus::MaxIterations:
      return "max_iterations";
    case FlowStatus::Stagnated:
      return "stagnated";
    case FlowStatus::StepUnderflow:
      return "step_underflow";
    case FlowStatus::Degenerate:
      return "degenerate_mesh";
  }
  return "unknown";
}

ParametricPatch initial_surface(const PlateauProblem& problem, const InitSpec& init) {
  problem.validate();
  const ModelSpace& space = problem.space;
  const double R = problem.radius;
  const double hr = R / problem.n_r;
  const double sk = space.sqrt_kappa();
  const int nt = problem.n_theta;

  // Pinned ring and, for the graph start, its Fermi data over the plane x3 = 0.
  std::vector<HyperboloidPoint> ring;
  std::vector<double> foot_r, foot_phi, height;
  for (int j = 0; j < nt; ++j) {
    const double th = 2 * std::numbers::pi * j / nt;
    const HyperboloidPoint b = space.toward_ideal(problem.curve.at(th), R);
    ring.push_back(b);
    const double h = std::asinh(sk * b.x[3]) / sk;
    Vec f = b.x;
    f[3] = 0.0;
    f /= std::cosh(sk * h);
    foot_r.push_back(std::acosh(std::max(1.0, sk * f[0])) / sk);
    foot_phi.push_back(std::atan2(f[2], f[1]));
    height.push_back(h);
  }

  std::vector<double> coeffs(6, 0.0);
  double field_scale = 0.0;
  auto field = [&](double rho, double th) {
    const double s = rho / R;
    const double prof = 1.0 - s * s;
    return (coeffs[0] + s * (coeffs[1] * std::cos(th) + coeffs[2] * std::sin(th)) +
            s * s * (coeffs[3] * std::cos(2 * th) + coeffs[4] * std::sin(2 * th))) *
           prof;
  };
  if (init.kind == InitSpec::Kind::Perturbed) {
    std::mt19937_64 rng(init.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int m = 0; m < 5; ++m) coeffs[static_cast<std::size_t>(m)] = normal(rng);
    double mx = 0.0;
    for (int i = 0; i <= problem.n_r; ++i) {
      for (int j = 0; j < nt; ++j) mx = std::max(mx, std::abs(field(i * hr, 2 * std::numbers::pi * j / nt)));
    }
    field_scale = mx > 0.0 ? init.amplitude / mx : 0.0;
  }

  const HyperboloidPoint o = space.origin();
  std::vector<HyperboloidPoint> pts;
  std::vector<std::uint8_t> mask;
  for (int i = 0; i <= problem.n_r; ++i) {
    for (int j = 0; j < nt; ++j) {
      const double th = 2 * std::numbers::pi * j / nt;
      const double rho = i * hr;
      mask.push_back(i == problem.n_r ? 1 : 0);
      if (i == problem.n_r) {
        pts.push_back(ring[static_cast<std::size_t>(j)]);
        continue;
      }
      HyperboloidPoint p = o;
      if (init.kind == InitSpec::Kind::Graph) {
        const double s = rho / R;
        const double r = s * foot_r[static_cast<std::size_t>(j)];
        const double phi = foot_phi[static_cast<std::size_t>(j)];
        const double h = s * s * height[static_cast<std::size_t>(j)];
        Vec f = Vec::Zero(4);
        f[0] = std::cosh(sk * r) / sk;
        f[1] = std::sinh(sk * r) / sk * std::cos(phi);
        f[2] = std::sinh(sk * r) / sk * std::sin(phi);
        Vec y = std::cosh(sk * h) * f;
        y[3] += std::sinh(sk * h) / sk;
        p = space.project(y);
      } else if (i > 0) {
        p = space.toward_ideal(problem.curve.at(th), rho);
      }
      if (init.kind == InitSpec::Kind::Perturbed) {
        const double a = field_scale * field(rho, th);
        Vec e3 = Vec::Zero(4);
        e3[3] = 1.0;
        Vec t = space.tangent(p, e3).v;
        const double len = mink_norm(t);
        if (len > 1e-12 && a != 0.0) p = space.geodesic({p, t / len}, a);
      }
      pts.push_back(p);
    }
  }
  // Row 0 is the collapsed centre; every copy must agree.
  for (int j = 1; j < nt; ++j) pts[static_cast<std::size_t>(j)] = pts[0];
  return ParametricPatch(space, {problem.n_r + 1, nt}, {hr, 2 * std::numbers::pi / nt}, std::move(pts),
                         std::move(mask), GridTopology::Polar, {false, true});
}

FlowState solve(const PlateauProblem& problem, const InitSpec& init) {
  return solve_from(problem, initial_surface(problem, init));
}

FlowState solve_from(const PlateauProblem& problem, ParametricPatch start) {
  problem.validate();
  const FlowPolicy& pol = problem.flow;
  const int nr = problem.n_r, nt = problem.n_theta;
  if (start.topology() != GridTopology::Polar || start.shape() != std::vector<int>{nr + 1, nt}) {
    throw std::invalid_argument("solve_from: patch does not match the problem grid");
  }
  const double kappa = problem.space.kappa();
  const PolarGrid grid(nr, nt, start.spacing()[0], kappa);

  std::vector<V4> X(start.size());
  for (std::size_t v = 0; v < X.size(); ++v) X[v] = to4(start.point(v).x);

  // Free vertices: the centre (once) and rows 1 .. n_r - 1.
  std::vector<std::pair<int, int>> free{{0, 0}};
  for (int i = 1; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) free.emplace_back(i, j);
  }
  std::vector<VertexEval> ev(free.size()), trial_ev(free.size());

  auto evaluate_all = [&](const std::vector<V4>& pts, std::vector<VertexEval>& out, double& residual,
                          double& min_eig) {
    parallel_for(free.size(), pol.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t q = b; q < e; ++q) out[q] = grid.eval(pts, free[q].first, free[q].second);
    });
    residual = 0.0;
    min_eig = std::numeric_limits<double>::infinity();
    for (const auto& r : out) {
      residual = std::max(residual, std::sqrt(std::max(0.0, mink4(r.H, r.H))));
      min_eig = std::min(min_eig, r.min_eig);
    }
  };

  FlowState st(std::move(start));
  double residual = 0.0, min_eig = 0.0;
  evaluate_all(X, ev, residual, min_eig);
  double factor = pol.initial_factor;
  double best = residual;
  int best_at = 0;
  std::vector<V4> Y(X.size());
  std::vector<double> disp(free.size());
  int accepted = 0;
  st.history.push_back({0, residual, 0.0, factor, grid_area(X, grid, kappa)});

  Eigen::VectorXd phi(static_cast<Eigen::Index>(free.size()));
  bool speeds_ready = false;
  bool jacobi_step = pol.preconditioner == Preconditioner::Jacobi;
  int it = 0;
  st.status = FlowStatus::MaxIterations;
  while (true) {
    if (!(min_eig > 1e-8)) {
      st.status = FlowStatus::Degenerate;
      std::ostringstream o;
      o << "metric eigenvalue " << format_double(min_eig) << " below 1e-8 at iteration " << it;
      st.diagnostics = o.str();
      break;
    }
    if (residual < pol.tol_h) {
      st.status = FlowStatus::Converged;
      break;
    }
    if (it >= pol.max_iterations) {
      st.diagnostics = "iteration limit reached with residual " + format_double(residual);
      break;
    }
    if (it - best_at >= pol.stagnation_window) {
      st.status = FlowStatus::Stagnated;
      st.diagnostics = "residual " + format_double(residual) + " did not improve by " +
                       format_double(pol.stagnation_gain) + " over " + std::to_string(pol.stagnation_window) +
                       " iterations";
      break;
    }
    if (!speeds_ready) {
      if (!jacobi_step) {
        if (!operator_speeds(ev, free, nr, nt, grid.hr(), kappa, phi)) {
          st.status = FlowStatus::Degenerate;
          st.diagnostics = "preconditioner factorization failed at iteration " + std::to_string(it);
          break;
        }
      } else {
        for (std::size_t q = 0; q < free.size(); ++q) phi[static_cast<Eigen::Index>(q)] = ev[q].precond * ev[q].hs;
      }
      speeds_ready = true;
    }
    ++it;

    Y = X;
    parallel_for(free.size(), pol.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t q = b; q < e; ++q) {
        const auto& r = ev[q];
        V4 w = factor * phi[static_cast<Eigen::Index>(q)] * r.nu;
        const double len = std::sqrt(std::max(0.0, mink4(w, w)));
        const double cap = pol.step_cap / std::max(1.0, r.lam);
        if (len > cap) w *= cap / len;
        disp[q] = std::min(len, cap);
        const auto [i, j] = free[q];
        Y[grid.at(i, j)] = exp4(X[grid.at(i, j)], w, kappa);
      }
    });
    for (int j = 1; j < nt; ++j) Y[grid.at(0, j)] = Y[grid.at(0, 0)];

    double trial_residual = 0.0, trial_min = 0.0;
    evaluate_all(Y, trial_ev, trial_residual, trial_min);
    if (trial_residual <= residual && trial_min > 1e-8) {
      std::swap(X, Y);
      std::swap(ev, trial_ev);
      residual = trial_residual;
      min_eig = trial_min;
      speeds_ready = false;
      jacobi_step = pol.preconditioner == Preconditioner::Jacobi;
      ++accepted;
      const double area = accepted % pol.history_stride == 0 ? grid_area(X, grid, kappa) : kNaN;
      st.history.push_back({it, residual, *std::max_element(disp.begin(), disp.end()), factor, area});
      factor = std::min(pol.max_factor, factor * pol.growth);
      if (residual < best * (1.0 - pol.stagnation_gain)) {
        best = residual;
        best_at = it;
      }
    } else {
      ++st.rejected;
      factor *= 0.5;
      // far from the linear regime the operator direction need not reduce sup |H|
      if (!jacobi_step && factor < kOperatorFallback) {
        jacobi_step = true;
        speeds_ready = false;
        factor = pol.initial_factor;
      }
      if (factor < pol.min_factor) {
        st.status = FlowStatus::StepUnderflow;
        st.diagnostics = "step factor fell below " + format_double(pol.min_factor) + " with residual " +
                         format_double(residual);
        break;
      }
    }
  }

  for (std::size_t v = 0; v < X.size(); ++v) st.patch.set_point(v, {from4(X[v])});
  st.residual = residual;
  st.iteration = it;
  st.area = grid_area(X, grid, kappa);
  if (!st.history.empty() && std::isnan(st.history.back().area)) st.history.back().area = st.area;

  if (st.status != FlowStatus::Degenerate) {
    try {
      st.verified_residual = 0.0;
      for (std::size_t v : st.patch.interior_vertices()) {
        st.verified_residual = std::max(st.verified_residual, mink_norm(mean_curvature_vector(st.patch, v).v));
      }
      st.sup_second_form = sup_second_form(st.patch).sup;
      st.pinching = pinching_check(st.patch);
    } catch (const GeometryError& e) {
      st.diagnostics += std::string(st.diagnostics.empty() ? "" : "; ") + e.what();
    }
  }
  return st;
}

double discrete_area(const ParametricPatch& patch) {
  if (patch.topology() != GridTopology::Polar || patch.dim() != 2 || patch.space().dimension() != 3) {
    throw std::invalid_argument("discrete_area: expects a polar disc in H^3");
  }
  const PolarGrid grid(patch.shape()[0] - 1, patch.shape()[1], patch.spacing()[0], patch.space().kappa());
  std::vector<V4> X(patch.size());
  for (std::size_t v = 0; v < X.size(); ++v) X[v] = to4(patch.point(v).x);
  return grid_area(X, grid, patch.space().kappa());
}

Vec plateau_mean_curvature(const ParametricPatch& patch, std::size_t v) {
  if (patch.dim() != 2 || patch.space().dimension() != 3) {
    throw std::invalid_argument("plateau_mean_curvature: expects a surface in H^3");
  }
  const LocalJet jet = local_jet(patch, v);
  double ha = patch.spacing()[0], hb = patch.spacing()[1];
  if (patch.is_center(v)) hb = ha;
  const VertexEval e = evaluate(to4(jet.point.x), to4(jet.d1.col(0)), to4(jet.d1.col(1)),
                                to4(jet.second(0, 0)), to4(jet.second(0, 1)), to4(jet.second(1, 1)), ha, hb,
                                patch.space().kappa());
  if (!(e.min_eig > 1e-8)) throw GeometryError("plateau_mean_curvature: degenerate metric");
  return from4(e.H);
}

void write_history_csv(const FlowState& state, std::ostream& out) {
  out << "iteration,residual,max_displacement,factor,area\n";
  for (const auto& r : state.history) {
    out << r.iteration << ',' << format_double(r.residual) << ',' << format_double(r.max_displacement) << ','
        << format_double(r.factor) << ',';
    if (std::isfinite(r.area)) out << format_double(r.area);
    out << '\n';
  }
}

}  // namespace afp
