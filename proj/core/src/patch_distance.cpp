#include "afp/patch_distance.hpp"

#include "afp/normal_flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace afp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEdgeEps = 1e-9;

Vec bilinear(const Vec& p00, const Vec& p10, const Vec& p01, const Vec& p11, double s, double t) {
  return (1 - s) * (1 - t) * p00 + s * (1 - t) * p10 + (1 - s) * t * p01 + s * t * p11;
}

}  // namespace

PatchDistance::PatchDistance(const ParametricPatch& patch) : patch_(patch) {
  if (patch.dim() != 2) throw std::invalid_argument("PatchDistance: k = 2 patches only");
  const ModelSpace& space = patch.space();
  const int n0 = patch.shape()[0], n1 = patch.shape()[1];
  const bool polar = patch.topology() == GridTopology::Polar;
  const int imax = n0 - 1;
  const int jmax = patch.periodic(1) ? n1 : n1 - 1;
  for (int i = 0; i < imax; ++i) {
    for (int j = 0; j < jmax; ++j) {
      Face f;
      f.i = i;
      f.j = j;
      const int j1 = (j + 1) % n1;
      f.c[0] = patch.flat(i, j);
      f.c[1] = patch.flat(i + 1, j);
      f.c[2] = patch.flat(i, j1);
      f.c[3] = patch.flat(i + 1, j1);
      const Vec mid = bilinear(patch.point(f.c[0]).x, patch.point(f.c[1]).x, patch.point(f.c[2]).x,
                               patch.point(f.c[3]).x, 0.5, 0.5);
      f.centre = space.project(mid);
      for (std::size_t c : f.c) f.radius = std::max(f.radius, space.distance(f.centre, patch.point(c)));
      f.outer = polar && i == imax - 1;
      faces_.push_back(f);
    }
  }
  if (faces_.empty()) throw std::invalid_argument("PatchDistance: patch has no faces");
}

bool PatchDistance::on_dirichlet_edge(const Face& f, double s, double t) const {
  if (patch_.topology() == GridTopology::Polar) return f.outer && s >= 1.0 - kEdgeEps;
  const int n0 = patch_.shape()[0], n1 = patch_.shape()[1];
  if (f.i == 0 && s <= kEdgeEps) return true;
  if (f.i == n0 - 2 && s >= 1.0 - kEdgeEps) return true;
  if (!patch_.periodic(1)) {
    if (f.j == 0 && t <= kEdgeEps) return true;
    if (f.j == n1 - 2 && t >= 1.0 - kEdgeEps) return true;
  }
  return false;
}

void PatchDistance::refine(const Face& f, const HyperboloidPoint& x, PatchFoot& out) const {
  const ModelSpace& space = patch_.space();
  const double kappa = space.kappa();
  const Vec& p00 = patch_.point(f.c[0]).x;
  const Vec& p10 = patch_.point(f.c[1]).x;
  const Vec& p01 = patch_.point(f.c[2]).x;
  const Vec& p11 = patch_.point(f.c[3]).x;
  const Vec Bst = p00 - p10 - p01 + p11;

  // Minimize f(s,t) = -<x, B/rho>, rho = sqrt(-kappa <B,B>); decreasing in distance.
  struct Local {
    double f;
    double g[2];
    double H[2][2];
  };
  auto eval = [&](double s, double t, bool derivs) {
    Local L{};
    const Vec B = bilinear(p00, p10, p01, p11, s, t);
    const double BB = mink_inner(B, B);
    const double rho = std::sqrt(-kappa * BB);
    const double xB = mink_inner(x.x, B);
    L.f = -xB / rho;
    if (!derivs) return L;
    const Vec Bs = (1 - t) * (p10 - p00) + t * (p11 - p01);
    const Vec Bt = (1 - s) * (p01 - p00) + s * (p11 - p10);
    const std::array<const Vec*, 2> d{&Bs, &Bt};
    const double r3 = rho * rho * rho, r5 = r3 * rho * rho;
    double xd[2], Bd[2];
    for (int a = 0; a < 2; ++a) {
      xd[a] = mink_inner(x.x, *d[a]);
      Bd[a] = mink_inner(B, *d[a]);
      L.g[a] = -xd[a] / rho - kappa * xB * Bd[a] / r3;
    }
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double uw = mink_inner(*d[a], *d[b]);
        L.H[a][b] = -kappa * xd[b] * Bd[a] / r3 - kappa * (xd[a] * Bd[b] + xB * uw) / r3 -
                    3 * kappa * kappa * xB * Bd[b] * Bd[a] / r5;
      }
    }
    const double xm = mink_inner(x.x, Bst), Bm = mink_inner(B, Bst);
    const double mixed = -xm / rho - kappa * xB * Bm / r3;
    L.H[0][1] += mixed;
    L.H[1][0] += mixed;
    return L;
  };

  double z[2] = {0.5, 0.5};
  Local cur = eval(z[0], z[1], true);
  for (int iter = 0; iter < 60; ++iter) {
    bool fixed[2];
    for (int a = 0; a < 2; ++a) {
      fixed[a] = (z[a] <= 0.0 && cur.g[a] > 0.0) || (z[a] >= 1.0 && cur.g[a] < 0.0);
    }
    double p[2] = {0.0, 0.0};
    if (!fixed[0] && !fixed[1]) {
      const double det = cur.H[0][0] * cur.H[1][1] - cur.H[0][1] * cur.H[1][0];
      if (cur.H[0][0] > 0.0 && det > 0.0) {
        p[0] = -(cur.H[1][1] * cur.g[0] - cur.H[0][1] * cur.g[1]) / det;
        p[1] = -(-cur.H[1][0] * cur.g[0] + cur.H[0][0] * cur.g[1]) / det;
      } else {
        const double scale = std::max({std::abs(cur.H[0][0]), std::abs(cur.H[1][1]), 1e-300});
        p[0] = -cur.g[0] / scale;
        p[1] = -cur.g[1] / scale;
      }
    } else {
      for (int a = 0; a < 2; ++a) {
        if (fixed[a]) continue;
        const double h = cur.H[a][a];
        p[a] = h > 0.0 ? -cur.g[a] / h : -cur.g[a] / std::max(std::abs(h), 1e-300);
      }
    }
    if (!(std::abs(p[0]) + std::abs(p[1]) > 0.0)) break;
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const double ns = std::clamp(z[0] + alpha * p[0], 0.0, 1.0);
      const double nt = std::clamp(z[1] + alpha * p[1], 0.0, 1.0);
      const Local trial = eval(ns, nt, false);
      if (trial.f <= cur.f) {
        const double step = std::abs(ns - z[0]) + std::abs(nt - z[1]);
        z[0] = ns;
        z[1] = nt;
        cur = eval(z[0], z[1], true);
        moved = step > 1e-14;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }

  const HyperboloidPoint foot = space.project(bilinear(p00, p10, p01, p11, z[0], z[1]));
  const double d = space.distance(x, foot);
  if (d < out.distance) {
    out.distance = d;
    out.foot = foot;
    out.face = static_cast<std::size_t>(&f - faces_.data());
    out.s = z[0];
    out.t = z[1];
    out.grid_i = f.i + z[0];
    out.grid_j = f.j + z[1];
    out.clipped = on_dirichlet_edge(f, z[0], z[1]);
  }
}

PatchFoot PatchDistance::query(const HyperboloidPoint& x, std::optional<std::size_t> hint) const {
  const ModelSpace& space = patch_.space();
  PatchFoot out;
  out.distance = std::numeric_limits<double>::infinity();
  if (hint && *hint < faces_.size()) refine(faces_[*hint], x, out);

  std::vector<std::pair<double, std::size_t>> order(faces_.size());
  for (std::size_t q = 0; q < faces_.size(); ++q) {
    order[q] = {space.distance(x, faces_[q].centre) - faces_[q].radius - 1e-12, q};
  }
  std::sort(order.begin(), order.end());
  for (const auto& [lb, q] : order) {
    if (lb >= out.distance) break;
    if (hint && q == *hint) continue;
    refine(faces_[q], x, out);
  }
  return out;
}

PatchFoot distance_to_patch(const HyperboloidPoint& x, const ParametricPatch& patch) {
  return PatchDistance(patch).query(x);
}

std::vector<std::size_t> collar_interior(const ParametricPatch& patch, double collar) {
  std::vector<std::size_t> out;
  if (patch.topology() == GridTopology::Polar) {
    const int nr = patch.shape()[0] - 1;
    const auto last = static_cast<int>(std::floor((1.0 - collar) * nr + 1e-9));
    out.push_back(0);
    for (int i = 1; i <= std::min(last, nr - 1); ++i) {
      for (int j = 0; j < patch.shape()[1]; ++j) out.push_back(patch.flat(i, j));
    }
    return out;
  }
  const int k = patch.dim();
  for (std::size_t v = 0; v < patch.size(); ++v) {
    const GridIndex idx = patch.index(v);
    bool keep = !patch.is_boundary(v);
    for (int a = 0; a < k && keep; ++a) {
      if (patch.periodic(a)) continue;
      const double top = patch.shape()[a] - 1;
      const double lo = std::ceil(collar * top - 1e-9), hi = std::floor((1.0 - collar) * top + 1e-9);
      keep = idx[a] >= lo && idx[a] <= hi;
    }
    if (keep) out.push_back(v);
  }
  return out;
}

double hausdorff(const ParametricPatch& a, const ParametricPatch& b) {
  auto one_way = [](const ParametricPatch& from, const ParametricPatch& to) {
    const PatchDistance index(to);
    double worst = 0.0;
    std::optional<std::size_t> hint;
    for (std::size_t v : collar_interior(from)) {
      const PatchFoot f = index.query(from.point(v), hint);
      hint = f.face;
      worst = std::max(worst, f.distance);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

BoundedDistanceReport bounded_distance_check(const ParametricPatch& z, const ParametricPatch& y, double tol,
                                             std::optional<double> sup_override) {
  BoundedDistanceReport r;
  r.sup_second_form = sup_override ? *sup_override : sup_second_form(y).sup;
  const ConvexityRadius cr = convexity_radius(r.sup_second_form);
  r.r_paper = cr.r_paper;
  r.r_spectral = cr.r_spectral;
  r.radius = cr.safe();
  const PatchDistance index(y);
  std::optional<std::size_t> hint;
  for (std::size_t v = 0; v < z.size(); ++v) {
    if (z.is_boundary(v) || (z.is_center(v) && v != 0)) continue;
    const PatchFoot f = index.query(z.point(v), hint);
    hint = f.face;
    if (f.clipped) {
      ++r.clipped;
      continue;
    }
    ++r.checked;
    if (f.distance > r.max_distance) {
      r.max_distance = f.distance;
      r.worst_vertex = v;
    }
  }
  r.passed = r.checked > 0 && r.max_distance <= r.radius + tol;
  return r;
}

PhiResult phi_inf(double d, int k, double sup) {
  if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("phi_inf: need d >= 0");
  if (k < 2 || k > 4) throw std::invalid_argument("phi_inf: need 2 <= k <= 4");
  if (!(sup >= 0.0) || sup >= 1.0) throw std::invalid_argument("phi_inf: need 0 <= sup < 1");
  const double tau = std::tanh(d);
  auto m = [tau](double l) { return (tau + l) / (1.0 + l * tau); };
  const int free = k - 1;

  // Objective over the first k-1 coordinates; the last is -sum. Infeasible -> +inf.
  auto objective = [&](const std::array<double, 3>& l) {
    double sum = 0.0, val = 0.0;
    for (int a = 0; a < free; ++a) {
      if (std::abs(l[a]) > sup + 1e-15) return std::numeric_limits<double>::infinity();
      sum += l[a];
      val += m(l[a]);
    }
    if (std::abs(sum) > sup + 1e-15) return std::numeric_limits<double>::infinity();
    return val + m(-sum);
  };

  PhiResult r;
  r.d = d;
  r.k = k;
  r.sup = sup;
  std::array<double, 3> best{0.0, 0.0, 0.0};
  double best_val = objective(best);
  if (sup > 0.0) {
    const int per_axis = k == 2 ? 2000 : (k == 3 ? 400 : 80);
    std::array<double, 3> lo{-sup, -sup, -sup}, hi{sup, sup, sup};
    double step = 2 * sup / per_axis;
    while (true) {
      std::array<int, 3> count{1, 1, 1};
      for (int a = 0; a < free; ++a) count[a] = static_cast<int>(std::round((hi[a] - lo[a]) / step)) + 1;
      std::array<double, 3> l{0.0, 0.0, 0.0};
      for (int i0 = 0; i0 < count[0]; ++i0) {
        l[0] = std::min(lo[0] + i0 * step, hi[0]);
        for (int i1 = 0; i1 < count[1]; ++i1) {
          if (free > 1) l[1] = std::min(lo[1] + i1 * step, hi[1]);
          for (int i2 = 0; i2 < count[2]; ++i2) {
            if (free > 2) l[2] = std::min(lo[2] + i2 * step, hi[2]);
            const double v = objective(l);
            if (v < best_val) {
              best_val = v;
              best = l;
            }
          }
        }
      }
      if (step <= 1e-4) break;
      // Zoom on the current optimum with a 10x finer grid.
      for (int a = 0; a < free; ++a) {
        lo[a] = std::max(-sup, best[a] - 10 * step);
        hi[a] = std::min(sup, best[a] + 10 * step);
      }
      step /= 10.0;
      if (step < 1e-4) step = 1e-4;
    }
  }
  r.brute = best_val;

  // Compass search polish.
  std::array<double, 3> cur = best;
  double cur_val = best_val;
  for (double h = std::max(sup, 1e-3) * 1e-3; h > 1e-13; h *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int a = 0; a < free; ++a) {
        for (double sgn : {1.0, -1.0}) {
          auto trial = cur;
          trial[a] = std::clamp(trial[a] + sgn * h, -sup, sup);
          const double v = objective(trial);
          if (v < cur_val - 1e-16) {
            cur = trial;
            cur_val = v;
            improved = true;
          }
        }
      }
    }
  }
  r.polished = cur_val;
  r.value = std::min(r.brute, r.polished);
  const auto& arg = r.polished <= r.brute ? cur : best;
  double sum = 0.0;
  for (int a = 0; a < free; ++a) {
    r.minimizer.push_back(arg[a]);
    sum += arg[a];
  }
  r.minimizer.push_back(-sum);

  if (k == 2) {
    double red = std::numeric_limits<double>::infinity();
    const int n = 10000;
    for (int i = 0; i <= n; ++i) {
      const double s = sup * i / n;
      red = std::min(red, m(-s) + m(s));
    }
    r.reduction = red;
  } else {
    r.reduction = kNaN;
  }
  return r;
}

CEstimate estimate_c(int k, double sup, int samples) {
  if (samples < 1) throw std::invalid_argument("estimate_c: need samples >= 1");
  CEstimate c;
  c.radius = convexity_radius(sup).safe();
  c.samples = samples;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= samples; ++i) {
    const double d = c.radius * i / samples;
    const double ratio = phi_inf(d, k, sup).value / d;
    if (ratio < best) {
      best = ratio;
      c.argmin_d = d;
    }
  }
  c.c_est = 2.0 * best;
  return c;
}

SubharmonicityReport subharmonicity_check(const ParametricPatch& z, const ParametricPatch& y, double c_est,
                                          bool crosscheck) {
  if (z.dim() != 2) throw std::invalid_argument("subharmonicity_check: k = 2 patches only");
  const ModelSpace& space = z.space();
  const PatchDistance index(y);

  SubharmonicityReport r;
  r.c_est = c_est;
  std::vector<double> u(z.size(), kNaN);
  std::vector<char> clipped(z.size(), 0);
  std::optional<std::size_t> hint;
  for (std::size_t v = 0; v < z.size(); ++v) {
    const PatchFoot f = index.query(z.point(v), hint);
    hint = f.face;
    u[v] = f.distance * f.distance;
    clipped[v] = f.clipped ? 1 : 0;
    if (!f.clipped && !z.is_boundary(v)) r.max_u = std::max(r.max_u, u[v]);
  }
  r.tol = std::max(1e-2 * r.max_u, 1e-12);

  auto u_at = [&](const HyperboloidPoint& p) {
    const PatchFoot f = index.query(p, hint);
    return f.distance * f.distance;
  };

  const double hu = z.spacing()[0], hv = z.spacing()[1];
  r.min_margin = std::numeric_limits<double>::infinity();
  double local_max = 0.0;
  for (std::size_t v : z.interior_vertices()) {
    if (z.is_center(v)) {
      ++r.excluded;
      continue;
    }
    std::array<std::size_t, 9> nb{};
    bool ok = !clipped[v];
    int q = 0;
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const int off[2] = {di, dj};
        const auto n = z.neighbor(v, off);
        if (!n || clipped[*n]) {
          ok = false;
        } else {
          nb[static_cast<std::size_t>(q)] = *n;
        }
        ++q;
      }
    }
    if (!ok) {
      ++r.excluded;
      continue;
    }
    auto U = [&](int di, int dj) { return u[nb[static_cast<std::size_t>((di + 1) * 3 + (dj + 1))]]; };
    const FundamentalForms forms = fundamental_forms(z, v);
    const LocalJet jet = local_jet(z, v);
    const SmallMatrix gi = forms.first.inverse();
    const double du[2] = {(U(1, 0) - U(-1, 0)) / (2 * hu), (U(0, 1) - U(0, -1)) / (2 * hv)};
    double d2u[2][2];
    d2u[0][0] = (U(1, 0) - 2 * U(0, 0) + U(-1, 0)) / (hu * hu);
    d2u[1][1] = (U(0, 1) - 2 * U(0, 0) + U(0, -1)) / (hv * hv);
    d2u[0][1] = d2u[1][0] = (U(1, 1) - U(1, -1) - U(-1, 1) + U(-1, -1)) / (4 * hu * hv);
    double lap = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const Vec Pab = jet.second(a, b);
        double corr = 0.0;
        for (int c = 0; c < 2; ++c) {
          double gamma = 0.0;
          for (int e = 0; e < 2; ++e) gamma += gi(c, e) * mink_inner(Pab, forms.tangent_frame[static_cast<std::size_t>(e)]);
          corr += gamma * du[c];
        }
        lap += gi(a, b) * (d2u[a][b] - corr);
      }
    }
    const double uv = u[v];
    const double margin = lap - c_est * uv;
    ++r.checked;
    if (margin >= -r.tol) ++r.satisfied;
    if (margin < r.min_margin) {
      r.min_margin = margin;
      r.worst_vertex = v;
    }
    bool is_max = true;
    for (std::size_t n : nb) is_max = is_max && uv >= u[n];
    if (is_max) local_max = std::max(local_max, uv);

    if (crosscheck && r.max_u > 1e-14 && uv >= 0.1 * r.max_u) {
      // Orthonormal tangent frame of Z.
      const Vec& t0 = forms.tangent_frame[0];
      const Vec e0 = t0 / mink_norm(t0);
      Vec t1 = forms.tangent_frame[1] - mink_inner(forms.tangent_frame[1], e0) * e0;
      const Vec e1 = t1 / mink_norm(t1);
      const HyperboloidPoint& p = z.point(v);
      constexpr double h = 1e-3;
      double trace = 0.0;
      for (const Vec* e : {&e0, &e1}) {
        const double up = u_at(space.geodesic({p, *e}, h));
        const double um = u_at(space.geodesic({p, *e}, -h));
        trace += (up - 2 * uv + um) / (h * h);
      }
      const TangentVector H = mean_curvature_vector(forms);
      const double hn = mink_norm(H.v);
      double dh = 0.0;
      if (hn > 1e-14) {
        const Vec dir = H.v / hn;
        dh = hn * (u_at(space.geodesic({p, dir}, h)) - u_at(space.geodesic({p, dir}, -h))) / (2 * h);
      }
      const double scale = std::max({std::abs(trace), std::abs(dh), std::abs(lap), 1e-12});
      r.crosscheck_max_rel = std::max(r.crosscheck_max_rel, std::abs(lap - trace - dh) / scale);
      ++r.crosscheck_vertices;
    }
  }
  if (r.checked == 0) r.min_margin = kNaN;
  r.fraction = r.checked > 0 ? static_cast<double>(r.satisfied) / static_cast<double>(r.checked) : 0.0;
  r.crosscheck_ok = r.crosscheck_max_rel <= kCrosscheckRelTol;
  r.interior_max_ok = local_max <= r.tol;
  r.passed = r.checked > 0 && r.satisfied == r.checked;
  return r;
}

}  // namespace afp
