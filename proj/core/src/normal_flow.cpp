#include "afp/normal_flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace afp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_spectrum(const ShapeSpectrum& s) {
  for (double l : s.eigenvalues) {
    if (!std::isfinite(l) || std::abs(l) >= 1.0) {
      throw std::invalid_argument("principal curvatures must satisfy |lambda| < 1");
    }
  }
}

}  // namespace

TransferTrace jacobi_transfer(double alpha, double beta, double T, double kappa, double step) {
  if (!(alpha > 0.0)) throw std::invalid_argument("jacobi_transfer: alpha must be positive");
  if (!(std::abs(beta) < alpha)) throw std::invalid_argument("jacobi_transfer: need |beta| < alpha");
  if (!(T > 0.0) || T > kMaxTransferTime) throw std::invalid_argument("jacobi_transfer: need 0 < T <= 20");
  if (!(kappa >= 1.0)) throw std::invalid_argument("jacobi_transfer: kappa must be >= 1");
  if (!(step > 0.0) || step > kIntegrationStep) throw std::invalid_argument("jacobi_transfer: bad step");

  const auto steps = static_cast<std::size_t>(std::ceil(T / step - 1e-9));
  const double h = T / static_cast<double>(steps);

  TransferTrace tr;
  tr.kappa = kappa;
  tr.alpha = alpha;
  tr.beta = beta;
  tr.step = h;
  tr.ts.resize(steps + 1);
  tr.f.resize(steps + 1);

  // y = (j, j'), y' = (j', kappa j)
  double j = alpha;
  double dj = beta;
  tr.ts[0] = 0.0;
  tr.f[0] = j * j;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double k1j = dj, k1d = kappa * j;
    const double k2j = dj + 0.5 * h * k1d, k2d = kappa * (j + 0.5 * h * k1j);
    const double k3j = dj + 0.5 * h * k2d, k3d = kappa * (j + 0.5 * h * k2j);
    const double k4j = dj + h * k3d, k4d = kappa * (j + h * k3j);
    j += h / 6.0 * (k1j + 2 * k2j + 2 * k3j + k4j);
    dj += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    tr.ts[s] = static_cast<double>(s) * h;
    tr.f[s] = j * j;
    if (!(j > 0.0)) throw GeometryError("jacobi_transfer: transfer function vanished");
  }

  const std::size_t m = tr.f.size();
  tr.sqrtf_second.assign(m, kNaN);
  tr.logf_combo.assign(m, kNaN);
  if (m >= 5) {
    tr.fd_begin = 2;
    tr.fd_end = m - 2;
    for (std::size_t s = tr.fd_begin; s < tr.fd_end; ++s) {
      const double r0 = std::sqrt(tr.f[s - 1]), r1 = std::sqrt(tr.f[s]), r2 = std::sqrt(tr.f[s + 1]);
      tr.sqrtf_second[s] = (r2 - 2 * r1 + r0) / (h * h);
      const double g0 = std::log(tr.f[s - 1]), g1 = std::log(tr.f[s]), g2 = std::log(tr.f[s + 1]);
      const double gp = (g2 - g0) / (2 * h);
      const double gpp = (g2 - 2 * g1 + g0) / (h * h);
      tr.logf_combo[s] = gpp + 0.5 * gp * gp;
    }
  }
  return tr;
}

TransferTrace jacobi_transfer(const ShapeSpectrum& spectrum, int eigen_index, double alpha, double T,
                              double kappa) {
  check_spectrum(spectrum);
  if (eigen_index < 0 || eigen_index >= static_cast<int>(spectrum.eigenvalues.size())) {
    throw std::out_of_range("jacobi_transfer: eigenvalue index");
  }
  return jacobi_transfer(alpha, spectrum.eigenvalues[eigen_index] * alpha, T, kappa);
}

TransferCheck transfer_equation_check(const TransferTrace& trace, double strict_from) {
  TransferCheck r;
  r.kappa = trace.kappa;
  r.min_sqrt_excess = std::numeric_limits<double>::infinity();
  r.min_logf_combo = std::numeric_limits<double>::infinity();
  for (std::size_t s = trace.fd_begin; s < trace.fd_end; ++s) {
    const double sf = std::sqrt(trace.f[s]);
    const double pp = trace.sqrtf_second[s];
    r.max_rel_residual = std::max(r.max_rel_residual, std::abs(pp - trace.kappa * sf) / sf);
    r.max_rel_unit_residual = std::max(r.max_rel_unit_residual, std::abs(pp - sf) / sf);
    if (trace.ts[s] >= strict_from) r.min_sqrt_excess = std::min(r.min_sqrt_excess, pp - sf);
    r.min_logf_combo = std::min(r.min_logf_combo, trace.logf_combo[s]);
  }
  const bool unit = trace.kappa == 1.0;
  r.unit_identity_ok = unit && r.max_rel_unit_residual < kTransferRelTol;
  r.strict_branch_ok = !unit && r.min_sqrt_excess > 0.0;
  r.log_bound_ok = r.min_logf_combo >= 2.0 - kLogComboTol;
  r.passed = r.log_bound_ok && r.max_rel_residual < kTransferRelTol &&
             (unit ? r.unit_identity_ok : r.strict_branch_ok);
  return r;
}

void write_trace_csv(const TransferTrace& trace, std::ostream& out) {
  out << "t,f,sqrtf_residual,logf_combo\n";
  char buf[128];
  for (std::size_t s = 0; s < trace.ts.size(); ++s) {
    const double res = trace.sqrtf_second[s] - trace.kappa * std::sqrt(trace.f[s]);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", trace.ts[s], trace.f[s]);
    out << buf;
    if (std::isfinite(res)) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", res, trace.logf_combo[s]);
      out << buf;
    } else {
      out << ",\n";
    }
  }
}

double riccati_flow(double lambda, double t, double kappa, double step) {
  if (t < 0.0) throw std::invalid_argument("riccati_flow: t must be >= 0");
  if (t == 0.0) return lambda;
  const auto steps = static_cast<std::size_t>(std::ceil(t / step - 1e-9));
  const double h = t / static_cast<double>(steps);
  auto rhs = [kappa](double l) { return kappa - l * l; };
  double l = lambda;
  for (std::size_t s = 0; s < steps; ++s) {
    const double k1 = rhs(l);
    const double k2 = rhs(l + 0.5 * h * k1);
    const double k3 = rhs(l + 0.5 * h * k2);
    const double k4 = rhs(l + h * k3);
    l += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return l;
}

double mobius_flow(double lambda, double t, double kappa) {
  const double c = std::sqrt(kappa);
  const double th = std::tanh(c * t);
  return c * (lambda + c * th) / (c + lambda * th);
}

EquidistantSpectrum equidistant_spectrum(const ShapeSpectrum& base, double t, int ambient_dimension,
                                         double kappa) {
  check_spectrum(base);
  if (!(t >= 0.0) || t > kMaxDistance) throw std::invalid_argument("equidistant_spectrum: bad t");
  if (!(kappa >= 1.0)) throw std::invalid_argument("equidistant_spectrum: kappa must be >= 1");
  const int k = static_cast<int>(base.eigenvalues.size());
  const int sphere = ambient_dimension - 1 - k;
  if (k < 1 || sphere < 0) throw std::invalid_argument("equidistant_spectrum: dimension mismatch");

  EquidistantSpectrum e;
  e.t = t;
  e.kappa = kappa;
  e.base = base;
  for (double l : base.eigenvalues) {
    e.tangential.push_back(riccati_flow(l, t, kappa));
    e.tangential_closed.push_back(mobius_flow(l, t, kappa));
  }
  e.lambda_t = e.tangential;
  e.normal_block = t > 0.0;
  if (e.normal_block) {
    const double c = std::sqrt(kappa);
    e.normal.assign(static_cast<std::size_t>(sphere), c / std::tanh(c * t));
    e.lambda_t.insert(e.lambda_t.end(), e.normal.begin(), e.normal.end());
  }
  std::sort(e.lambda_t.begin(), e.lambda_t.end());
  return e;
}

SliceReport bounded_slice_check(const ShapeSpectrum& spectrum, double t) {
  check_spectrum(spectrum);
  if (!(t >= 0.0)) throw std::invalid_argument("bounded_slice_check: t must be >= 0");
  SliceReport r;
  r.max_value = -std::numeric_limits<double>::infinity();
  r.min_closed_margin = std::numeric_limits<double>::infinity();
  for (double l : spectrum.eigenvalues) {
    const double v = riccati_flow(l, t);
    r.max_value = std::max(r.max_value, v);
    r.min_closed_margin = std::min(r.min_closed_margin, v - mobius_flow(l, t));
  }
  r.passed = r.max_value <= 1.0 && r.min_closed_margin >= -1e-9;
  return r;
}

KConvexityReport k_convexity_check(const ShapeSpectrum& spectrum, double t, int ambient_dimension) {
  const auto e = equidistant_spectrum(spectrum, t, ambient_dimension);
  const int k = static_cast<int>(spectrum.eigenvalues.size());
  KConvexityReport r;
  r.k = k;
  r.t = t;
  r.minimal_base = std::abs(spectrum.sum()) <= 1e-6;
  r.above_convexity_radius = t >= std::atanh(spectrum.spectral_radius());

  std::vector<double> closed = e.tangential_closed;
  std::sort(closed.begin(), closed.end());
  const double coth = t > 0.0 ? 1.0 / std::tanh(t) : std::numeric_limits<double>::infinity();
  r.min_slack = std::numeric_limits<double>::infinity();
  double sum = 0.0, bound = 0.0;
  for (std::size_t i = 0; i < e.lambda_t.size(); ++i) {
    sum += e.lambda_t[i];
    bound += static_cast<int>(i) < k ? closed[i] : coth;
    r.partial_sums.push_back(sum);
    r.lower_bounds.push_back(bound);
    r.min_slack = std::min(r.min_slack, sum - bound);
  }
  r.k_smallest_sum = r.partial_sums[static_cast<std::size_t>(k) - 1];
  r.passed = r.min_slack >= -1e-9 && (t == 0.0 || !r.above_convexity_radius || r.k_smallest_sum > 0.0);
  return r;
}

ConvexityRadius convexity_radius(double sup) {
  if (!(sup >= 0.0) || sup >= 1.0) throw std::invalid_argument("convexity_radius: need 0 <= sup < 1");
  ConvexityRadius r;
  const double paper = std::atanh(1.0 - sup);
  r.paper_saturated = !(paper <= kMaxDistance);
  r.r_paper = r.paper_saturated ? kMaxDistance : paper;
  r.r_spectral = std::atanh(sup);
  r.disagree = std::abs(r.r_paper - r.r_spectral) > 1e-12;
  return r;
}

namespace {

struct FibreMap {
  const ParametricPatch& patch;
  const HyperboloidPoint& x;
  Vec v;      // unit normal at x
  Vec omega;  // unit normal at x orthogonal to v (unused in codimension one)
  std::map<std::size_t, FundamentalForms>& cache;

  const FundamentalForms& forms(std::size_t u) {
    auto it = cache.find(u);
    if (it == cache.end()) it = cache.emplace(u, fundamental_forms(patch, u)).first;
    return it->second;
  }

  HyperboloidPoint operator()(std::size_t u, double t, double sigma) {
    const ModelSpace& space = patch.space();
    const Vec n0 = std::cos(sigma) * v + std::sin(sigma) * omega;
    const HyperboloidPoint& y = patch.point(u);
    Vec moved = n0;
    if ((y.x - x.x).norm() > 0.0) {
      moved = space.parallel_transport(TangentVector{x, n0}, space.log(x, y), 1.0).v;
    }
    const auto& fu = forms(u);
    Vec nv = Vec::Zero(moved.size());
    for (const Vec& nu : fu.normal_frame) nv += mink_inner(moved, nu) * nu;
    const double len = mink_norm(nv);
    if (!(len > 1e-8)) throw GeometryError("exp_metric_lower_bound: degenerate normal field");
    nv /= len;
    if (t == 0.0) return y;
    return space.geodesic(TangentVector{y, nv}, t);
  }
};

}  // namespace

ExpMetricReport exp_metric_lower_bound(const ParametricPatch& patch, const std::vector<double>& t_samples,
                                       int direction_samples, std::uint64_t seed, int vertex_samples) {
  const ModelSpace& space = patch.space();
  const int k = patch.dim();
  const int codim = space.dimension() - k;
  const auto bound = sup_second_form(patch);
  if (!(bound.sup < 1.0)) throw GeometryError("exp_metric_lower_bound: patch is not almost-fuchsian");
  for (double t : t_samples) {
    if (!(t >= 0.0) || t > kMaxTransferTime) throw std::invalid_argument("exp_metric_lower_bound: bad t sample");
  }

  ExpMetricReport r;
  r.sup_second_form = bound.sup;
  r.delta = bound.delta;
  r.min_ratio = r.radial_min = r.tangential_min = r.mixed_min = std::numeric_limits<double>::infinity();
  r.sphere_min = codim > 1 ? std::numeric_limits<double>::infinity() : kNaN;

  // Offsets e_i and e_i +- e_j; each must exist at one and two steps on both sides.
  std::vector<std::array<int, kMaxPatchDim>> offsets;
  for (int i = 0; i < k; ++i) {
    std::array<int, kMaxPatchDim> o{};
    o[i] = 1;
    offsets.push_back(o);
    for (int j = i + 1; j < k; ++j) {
      o[j] = 1;
      offsets.push_back(o);
      o[j] = -1;
      offsets.push_back(o);
      o[j] = 0;
    }
  }
  auto step = [&](std::size_t v, const std::array<int, kMaxPatchDim>& o, int m) -> std::optional<std::size_t> {
    std::array<int, kMaxPatchDim> s{};
    for (int a = 0; a < k; ++a) s[a] = m * o[a];
    return patch.neighbor(v, std::span<const int>(s.data(), static_cast<std::size_t>(k)));
  };
  auto usable = [&](std::optional<std::size_t> u) {
    return u && patch.has_stencil(*u) && !patch.is_center(*u);
  };

  std::vector<std::size_t> eligible;
  for (std::size_t v : patch.interior_vertices()) {
    if (!usable(v)) continue;
    bool ok = true;
    for (const auto& o : offsets) {
      for (int m : {-2, -1, 1, 2}) ok = ok && usable(step(v, o, m));
    }
    if (ok) eligible.push_back(v);
  }
  if (eligible.empty()) throw std::invalid_argument("exp_metric_lower_bound: patch too small");

  std::mt19937_64 rng(seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  if (vertex_samples > 0 && eligible.size() > static_cast<std::size_t>(vertex_samples)) {
    eligible.resize(static_cast<std::size_t>(vertex_samples));
  }
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, offsets.size() - 1);

  std::map<std::size_t, FundamentalForms> cache;
  const double d2 = r.delta * r.delta;
  constexpr double fibre_step = 1e-4;

  auto record = [&](double ratio, double& bucket, double t, std::size_t v) {
    ++r.samples;
    bucket = std::min(bucket, ratio);
    if (ratio < r.min_ratio) {
      r.min_ratio = ratio;
      r.worst_t = t;
      r.worst_vertex = v;
    }
  };

  for (std::size_t v : eligible) {
    const auto& fx = cache.emplace(v, fundamental_forms(patch, v)).first->second;
    const HyperboloidPoint& x = patch.point(v);

    std::vector<std::pair<Vec, Vec>> normals;  // (v, omega)
    const auto& nf = fx.normal_frame;
    if (codim == 1) {
      normals.emplace_back(nf[0], Vec::Zero(nf[0].size()));
      normals.emplace_back(-nf[0], Vec::Zero(nf[0].size()));
    } else {
      for (int a = 0; a < codim; ++a) {
        const Vec& other = nf[static_cast<std::size_t>((a + 1) % codim)];
        normals.emplace_back(nf[static_cast<std::size_t>(a)], other);
        normals.emplace_back(-nf[static_cast<std::size_t>(a)], other);
      }
      for (int extra = 0; extra < 2; ++extra) {
        Vec c = Vec::Zero(nf[0].size());
        for (const Vec& nu : nf) c += unif(rng) * nu;
        const double len = mink_norm(c);
        if (len < 1e-3) continue;
        c /= len;
        // Orthogonal partner within the normal space.
        Vec w = Vec::Zero(c.size());
        for (const Vec& nu : nf) {
          w = nu - mink_inner(nu, c) * c;
          if (mink_norm(w) > 0.1) break;
        }
        normals.emplace_back(c, w / mink_norm(w));
      }
    }

    for (const auto& [nv, omega] : normals) {
      FibreMap E{patch, x, nv, omega, cache};
      for (double t : t_samples) {
        const double ch = std::cosh(t), sh = std::sinh(t);

        // Radial: exact unit speed along the fibre.
        {
          const double len = space.distance(E(v, t + fibre_step, 0.0), E(v, std::max(t - fibre_step, 0.0), 0.0));
          const double denom = t >= fibre_step ? 2 * fibre_step : t + fibre_step;
          const double g = len / denom;
          record(g * g / d2, r.radial_min, t, v);
        }
        if (codim > 1 && t > 1e-3) {
          const double len = space.distance(E(v, t, fibre_step), E(v, t, -fibre_step)) / (2 * fibre_step);
          record(len * len / (d2 * sh * sh), r.sphere_min, t, v);
        }

        // Distance-based derivative along a grid path with Richardson extrapolation.
        auto speed = [&](const std::array<int, kMaxPatchDim>& o, double a, double b, double tt) {
          auto at = [&](int m) { return E(*step(v, o, m), tt + m * a, m * b); };
          const double s1 = space.distance(at(1), at(-1)) / 2.0;
          const double s2 = space.distance(at(2), at(-2)) / 4.0;
          return (4.0 * s1 - s2) / 3.0;
        };
        auto base_speed = [&](const std::array<int, kMaxPatchDim>& o) {
          const double s1 = space.distance(patch.point(*step(v, o, 1)), patch.point(*step(v, o, -1))) / 2.0;
          const double s2 = space.distance(patch.point(*step(v, o, 2)), patch.point(*step(v, o, -2))) / 4.0;
          return (4.0 * s1 - s2) / 3.0;
        };

        for (const auto& o : offsets) {
          const double ell = base_speed(o);
          const double s = speed(o, 0.0, 0.0, t);
          record(s * s / (d2 * ch * ch * ell * ell), r.tangential_min, t, v);
        }
        for (int m = 0; m < direction_samples; ++m) {
          const auto& o = offsets[pick(rng)];
          const double ell = base_speed(o);
          const double a = unif(rng) * ell;
          const double b = codim > 1 ? unif(rng) * ell : 0.0;
          // Keep the fibre coordinate t + m a inside [0, inf).
          if (t - 2 * std::abs(a) < 0.0) continue;
          const double s = speed(o, a, b, t);
          const double h = a * a + ch * ch * ell * ell + sh * sh * b * b;
          record(s * s / (d2 * h), r.mixed_min, t, v);
        }
      }
    }
  }
  r.passed = r.samples > 0 && r.min_ratio >= 1.0 - kExpMetricSlack;
  return r;
}

}  // namespace afp
