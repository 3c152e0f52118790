#include "afp/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace afp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kMinMetricEigenvalue = 1e-8;

std::size_t product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

}  // namespace

ParametricPatch::ParametricPatch(ModelSpace space, std::vector<int> shape,
                                 std::vector<double> spacing, std::vector<HyperboloidPoint> points,
                                 std::vector<std::uint8_t> boundary_mask, GridTopology topology,
                                 std::vector<bool> periodic)
    : space_(space),
      shape_(std::move(shape)),
      spacing_(std::move(spacing)),
      points_(std::move(points)),
      mask_(std::move(boundary_mask)),
      topology_(topology),
      periodic_(std::move(periodic)) {
  const int k = dim();
  if (k < 2 || k > kMaxPatchDim || k > space_.dimension() - 1) {
    throw std::invalid_argument("ParametricPatch: need 2 <= k <= min(n-1, 4)");
  }
  if (static_cast<int>(spacing_.size()) != k) {
    throw std::invalid_argument("ParametricPatch: spacing must have one entry per axis");
  }
  for (int a = 0; a < k; ++a) {
    if (shape_[a] < 3) throw std::invalid_argument("ParametricPatch: each axis needs >= 3 samples");
    if (!(spacing_[a] > 0.0)) throw std::invalid_argument("ParametricPatch: spacing must be > 0");
  }
  if (periodic_.empty()) periodic_.assign(k, false);
  if (static_cast<int>(periodic_.size()) != k) {
    throw std::invalid_argument("ParametricPatch: periodic flags must have one entry per axis");
  }
  if (topology_ == GridTopology::Polar) {
    if (k != 2) throw std::invalid_argument("ParametricPatch: polar grids are two-dimensional");
    if (shape_[1] < 8 || shape_[1] % 2 != 0) {
      throw std::invalid_argument("ParametricPatch: polar grids need an even n_theta >= 8");
    }
    periodic_ = {false, true};
  }
  if (points_.size() != product(shape_)) {
    throw std::invalid_argument("ParametricPatch: point count does not match grid shape");
  }
  if (mask_.size() != points_.size()) {
    throw std::invalid_argument("ParametricPatch: boundary mask size does not match grid");
  }
  for (auto& p : points_) p = space_.project(p.x);

  strides_.assign(k, 1);
  for (int a = k - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * shape_[a + 1];
}

ParametricPatch ParametricPatch::sample(const ModelSpace& space, std::vector<int> shape,
                                        std::vector<double> lower, std::vector<double> spacing,
                                        const ParamMap& map) {
  const int k = static_cast<int>(shape.size());
  if (static_cast<int>(lower.size()) != k || static_cast<int>(spacing.size()) != k) {
    throw std::invalid_argument("ParametricPatch::sample: inconsistent axis counts");
  }
  const std::size_t count = product(shape);
  std::vector<HyperboloidPoint> pts;
  std::vector<std::uint8_t> mask(count, 0);
  pts.reserve(count);
  std::vector<double> u(k);
  for (std::size_t v = 0; v < count; ++v) {
    std::size_t rem = v;
    bool edge = false;
    for (int a = k - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % shape[a]);
      rem /= shape[a];
      u[a] = lower[a] + i * spacing[a];
      if (i == 0 || i == shape[a] - 1) edge = true;
    }
    pts.push_back(map(u));
    mask[v] = edge ? 1 : 0;
  }
  return ParametricPatch(space, std::move(shape), std::move(spacing), std::move(pts),
                         std::move(mask));
}

ParametricPatch ParametricPatch::polar(const ModelSpace& space, int n_r, int n_theta,
                                       double radial_step, const PolarMap& map) {
  if (n_r < 2) throw std::invalid_argument("ParametricPatch::polar: need n_r >= 2");
  const double dtheta = kTwoPi / n_theta;
  std::vector<HyperboloidPoint> pts;
  std::vector<std::uint8_t> mask;
  pts.reserve(static_cast<std::size_t>(n_r + 1) * n_theta);
  const HyperboloidPoint center = map(0.0, 0.0);
  for (int i = 0; i <= n_r; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      pts.push_back(i == 0 ? center : map(i * radial_step, j * dtheta));
      mask.push_back(i == n_r ? 1 : 0);
    }
  }
  return ParametricPatch(space, {n_r + 1, n_theta}, {radial_step, dtheta}, std::move(pts),
                         std::move(mask), GridTopology::Polar);
}

std::size_t ParametricPatch::flat(const GridIndex& idx) const {
  if (static_cast<int>(idx.size()) != dim()) throw std::invalid_argument("flat: wrong arity");
  std::size_t v = 0;
  for (int a = 0; a < dim(); ++a) {
    int i = idx[a];
    if (periodic_[a]) i = ((i % shape_[a]) + shape_[a]) % shape_[a];
    if (i < 0 || i >= shape_[a]) throw std::out_of_range("flat: grid index out of range");
    v += strides_[a] * static_cast<std::size_t>(i);
  }
  return v;
}

std::size_t ParametricPatch::flat(int i, int j) const { return flat(GridIndex{i, j}); }

GridIndex ParametricPatch::index(std::size_t v) const {
  GridIndex idx(dim());
  for (int a = 0; a < dim(); ++a) {
    idx[a] = static_cast<int>(v / strides_[a]);
    v %= strides_[a];
  }
  return idx;
}

std::optional<std::size_t> ParametricPatch::neighbor(std::size_t v,
                                                     std::span<const int> offset) const {
  GridIndex idx = index(v);
  for (int a = 0; a < dim(); ++a) idx[a] += offset[a];
  if (topology_ == GridTopology::Polar && idx[0] < 0) {
    idx[0] = -idx[0];
    idx[1] += shape_[1] / 2;
  }
  for (int a = 0; a < dim(); ++a) {
    if (periodic_[a]) {
      idx[a] = ((idx[a] % shape_[a]) + shape_[a]) % shape_[a];
    } else if (idx[a] < 0 || idx[a] >= shape_[a]) {
      return std::nullopt;
    }
  }
  return flat(idx);
}

void ParametricPatch::set_point(std::size_t v, HyperboloidPoint p) {
  points_.at(v) = space_.project(p.x);
}

bool ParametricPatch::is_center(std::size_t v) const {
  return topology_ == GridTopology::Polar && v < strides_[0];
}

bool ParametricPatch::has_stencil(std::size_t v) const {
  if (is_boundary(v)) return false;
  const GridIndex idx = index(v);
  for (int a = 0; a < dim(); ++a) {
    if (periodic_[a]) continue;
    if (topology_ == GridTopology::Polar && a == 0) {
      if (idx[0] >= shape_[0] - 1) return false;
      continue;
    }
    if (idx[a] < 1 || idx[a] > shape_[a] - 2) return false;
  }
  return true;
}

std::vector<std::size_t> ParametricPatch::interior_vertices() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < size(); ++v) {
    if (is_center(v) && v != 0) continue;
    if (has_stencil(v)) out.push_back(v);
  }
  return out;
}

int LocalJet::pack(int a, int b, int k) {
  if (a > b) std::swap(a, b);
  // row-major upper triangle
  return a * k - a * (a - 1) / 2 + (b - a);
}

LocalJet local_jet(const ParametricPatch& patch, std::size_t v) {
  if (!patch.has_stencil(v)) {
    throw std::out_of_range("local_jet: vertex has no central-difference stencil");
  }
  const int k = patch.dim();
  const int m = patch.space().ambient_size();
  LocalJet jet;
  jet.k = k;
  jet.point = patch.point(v);
  jet.d1.setZero(m, k);
  jet.d2.setZero(m, k * (k + 1) / 2);
  const Vec& p0 = jet.point.x;

  if (patch.is_center(v)) {
    // Quadratic fit c + a x + b y + (A x^2 + 2 B x y + C y^2)/2 through the centre and
    // the first ring; Fourier modes 0, 1 and 2 of the ring determine it exactly.
    const int n = patch.shape()[1];
    const double h = patch.spacing()[0];
    const double dtheta = patch.spacing()[1];
    Vec mean = Vec::Zero(m), c1 = Vec::Zero(m), s1 = Vec::Zero(m), c2 = Vec::Zero(m),
        s2 = Vec::Zero(m);
    for (int j = 0; j < n; ++j) {
      const Vec& p = patch.point(patch.flat(1, j)).x;
      const double th = j * dtheta;
      mean += p;
      c1 += std::cos(th) * p;
      s1 += std::sin(th) * p;
      c2 += std::cos(2.0 * th) * p;
      s2 += std::sin(2.0 * th) * p;
    }
    mean /= n;
    c1 *= 2.0 / n;
    s1 *= 2.0 / n;
    c2 *= 2.0 / n;
    s2 *= 2.0 / n;
    jet.d1.col(0) = c1 / h;
    jet.d1.col(1) = s1 / h;
    const double h2 = h * h;
    jet.d2.col(LocalJet::pack(0, 0, 2)) = 2.0 * (mean - p0 + c2) / h2;
    jet.d2.col(LocalJet::pack(0, 1, 2)) = 2.0 * s2 / h2;
    jet.d2.col(LocalJet::pack(1, 1, 2)) = 2.0 * (mean - p0 - c2) / h2;
    return jet;
  }

  std::array<int, kMaxPatchDim> off{};
  auto at = [&](std::span<const int> o) -> const Vec& {
    const auto nb = patch.neighbor(v, o);
    if (!nb) throw std::out_of_range("local_jet: stencil leaves the grid");
    return patch.point(*nb).x;
  };
  const std::span<const int> offs(off.data(), k);
  for (int a = 0; a < k; ++a) {
    const double h = patch.spacing()[a];
    off.fill(0);
    off[a] = 1;
    const Vec& plus = at(offs);
    off[a] = -1;
    const Vec& minus = at(offs);
    jet.d1.col(a) = (plus - minus) / (2.0 * h);
    jet.d2.col(LocalJet::pack(a, a, k)) = (plus - 2.0 * p0 + minus) / (h * h);
    for (int b = a + 1; b < k; ++b) {
      const double hb = patch.spacing()[b];
      off.fill(0);
      off[a] = 1;
      off[b] = 1;
      Vec mixed = at(offs);
      off[b] = -1;
      mixed -= at(offs);
      off[a] = -1;
      mixed += at(offs);
      off[b] = 1;
      mixed -= at(offs);
      jet.d2.col(LocalJet::pack(a, b, k)) = mixed / (4.0 * h * hb);
    }
  }
  return jet;
}

namespace {

std::vector<Vec> oriented_normal(const ModelSpace& space, const HyperboloidPoint& x,
                                 const std::vector<Vec>& tangents) {
  const int m = space.ambient_size();
  Eigen::MatrixXd w(m, m);
  w.row(0) = x.x.transpose();
  for (std::size_t a = 0; a < tangents.size(); ++a) w.row(a + 1) = tangents[a].transpose();
  Vec c(m);
  for (int a = 0; a < m; ++a) {
    w.row(m - 1).setZero();
    w(m - 1, a) = 1.0;
    c[a] = w.determinant();
  }
  c[0] = -c[0];  // raise the index with diag(-1, 1, ..., 1)
  const double nc = mink_norm(c);
  if (!(nc > 0.0)) throw GeometryError("fundamental_forms: degenerate tangent frame");
  return {c / nc};
}

std::vector<Vec> pivoted_normals(const ModelSpace& space, const HyperboloidPoint& x,
                                 const std::vector<Vec>& tangents, int codim) {
  const int m = space.ambient_size();
  std::vector<Vec> basis;  // orthonormal space-like vectors (tangents then normals)
  for (const Vec& t : tangents) {
    Vec r = t;
    for (const Vec& b : basis) r -= mink_inner(r, b) * b;
    basis.push_back(r / mink_norm(r));
  }
  std::vector<Vec> normals;
  std::vector<bool> used(m, false);
  while (static_cast<int>(normals.size()) < codim) {
    int best = -1;
    double best_norm = -1.0;
    Vec best_vec;
    for (int a = 0; a < m; ++a) {
      if (used[a]) continue;
      Vec e = Vec::Zero(m);
      e[a] = 1.0;
      Vec r = space.tangent(x, e).v;
      for (const Vec& b : basis) r -= mink_inner(r, b) * b;
      const double nr = mink_norm(r);
      if (nr > best_norm) {
        best_norm = nr;
        best = a;
        best_vec = r;
      }
    }
    used[best] = true;
    const Vec nu = best_vec / best_norm;
    basis.push_back(nu);
    normals.push_back(nu);
  }
  return normals;
}

}  // namespace

FundamentalForms fundamental_forms(const ModelSpace& space, const LocalJet& jet) {
  const int k = jet.k;
  FundamentalForms forms;
  forms.point = jet.point;
  for (int a = 0; a < k; ++a) forms.tangent_frame.push_back(space.tangent(jet.point, jet.d1.col(a)).v);
  forms.first.resize(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      forms.first(a, b) = forms.first(b, a) =
          mink_inner(forms.tangent_frame[a], forms.tangent_frame[b]);
    }
  }
  Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(forms.first, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues()[0] > kMinMetricEigenvalue)) {
    throw GeometryError("fundamental_forms: degenerate tangent frame (metric not positive definite)");
  }
  const int codim = space.dimension() - k;
  forms.normal_frame = codim == 1 ? oriented_normal(space, jet.point, forms.tangent_frame)
                                  : pivoted_normals(space, jet.point, forms.tangent_frame, codim);
  for (const Vec& nu : forms.normal_frame) {
    SmallMatrix s(k, k);
    for (int a = 0; a < k; ++a) {
      for (int b = a; b < k; ++b) s(a, b) = s(b, a) = mink_inner(Vec(jet.second(a, b)), nu);
    }
    forms.second.push_back(s);
  }
  return forms;
}

FundamentalForms fundamental_forms(const ParametricPatch& patch, std::size_t v) {
  return fundamental_forms(patch.space(), local_jet(patch, v));
}

double ShapeSpectrum::sum() const {
  return std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
}

double ShapeSpectrum::spectral_radius() const {
  double r = 0.0;
  for (double l : eigenvalues) r = std::max(r, std::abs(l));
  return r;
}

ShapeSpectrum shape_spectrum(const FundamentalForms& forms, int normal_index) {
  if (normal_index < 0 || normal_index >= static_cast<int>(forms.second.size())) {
    throw std::out_of_range("shape_spectrum: normal index out of range");
  }
  Eigen::LLT<SmallMatrix> llt(forms.first);
  if (llt.info() != Eigen::Success) {
    throw GeometryError("shape_spectrum: first fundamental form is not positive definite");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<SmallMatrix> eig(forms.second[normal_index], forms.first,
                                                           Eigen::EigenvaluesOnly);
  ShapeSpectrum s;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) s.eigenvalues.push_back(eig.eigenvalues()[i]);
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
  return s;
}

double second_form_norm(const FundamentalForms& forms) {
  double r = 0.0;
  for (std::size_t i = 0; i < forms.second.size(); ++i) {
    r = std::max(r, shape_spectrum(forms, static_cast<int>(i)).spectral_radius());
  }
  return r;
}

SecondFormBound sup_second_form(const ParametricPatch& patch) {
  SecondFormBound b;
  for (std::size_t v : patch.interior_vertices()) {
    const double n = second_form_norm(fundamental_forms(patch, v));
    if (n > b.sup) {
      b.sup = n;
      b.argmax = v;
    }
  }
  b.delta = 1.0 - b.sup;
  b.epsilon = 1.0 - b.sup;
  return b;
}

TangentVector mean_curvature_vector(const FundamentalForms& forms) {
  const Eigen::LDLT<SmallMatrix> ldlt(forms.first);
  Vec h = Vec::Zero(forms.point.x.size());
  for (std::size_t i = 0; i < forms.second.size(); ++i) {
    const SmallMatrix shape = ldlt.solve(forms.second[i]);
    h += shape.trace() * forms.normal_frame[i];
  }
  return {forms.point, h};
}

TangentVector mean_curvature_vector(const ParametricPatch& patch, std::size_t v) {
  return mean_curvature_vector(fundamental_forms(patch, v));
}

double induced_sectional_curvature(const ModelSpace& space, const FundamentalForms& forms,
                                   std::span<const double> a, std::span<const double> b) {
  const int k = static_cast<int>(forms.first.rows());
  if (static_cast<int>(a.size()) != k || static_cast<int>(b.size()) != k) {
    throw std::invalid_argument("induced_sectional_curvature: directions need k components");
  }
  Eigen::VectorXd alpha = Eigen::Map<const Eigen::VectorXd>(a.data(), k);
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(b.data(), k);
  const Eigen::MatrixXd g = forms.first;
  const double na = std::sqrt(alpha.dot(g * alpha));
  if (!(na > 1e-12)) throw GeometryError("induced_sectional_curvature: degenerate plane");
  alpha /= na;
  beta -= alpha.dot(g * beta) * alpha;
  const double nb = std::sqrt(std::max(0.0, beta.dot(g * beta)));
  if (!(nb > 1e-9 * std::sqrt(b.size()))) {
    throw GeometryError("induced_sectional_curvature: degenerate plane");
  }
  beta /= nb;

  Vec u = Vec::Zero(forms.point.x.size()), w = Vec::Zero(forms.point.x.size());
  for (int i = 0; i < k; ++i) {
    u += alpha[i] * forms.tangent_frame[i];
    w += beta[i] * forms.tangent_frame[i];
  }
  const TangentVector tu{forms.point, u}, tw{forms.point, w};
  double curvature = mink_inner(space.curvature_apply(tu, tw, tw).v, u);
  for (const SmallMatrix& s : forms.second) {
    const Eigen::MatrixXd sd = s;
    const double uu = alpha.dot(sd * alpha), ww = beta.dot(sd * beta), uw = alpha.dot(sd * beta);
    curvature += uu * ww - uw * uw;
  }
  return curvature;
}

double induced_sectional_curvature(const ParametricPatch& patch, std::size_t v,
                                   std::span<const double> a, std::span<const double> b) {
  return induced_sectional_curvature(patch.space(), fundamental_forms(patch, v), a, b);
}

double intrinsic_curvature_brioschi(const ParametricPatch& patch, std::size_t v) {
  if (patch.dim() != 2) throw std::invalid_argument("Brioschi curvature needs k = 2");
  if (patch.is_center(v)) throw std::invalid_argument("Brioschi curvature: centre vertex unsupported");
  const ModelSpace& space = patch.space();
  auto metric = [&](int di, int dj) {
    const int off[2] = {di, dj};
    const auto nb = patch.neighbor(v, off);
    if (!nb || !patch.has_stencil(*nb) || patch.is_center(*nb)) {
      throw std::out_of_range("Brioschi curvature: neighbour lacks a full stencil");
    }
    const FundamentalForms f = fundamental_forms(space, local_jet(patch, *nb));
    return std::array<double, 3>{f.first(0, 0), f.first(0, 1), f.first(1, 1)};
  };
  const double hu = patch.spacing()[0], hv = patch.spacing()[1];
  const auto c = metric(0, 0);
  const auto up = metric(1, 0), um = metric(-1, 0), vp = metric(0, 1), vm = metric(0, -1);
  const auto pp = metric(1, 1), pm = metric(1, -1), mp = metric(-1, 1), mm = metric(-1, -1);
  const double E = c[0], F = c[1], G = c[2];
  const double Eu = (up[0] - um[0]) / (2 * hu), Ev = (vp[0] - vm[0]) / (2 * hv);
  const double Fu = (up[1] - um[1]) / (2 * hu), Fv = (vp[1] - vm[1]) / (2 * hv);
  const double Gu = (up[2] - um[2]) / (2 * hu), Gv = (vp[2] - vm[2]) / (2 * hv);
  const double Evv = (vp[0] - 2 * E + vm[0]) / (hv * hv);
  const double Guu = (up[2] - 2 * G + um[2]) / (hu * hu);
  const double Fuv = (pp[1] - pm[1] - mp[1] + mm[1]) / (4 * hu * hv);
  Eigen::Matrix3d m1, m2;
  m1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,  //
      Fv - 0.5 * Gu, E, F,                                      //
      0.5 * Gv, F, G;
  m2 << 0.0, 0.5 * Ev, 0.5 * Gu,  //
      0.5 * Ev, E, F,             //
      0.5 * Gu, F, G;
  const double det = E * G - F * F;
  return (m1.determinant() - m2.determinant()) / (det * det);
}

CurvatureRange sampled_sectional_curvatures(const ModelSpace& space,
                                            const FundamentalForms& forms) {
  const int k = static_cast<int>(forms.first.rows());
  CurvatureRange r{std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  std::vector<double> a(k), b(k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      std::fill(a.begin(), a.end(), 0.0);
      std::fill(b.begin(), b.end(), 0.0);
      a[i] = 1.0;
      b[j] = 1.0;
      const double kk = induced_sectional_curvature(space, forms, a, b);
      r.k_min = std::min(r.k_min, kk);
      r.k_max = std::max(r.k_max, kk);
    }
  }
  return r;
}

PinchingReport pinching_check(const ParametricPatch& patch) {
  PinchingReport rep;
  const double kappa = patch.space().kappa();
  const SecondFormBound bound = sup_second_form(patch);
  rep.sup_second_form = bound.sup;
  rep.epsilon = bound.epsilon;
  rep.applicable = bound.sup < 1.0;
  const double eps = rep.epsilon;
  rep.upper_bound = -eps * (2.0 - eps);
  rep.lower_bound = -kappa - 2.0 * (1.0 - eps) * (1.0 - eps);
  rep.surface_case = patch.dim() == 2;
  rep.surface_upper_bound = -1.0;
  rep.surface_lower_bound = -kappa - (1.0 - eps) * (1.0 - eps);
  rep.k_min = std::numeric_limits<double>::infinity();
  rep.k_max = -std::numeric_limits<double>::infinity();

  auto flag = [&](std::size_t v, double kk, const char* which) {
    rep.violations.push_back({v, kk, which});
  };
  for (std::size_t v : patch.interior_vertices()) {
    const CurvatureRange r = sampled_sectional_curvatures(patch.space(), fundamental_forms(patch, v));
    ++rep.vertices_checked;
    rep.k_min = std::min(rep.k_min, r.k_min);
    rep.k_max = std::max(rep.k_max, r.k_max);
    if (r.k_max > rep.upper_bound + kPinchingTol) flag(v, r.k_max, "upper");
    if (r.k_min < rep.lower_bound - kPinchingTol) flag(v, r.k_min, "lower");
    if (rep.surface_case) {
      if (r.k_max > rep.surface_upper_bound + kPinchingTol) flag(v, r.k_max, "surface_upper");
      if (r.k_min < rep.surface_lower_bound - kPinchingTol) flag(v, r.k_min, "surface_lower");
    }
  }
  rep.passed = rep.applicable && rep.violations.empty();
  return rep;
}

namespace {

std::vector<std::vector<int>> graph_offsets(int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> o(k, -2);
  while (true) {
    int g = 0;
    bool nonzero = false;
    for (int c : o) {
      g = std::gcd(g, std::abs(c));
      nonzero |= c != 0;
    }
    if (nonzero && g == 1) out.push_back(o);
    int a = k - 1;
    while (a >= 0 && o[a] == 2) o[a--] = -2;
    if (a < 0) break;
    ++o[a];
  }
  return out;
}

}  // namespace

std::vector<double> grid_graph_distances(const ParametricPatch& patch, std::size_t source) {
  const auto offsets = graph_offsets(patch.dim());
  std::vector<double> dist(patch.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const auto& o : offsets) {
      const auto nb = patch.neighbor(v, o);
      if (!nb) continue;
      const double nd = d + patch.space().distance(patch.point(v), patch.point(*nb));
      if (nd < dist[*nb]) {
        dist[*nb] = nd;
        heap.push({nd, *nb});
      }
    }
  }
  return dist;
}

QuasiIsometryReport quasi_isometry_check(const ParametricPatch& patch, std::size_t sample_pairs,
                                         std::uint64_t seed) {
  const SecondFormBound bound = sup_second_form(patch);
  if (!(bound.sup < 1.0)) {
    throw GeometryError("quasi_isometry_check: patch is not almost-fuchsian (sup |II| >= 1)");
  }
  QuasiIsometryReport rep;
  rep.delta = bound.delta;
  rep.upper_limit = (1.0 + kQuasiIsometrySlack) / rep.delta;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, patch.size() - 1);
  constexpr std::size_t kSources = 8;
  std::vector<std::size_t> sources;
  std::unordered_map<std::size_t, std::vector<double>> tables;
  for (std::size_t i = 0; i < std::min(kSources, sample_pairs); ++i) sources.push_back(pick(rng));
  for (std::size_t s : sources) {
    if (tables.count(s)) continue;
    auto d = grid_graph_distances(patch, s);
    for (double x : d) {
      if (!std::isfinite(x)) throw std::runtime_error("quasi_isometry_check: disconnected grid");
    }
    tables.emplace(s, std::move(d));
  }
  for (std::size_t i = 0; i < sample_pairs; ++i) {
    const std::size_t s = sources[i % sources.size()];
    const std::size_t t = pick(rng);
    const double dx = patch.space().distance(patch.point(s), patch.point(t));
    if (dx < 1e-12) continue;
    const double ratio = tables.at(s)[t] / dx;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.pairs;
  }
  rep.lower_ok = rep.pairs > 0 && rep.min_ratio >= 1.0 - 1e-9;
  rep.upper_ok = rep.pairs > 0 && rep.max_ratio <= rep.upper_limit;
  return rep;
}

void write_spectra_csv(const ParametricPatch& patch, std::ostream& out) {
  const int k = patch.dim();
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  if (k == 2) {
    out << "i,j";
  } else {
    for (int a = 0; a < k; ++a) out << (a ? "," : "") << "i" << a;
  }
  for (int a = 0; a < k; ++a) out << ",lambda_" << (a + 1);
  out << ",K_min,K_max,H_norm\n";
  for (std::size_t v : patch.interior_vertices()) {
    const FundamentalForms forms = fundamental_forms(patch, v);
    int best = 0;
    double best_r = -1.0;
    for (std::size_t i = 0; i < forms.second.size(); ++i) {
      const double r = shape_spectrum(forms, static_cast<int>(i)).spectral_radius();
      if (r > best_r) {
        best_r = r;
        best = static_cast<int>(i);
      }
    }
    const ShapeSpectrum s = shape_spectrum(forms, best);
    const CurvatureRange kr = sampled_sectional_curvatures(patch.space(), forms);
    const double h = mink_norm(mean_curvature_vector(forms).v);
    const GridIndex idx = patch.index(v);
    for (int a = 0; a < k; ++a) out << (a ? "," : "") << idx[a];
    for (double l : s.eigenvalues) out << "," << num(l);
    out << "," << num(kr.k_min) << "," << num(kr.k_max) << "," << num(h) << "\n";
  }
}

}  // namespace afp
