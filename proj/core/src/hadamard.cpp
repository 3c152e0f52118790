#include "afp/hadamard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace afp {

double mink_inner(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("mink_inner: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() == 0) return 0.0;
  return -a[0] * b[0] + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

double mink_norm(const Vec& v) { return std::sqrt(std::max(0.0, mink_inner(v, v))); }

ModelSpace::ModelSpace(int dimension, double kappa)
    : n_(dimension), kappa_(kappa), sqrt_kappa_(std::sqrt(kappa)) {
  if (dimension < 2 || dimension + 1 > kMaxAmbient) {
    throw std::invalid_argument("ModelSpace: dimension must lie in [2, " +
                                std::to_string(kMaxAmbient - 1) + "]");
  }
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("ModelSpace: curvature scale kappa must be >= 1");
  }
}

void ModelSpace::check_size(const Vec& v) const {
  if (v.size() != ambient_size()) {
    throw std::invalid_argument("ModelSpace: expected a vector of length " +
                                std::to_string(ambient_size()));
  }
}

void ModelSpace::check_base(const TangentVector& a, const TangentVector& b) const {
  const double scale = 1.0 + a.base.x.cwiseAbs().maxCoeff();
  if ((a.base.x - b.base.x).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("tangent vectors are based at different points");
  }
}

HyperboloidPoint ModelSpace::origin() const {
  Vec x = Vec::Zero(ambient_size());
  x[0] = 1.0 / sqrt_kappa_;
  return {x};
}

HyperboloidPoint ModelSpace::project(const Vec& y) const {
  check_size(y);
  if (!(y[0] > 0.0)) throw GeometryError("project: vector is not future time-like");
  const double q = -kappa_ * mink_inner(y, y);
  // Within rounding of the hyperboloid (always the case far from the origin,
  // where <y,y> loses all digits) only x0 is recomputed, which is exact to
  // working precision; radial rescaling by an inaccurate q would move the point.
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + kappa_ * y.squaredNorm());
  if (std::abs(q - 1.0) <= noise) {
    Vec x = y;
    x[0] = std::sqrt(1.0 / kappa_ + y.tail(n_).squaredNorm());
    return {x};
  }
  if (!(q > 0.0)) throw GeometryError("project: vector is not future time-like");
  return {y / std::sqrt(q)};
}

TangentVector ModelSpace::tangent(const HyperboloidPoint& x, const Vec& v) const {
  check_size(v);
  return {x, v + kappa_ * mink_inner(x.x, v) * x.x};
}

bool ModelSpace::on_hyperboloid(const HyperboloidPoint& x, double tol) const {
  if (x.x.size() != ambient_size() || !(x.x[0] > 0.0)) return false;
  return std::abs(kappa_ * mink_inner(x.x, x.x) + 1.0) <= tol * x.x.squaredNorm() * kappa_ + tol;
}

double ModelSpace::distance(const HyperboloidPoint& a, const HyperboloidPoint& b) const {
  // acosh(-kappa <a,b>) loses half the digits for small d; the chord form
  // <a-b,a-b> = (4/kappa) sinh^2(sqrt(kappa) d / 2) cancels for large d.
  const double c = -kappa_ * mink_inner(a.x, b.x);
  if (c > 2.0) return std::acosh(c) / sqrt_kappa_;
  const Vec diff = a.x - b.x;
  const double chord2 = std::max(0.0, mink_inner(diff, diff));
  return 2.0 / sqrt_kappa_ * std::asinh(0.5 * sqrt_kappa_ * std::sqrt(chord2));
}

HyperboloidPoint ModelSpace::geodesic(const TangentVector& v, double t) const {
  check_size(v.v);
  const double speed2 = mink_inner(v.v, v.v);
  if (std::abs(speed2 - 1.0) > 1e-8) {
    throw GeometryError("geodesic: initial velocity is not unit speed (<v,v> = " +
                        std::to_string(speed2) + ")");
  }
  if (!std::isfinite(t) || std::abs(t) > kMaxDistance) {
    throw GeometryError("geodesic: |t| exceeds the distance cap");
  }
  const double s = sqrt_kappa_ * t;
  // A tangency error e = <x, v> moves the result off the sheet by about
  // sinh(2s) e while the spatial part stays accurate, so x0 is recomputed.
  Vec y = std::cosh(s) * v.base.x + (std::sinh(s) / sqrt_kappa_) * v.v;
  y[0] = std::sqrt(1.0 / kappa_ + y.tail(n_).squaredNorm());
  return {y};
}

HyperboloidPoint ModelSpace::exp(const TangentVector& v) const {
  const double len = mink_norm(v.v);
  if (len == 0.0) return v.base;
  return geodesic({v.base, v.v / len}, len);
}

TangentVector ModelSpace::log(const HyperboloidPoint& x, const HyperboloidPoint& y) const {
  check_size(x.x);
  check_size(y.x);
  const double d = distance(x, y);
  const Vec w = y.x + kappa_ * mink_inner(x.x, y.x) * x.x;
  const double wn = mink_norm(w);
  if (d == 0.0 || wn == 0.0) return {x, Vec::Zero(ambient_size())};
  if (d > kMaxDistance) throw GeometryError("log: distance exceeds the cap");
  return tangent(x, (d / wn) * w);
}

TangentVector ModelSpace::parallel_transport(const TangentVector& v, const TangentVector& along,
                                             double t) const {
  check_base(v, along);
  const double s = mink_norm(along.v);
  if (s == 0.0 || t == 0.0) return v;
  const Vec u = along.v / s;
  const double tau = t * s;
  const double a = mink_inner(v.v, u);
  const double st = sqrt_kappa_ * tau;
  const Vec velocity = sqrt_kappa_ * std::sinh(st) * v.base.x + std::cosh(st) * u;
  const HyperboloidPoint end = geodesic({v.base, u}, tau);
  return tangent(end, v.v + a * (velocity - u));
}

TangentVector ModelSpace::curvature_apply(const TangentVector& u, const TangentVector& v,
                                          const TangentVector& w) const {
  check_base(u, v);
  check_base(u, w);
  return {u.base, -kappa_ * (mink_inner(v.v, w.v) * u.v - mink_inner(u.v, w.v) * v.v)};
}

double ModelSpace::sectional_curvature(const TangentVector& u, const TangentVector& v) const {
  const double area2 =
      mink_inner(u.v, u.v) * mink_inner(v.v, v.v) - std::pow(mink_inner(u.v, v.v), 2);
  if (!(area2 > 1e-300)) throw GeometryError("sectional_curvature: degenerate plane");
  return mink_inner(curvature_apply(u, v, v).v, u.v) / area2;
}

Vec ModelSpace::to_klein(const HyperboloidPoint& x) const {
  check_size(x.x);
  return x.x.tail(n_) / x.x[0];
}

HyperboloidPoint ModelSpace::from_klein(const Vec& p) const {
  if (p.size() != n_) throw std::invalid_argument("from_klein: expected an n-vector");
  const double r2 = p.squaredNorm();
  if (!(r2 < 1.0)) throw GeometryError("from_klein: point is not inside the unit ball");
  Vec y(ambient_size());
  y[0] = 1.0;
  y.tail(n_) = p;
  return {y / std::sqrt(kappa_ * (1.0 - r2))};
}

HyperboloidPoint ModelSpace::toward_ideal(const IdealPoint& p, double r) const {
  if (p.klein.size() != n_) throw std::invalid_argument("toward_ideal: expected an n-vector");
  const double len = p.klein.norm();
  if (!(len > 0.0)) throw GeometryError("toward_ideal: zero direction");
  Vec u = Vec::Zero(ambient_size());
  u.tail(n_) = p.klein / len;
  return geodesic({origin(), u}, r);
}

std::vector<Vec> ModelSpace::tangent_basis(const HyperboloidPoint& x) const {
  std::vector<Vec> basis;
  std::vector<bool> used(ambient_size(), false);
  while (static_cast<int>(basis.size()) < n_) {
    int best = -1;
    double best_norm = -1.0;
    Vec best_vec;
    for (int a = 0; a < ambient_size(); ++a) {
      if (used[a]) continue;
      Vec e = Vec::Zero(ambient_size());
      e[a] = 1.0;
      Vec r = tangent(x, e).v;
      for (const Vec& b : basis) r -= mink_inner(r, b) * b;
      const double nr = mink_norm(r);
      if (nr > best_norm) {
        best_norm = nr;
        best = a;
        best_vec = r;
      }
    }
    used[best] = true;
    basis.push_back(best_vec / best_norm);
  }
  return basis;
}

LorentzTransform::LorentzTransform(int dimension)
    : m_(Eigen::MatrixXd::Identity(dimension + 1, dimension + 1)) {}

LorentzTransform LorentzTransform::boost(int dimension, int axis, double rapidity) {
  if (axis < 1 || axis > dimension) throw std::invalid_argument("boost: axis out of range");
  LorentzTransform t(dimension);
  t.m_(0, 0) = t.m_(axis, axis) = std::cosh(rapidity);
  t.m_(0, axis) = t.m_(axis, 0) = std::sinh(rapidity);
  return t;
}

LorentzTransform LorentzTransform::rotation(int dimension, int axis_a, int axis_b, double angle) {
  if (axis_a < 1 || axis_b < 1 || axis_a > dimension || axis_b > dimension || axis_a == axis_b) {
    throw std::invalid_argument("rotation: axes out of range");
  }
  LorentzTransform t(dimension);
  t.m_(axis_a, axis_a) = t.m_(axis_b, axis_b) = std::cos(angle);
  t.m_(axis_a, axis_b) = -std::sin(angle);
  t.m_(axis_b, axis_a) = std::sin(angle);
  return t;
}

LorentzTransform LorentzTransform::then(const LorentzTransform& next) const {
  LorentzTransform t(static_cast<int>(m_.rows()) - 1);
  t.m_ = next.m_ * m_;
  return t;
}

HyperboloidPoint LorentzTransform::apply(const HyperboloidPoint& x) const {
  Vec y = m_ * x.x;
  // one renormalization keeps repeated application on the sheet
  const double q = -mink_inner(y, y);
  const double q0 = -mink_inner(x.x, x.x);
  return {y * std::sqrt(q0 / q)};
}

TangentVector LorentzTransform::apply(const TangentVector& v) const {
  return {apply(v.base), m_ * v.v};
}

IdealPoint LorentzTransform::apply(const IdealPoint& p) const {
  const int n = static_cast<int>(m_.rows()) - 1;
  Vec null(n + 1);
  null[0] = 1.0;
  null.tail(n) = p.klein / p.klein.norm();
  const Vec q = m_ * null;
  const Vec dir = q.tail(n) / q[0];
  return {dir / dir.norm()};
}

namespace {

double richardson_second(const ModelSpace& space, const HyperboloidPoint& p,
                         const HyperboloidPoint& x, const Vec& w, double f0) {
  auto second = [&](double h) {
    const double fp = space.distance(space.exp({x, h * w}), p);
    const double fm = space.distance(space.exp({x, -h * w}), p);
    return (fp - 2.0 * f0 + fm) / (h * h);
  };
  const double coarse = second(kHessianStep);
  const double fine = second(0.5 * kHessianStep);
  return (4.0 * fine - coarse) / 3.0;
}

double comparison_bound(double c, double f) {
  if (c == 0.0) return 1.0 / f;
  return c / std::tanh(c * f);
}

}  // namespace

HessianReport distance_hessian_check(const ModelSpace& space, const HyperboloidPoint& p,
                                     const HyperboloidPoint& x, double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) throw std::invalid_argument("hessian check: need 0 <= a <= b");
  const double k = space.kappa();
  if (k < a * a * (1.0 - 1e-12) || k > b * b * (1.0 + 1e-12)) {
    throw std::invalid_argument("hessian check: kappa must lie in [a^2, b^2]");
  }
  HessianReport r;
  r.f = space.distance(x, p);
  if (r.f < kHessianMinDistance) {
    throw GeometryError("hessian check: x is too close to p for finite differencing");
  }

  const Vec radial = -space.log(x, p).v / r.f;
  std::vector<Vec> ortho;
  for (const Vec& e : space.tangent_basis(x)) {
    Vec w = e - mink_inner(e, radial) * radial;
    for (const Vec& o : ortho) w -= mink_inner(w, o) * o;
    const double nw = mink_norm(w);
    if (nw > 1e-6) ortho.push_back(w / nw);
    if (static_cast<int>(ortho.size()) == space.dimension() - 1) break;
  }

  const int m = static_cast<int>(ortho.size());
  Eigen::MatrixXd hess(m, m);
  for (int i = 0; i < m; ++i) {
    hess(i, i) = richardson_second(space, p, x, ortho[i], r.f);
    for (int j = 0; j < i; ++j) {
      const double plus = richardson_second(space, p, x, ortho[i] + ortho[j], r.f);
      const double minus = richardson_second(space, p, x, ortho[i] - ortho[j], r.f);
      hess(i, j) = hess(j, i) = 0.25 * (plus - minus);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
  for (int i = 0; i < m; ++i) r.eigenvalues.push_back(eig.eigenvalues()[i]);
  r.radial_eigenvalue = richardson_second(space, p, x, radial, r.f);

  r.exact = comparison_bound(space.sqrt_kappa(), r.f);
  r.lower_bound = comparison_bound(a, r.f);
  r.upper_bound = comparison_bound(b, r.f);
  r.within_lower = r.eigenvalues.front() >= r.lower_bound - kHessianBoundTol;
  r.within_upper = r.eigenvalues.back() <= r.upper_bound + kHessianBoundTol;
  return r;
}

}  // namespace afp
