#pragma once

// Constant-curvature hyperbolic space H^n (sectional curvature -kappa) in the
// hyperboloid model { x : <x,x> = -1/kappa, x0 > 0 } of Minkowski space R^{1,n}.
//
// Coordinates are stored with the time-like entry first: x = (x0, x1, ..., xn).
// All geodesics, exponential/logarithm maps and parallel transport are closed
// form; every result is renormalized onto the hyperboloid (or its tangent space)
// before being returned.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace afp {

/// Largest supported ambient (Minkowski) dimension n+1. Vectors live on the
/// stack so per-vertex kernels never allocate.
inline constexpr int kMaxAmbient = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAmbient, 1>;
using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxAmbient, kMaxAmbient>;

/// Distances beyond this are refused: cosh overflows precision long before it
/// overflows range.
inline constexpr double kMaxDistance = 40.0;

/// Thrown when an operation is asked for something geometrically meaningless
/// (non-unit speed, point off the hyperboloid, distance beyond the cap, ...).
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct HyperboloidPoint {
  Vec x;
};

struct TangentVector {
  HyperboloidPoint base;
  Vec v;
};

/// Point of the ideal boundary, stored on the unit sphere of the Klein ball.
struct IdealPoint {
  Vec klein;
};

/// Minkowski bilinear form -a0 b0 + sum_{i>=1} ai bi.
double mink_inner(const Vec& a, const Vec& b);

/// <v,v> for a space-like vector, clamped at zero; sqrt of it.
double mink_norm(const Vec& v);

class ModelSpace {
 public:
  ModelSpace(int dimension, double kappa = 1.0);

  int dimension() const { return n_; }
  int ambient_size() const { return n_ + 1; }
  double kappa() const { return kappa_; }
  double sqrt_kappa() const { return sqrt_kappa_; }

  HyperboloidPoint origin() const;

  /// Radially rescales a future time-like vector onto the hyperboloid.
  HyperboloidPoint project(const Vec& y) const;
  /// Removes the component of v along x (Minkowski-orthogonal projection).
  TangentVector tangent(const HyperboloidPoint& x, const Vec& v) const;
  /// Checks the hyperboloid constraint within tol (relative to 1/kappa).
  bool on_hyperboloid(const HyperboloidPoint& x, double tol = 1e-10) const;

  double distance(const HyperboloidPoint& a, const HyperboloidPoint& b) const;

  /// Unit-speed geodesic through x with initial velocity v (<v,v> = 1).
  HyperboloidPoint geodesic(const TangentVector& v, double t) const;
  HyperboloidPoint exp(const TangentVector& v) const;
  /// Inverse of exp; returns the zero vector when x == y.
  TangentVector log(const HyperboloidPoint& x, const HyperboloidPoint& y) const;

  /// Transports v along the geodesic s -> exp(s * along) from s = 0 to s = t.
  TangentVector parallel_transport(const TangentVector& v, const TangentVector& along,
                                   double t) const;

  /// R(u,v)w = -kappa (<v,w> u - <u,w> v).
  TangentVector curvature_apply(const TangentVector& u, const TangentVector& v,
                                const TangentVector& w) const;
  /// <R(u,v)v,u> / (|u|^2 |v|^2 - <u,v>^2).
  double sectional_curvature(const TangentVector& u, const TangentVector& v) const;

  /// Projective (Klein) coordinates (x1..xn)/x0; geodesics become straight chords.
  Vec to_klein(const HyperboloidPoint& x) const;
  HyperboloidPoint from_klein(const Vec& p) const;

  /// Point at distance r from the origin on the ray towards an ideal point.
  HyperboloidPoint toward_ideal(const IdealPoint& p, double r) const;

  /// Orthonormal basis of T_x X, built by Gram-Schmidt over the coordinate axes.
  std::vector<Vec> tangent_basis(const HyperboloidPoint& x) const;

 private:
  void check_size(const Vec& v) const;
  void check_base(const TangentVector& a, const TangentVector& b) const;

  int n_;
  double kappa_;
  double sqrt_kappa_;
};

/// Linear map of R^{1,n} preserving the Minkowski form and the upper sheet;
/// acts isometrically on the hyperboloid and projectively on the ideal boundary.
class LorentzTransform {
 public:
  explicit LorentzTransform(int dimension);

  static LorentzTransform boost(int dimension, int axis, double rapidity);
  static LorentzTransform rotation(int dimension, int axis_a, int axis_b, double angle);
  LorentzTransform then(const LorentzTransform& next) const;

  HyperboloidPoint apply(const HyperboloidPoint& x) const;
  TangentVector apply(const TangentVector& v) const;
  IdealPoint apply(const IdealPoint& p) const;

  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

/// Hessian of f = d(., p) at x, by second-order finite differences of f along
/// geodesics, compared with the constant-curvature comparison bounds
/// a coth(a f) <= Hess f <= b coth(b f) on the orthocomplement of grad f.
struct HessianReport {
  double f = 0.0;
  double radial_eigenvalue = 0.0;
  std::vector<double> eigenvalues;  // orthocomplement of grad f, ascending
  double exact = 0.0;               // sqrt(kappa) coth(sqrt(kappa) f)
  double lower_bound = 0.0;         // a coth(a f), or 1/f when a == 0
  double upper_bound = 0.0;         // b coth(b f)
  bool within_lower = false;
  bool within_upper = false;
};

inline constexpr double kHessianStep = 1e-3;
inline constexpr double kHessianBoundTol = 1e-4;
inline constexpr double kHessianMinDistance = 0.05;

HessianReport distance_hessian_check(const ModelSpace& space, const HyperboloidPoint& p,
                                     const HyperboloidPoint& x, double a, double b);

}  // namespace afp
