#pragma once

// Convex hulls of sampled ideal boundary sets. In the Klein ball geodesics are
// straight chords, so the hyperbolic convex hull of ideal points is the
// Euclidean hull of their Klein images.

#include "afp/hadamard.hpp"
#include "afp/immersion.hpp"
#include "afp/json_format.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace afp {

struct IdealBoundarySet {
  std::vector<IdealPoint> samples;
};

/// Closed curve in the ideal boundary of H^3, parametrized by an angle.
///   circle        equator z = 0
///   ellipse:a:b   inverse stereographic image of the planar ellipse (a cos, b sin)
///   wavy:m:amp    normalize(cos t, sin t, amp sin(m t))
///   csv:<path>    unit vectors, one per row, joined by normalized linear interpolation
class IdealCurve {
 public:
  static IdealCurve parse(const std::string& spec);
  static IdealCurve from_samples(std::vector<Eigen::Vector3d> samples, std::string name);

  IdealPoint at(double theta) const;
  IdealBoundarySet sample(int count) const;
  const std::string& name() const { return name_; }

 private:
  IdealCurve(std::function<Eigen::Vector3d(double)> f, std::string name);

  std::function<Eigen::Vector3d(double)> f_;
  std::string name_;
};

struct HullFacet {
  Eigen::VectorXd normal;  // unit, outward
  double offset = 0.0;     // <normal, p> <= offset inside
};

/// Facet description of the hull inside its affine span. A full-dimensional
/// hull has rank == dimension, the identity basis and a zero origin; a flat one
/// keeps the span (origin + orthonormal basis columns) and facets whose normals
/// lie in it.
struct KleinHull {
  int dimension = 0;
  int rank = 0;
  bool degenerate = false;
  Eigen::VectorXd origin;
  Eigen::MatrixXd basis;  // dimension x rank
  double thickness = 0.0;  // largest sample distance from the span
  std::vector<HullFacet> facets;
  std::vector<std::size_t> vertices;  // sample indices, ascending
  double max_violation = 0.0;         // max over samples and facets of <n,p> - offset

  /// max over facets of <n,p> - offset; flat hulls also include the distance to the span.
  double margin(const Eigen::VectorXd& p) const;
};

inline constexpr double kHullEps = 1e-12;

/// Sample sets of affine rank above 3 are rejected.
KleinHull build_hull(const IdealBoundarySet& set);
KleinHull build_hull(const std::vector<Eigen::VectorXd>& points);

struct Containment {
  bool contained = false;
  double margin = 0.0;
};

Containment contains_klein(const KleinHull& hull, const Eigen::VectorXd& p, double tol);
Containment contains(const KleinHull& hull, const ModelSpace& space, const HyperboloidPoint& x, double tol);

struct BarrierReport {
  std::size_t vertices_checked = 0;
  std::size_t violations = 0;
  double max_margin = 0.0;
  std::size_t worst_vertex = 0;
  bool passed = false;
};

/// Every non-Dirichlet vertex of the patch must lie in the hull within tol.
BarrierReport barrier_check(const KleinHull& hull, const ParametricPatch& patch, double tol);

Json hull_to_json(const KleinHull& hull);
KleinHull hull_from_json(const Json& j);

}  // namespace afp
