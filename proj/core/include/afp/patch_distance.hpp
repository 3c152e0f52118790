#pragma once

// Distance from points of H^n to a sampled surface, and the comparison checks
// built on it: Hausdorff distance, bounded distance, subharmonicity of the
// squared distance along a second surface, and the infimum Phi(d).

#include "afp/immersion.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace afp {

/// Closest point on a face (i, j)-(i+1, j+1): the ambient bilinear interpolant
/// of the four corners, radially projected onto the hyperboloid. Grid location
/// is (i + s, j + t).
struct PatchFoot {
  double distance = 0.0;
  HyperboloidPoint foot;
  std::size_t face = 0;
  double s = 0.0;
  double t = 0.0;
  double grid_i = 0.0;
  double grid_j = 0.0;
  bool clipped = false;  // foot on the Dirichlet edge of the grid
};

class PatchDistance {
 public:
  /// k = 2 patches only.
  explicit PatchDistance(const ParametricPatch& patch);

  PatchFoot query(const HyperboloidPoint& x, std::optional<std::size_t> hint = std::nullopt) const;

  const ParametricPatch& patch() const { return patch_; }
  std::size_t faces() const { return faces_.size(); }

 private:
  struct Face {
    std::size_t c[4];  // (i,j), (i+1,j), (i,j+1), (i+1,j+1)
    int i = 0, j = 0;
    HyperboloidPoint centre;
    double radius = 0.0;
    bool outer = false;  // s = 1 edge lies on the Dirichlet ring (polar)
  };

  void refine(const Face& f, const HyperboloidPoint& x, PatchFoot& out) const;
  bool on_dirichlet_edge(const Face& f, double s, double t) const;

  const ParametricPatch& patch_;
  std::vector<Face> faces_;
};

PatchFoot distance_to_patch(const HyperboloidPoint& x, const ParametricPatch& patch);

/// Vertices outside the collar: polar rows i <= 0.9 n_r (centre once);
/// rectangular grids drop the outer 10% of every axis.
std::vector<std::size_t> collar_interior(const ParametricPatch& patch, double collar = 0.1);

/// Symmetric sup-inf of distance_to_patch over collar-excluded vertices.
double hausdorff(const ParametricPatch& a, const ParametricPatch& b);

struct BoundedDistanceReport {
  double sup_second_form = 0.0;
  double r_paper = 0.0;
  double r_spectral = 0.0;
  double radius = 0.0;  // max of the two
  double max_distance = 0.0;
  std::size_t worst_vertex = 0;
  std::size_t checked = 0;
  std::size_t clipped = 0;
  bool passed = false;
};

/// Every vertex of Z within max(r_paper, r_spectral) + tol of Y; the radii come
/// from sup |II| of Y unless sup_override is given.
BoundedDistanceReport bounded_distance_check(const ParametricPatch& z, const ParametricPatch& y,
                                             double tol = 1e-6,
                                             std::optional<double> sup_override = std::nullopt);

struct PhiResult {
  double d = 0.0;
  int k = 0;
  double sup = 0.0;
  double value = 0.0;      // min of brute force and polish
  double brute = 0.0;      // grid search refined to 1e-4
  double polished = 0.0;   // pattern search from the brute-force optimum
  double reduction = 0.0;  // k = 2 only: min over s in [0, sup] of m(-s) + m(s); NaN otherwise
  std::vector<double> minimizer;
};

/// inf of sum (tanh d + l_i) / (1 + l_i tanh d) over sum l_i = 0, |l_i| <= sup.
/// 2 <= k <= 4.
PhiResult phi_inf(double d, int k, double sup);

struct CEstimate {
  double c_est = 0.0;
  double argmin_d = 0.0;
  double radius = 0.0;
  int samples = 0;
};

/// 2 min over d in (0, r] of Phi(d)/d with r = max(r_paper, r_spectral).
CEstimate estimate_c(int k, double sup, int samples = 200);

struct SubharmonicityReport {
  double c_est = 0.0;
  double tol = 0.0;  // 1e-2 max u (at least 1e-12)
  double max_u = 0.0;
  std::size_t checked = 0;
  std::size_t satisfied = 0;
  std::size_t excluded = 0;  // clipped feet, missing stencils, centre
  double fraction = 0.0;
  double min_margin = 0.0;  // min of Laplacian u - C u
  std::size_t worst_vertex = 0;
  std::size_t crosscheck_vertices = 0;
  double crosscheck_max_rel = 0.0;  // Laplacian vs trace of the ambient Hessian plus <grad u, H>
  bool crosscheck_ok = false;
  bool interior_max_ok = false;  // no interior local max of u above tol
  bool passed = false;           // every checked vertex satisfies the inequality
};

inline constexpr double kSubharmonicFraction = 0.99;
inline constexpr double kCrosscheckRelTol = 5e-2;

/// u = d(., Y)^2 sampled on Z; Laplacian of u along Z by central differences
/// with the Christoffel correction of Z's induced metric.
SubharmonicityReport subharmonicity_check(const ParametricPatch& z, const ParametricPatch& y, double c_est,
                                          bool crosscheck = true);

}  // namespace afp
