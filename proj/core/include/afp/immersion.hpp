#pragma once

// Discrete immersed k-submanifolds of H^n sampled on structured grids, and the
// extrinsic/intrinsic geometry computed from them by central differences.

#include "afp/hadamard.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace afp {

inline constexpr int kMaxPatchDim = 4;

/// Rectangular grids use central differences along every axis. Polar grids
/// (k = 2 only) index (radial row, angle column); row 0 is the collapsed centre,
/// stored once per column, and the angle axis wraps.
enum class GridTopology { Rectangular, Polar };

using GridIndex = std::vector<int>;

class ParametricPatch {
 public:
  ParametricPatch(ModelSpace space, std::vector<int> shape, std::vector<double> spacing,
                  std::vector<HyperboloidPoint> points, std::vector<std::uint8_t> boundary_mask,
                  GridTopology topology = GridTopology::Rectangular,
                  std::vector<bool> periodic = {});

  using ParamMap = std::function<HyperboloidPoint(std::span<const double>)>;
  using PolarMap = std::function<HyperboloidPoint(double rho, double theta)>;

  /// Rectangular grid x(lower + i * spacing); the outer layer is Dirichlet.
  static ParametricPatch sample(const ModelSpace& space, std::vector<int> shape,
                                std::vector<double> lower, std::vector<double> spacing,
                                const ParamMap& map);
  /// Polar disc with rho = i * radial_step (i = 0..n_r) and theta = 2 pi j / n_theta;
  /// the outer ring is Dirichlet.
  static ParametricPatch polar(const ModelSpace& space, int n_r, int n_theta, double radial_step,
                               const PolarMap& map);

  const ModelSpace& space() const { return space_; }
  int dim() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  const std::vector<double>& spacing() const { return spacing_; }
  GridTopology topology() const { return topology_; }
  bool periodic(int axis) const { return periodic_[axis]; }
  std::size_t size() const { return points_.size(); }

  std::size_t flat(const GridIndex& idx) const;
  std::size_t flat(int i, int j) const;
  GridIndex index(std::size_t v) const;
  /// Neighbour at a grid offset, wrapping periodic axes and reflecting through
  /// the polar centre; nullopt when the offset leaves the grid.
  std::optional<std::size_t> neighbor(std::size_t v, std::span<const int> offset) const;

  const HyperboloidPoint& point(std::size_t v) const { return points_[v]; }
  const std::vector<HyperboloidPoint>& points() const { return points_; }
  void set_point(std::size_t v, HyperboloidPoint p);

  const std::vector<std::uint8_t>& boundary_mask() const { return mask_; }
  bool is_boundary(std::size_t v) const { return mask_[v] != 0; }
  bool is_center(std::size_t v) const;
  /// Free vertex whose full central-difference stencil exists.
  bool has_stencil(std::size_t v) const;
  /// Vertices that report curvature; the polar centre appears once.
  std::vector<std::size_t> interior_vertices() const;

 private:
  ModelSpace space_;
  std::vector<int> shape_;
  std::vector<double> spacing_;
  std::vector<HyperboloidPoint> points_;
  std::vector<std::uint8_t> mask_;
  GridTopology topology_;
  std::vector<bool> periodic_;
  std::vector<std::size_t> strides_;
};

using JetMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                                kMaxAmbient, kMaxPatchDim*(kMaxPatchDim + 1) / 2>;

/// Ambient first and second parameter derivatives at a vertex. At the polar
/// centre the parameters are the Cartesian (rho cos, rho sin) chart and the
/// derivatives come from an exact quadratic fit over the first ring.
struct LocalJet {
  HyperboloidPoint point;
  int k = 0;
  JetMatrix d1;  // k columns
  JetMatrix d2;  // k(k+1)/2 columns, packed (a <= b)

  static int pack(int a, int b, int k);
  auto second(int a, int b) const { return d2.col(pack(a, b, k)); }
};

LocalJet local_jet(const ParametricPatch& patch, std::size_t v);

struct FundamentalForms {
  HyperboloidPoint point;
  SmallMatrix first;                 // k x k, g(d_i, d_j)
  std::vector<SmallMatrix> second;   // per normal: <nabla^2 f(d_i, d_j), nu>
  std::vector<Vec> tangent_frame;    // parameter partials projected to T_x X
  std::vector<Vec> normal_frame;     // orthonormal basis of the normal space
};

/// Fundamental forms from a jet. Codimension one uses the oriented normal
/// (generalized cross product); higher codimension uses Gram-Schmidt over the
/// coordinate axes with largest-residual pivoting.
FundamentalForms fundamental_forms(const ModelSpace& space, const LocalJet& jet);
FundamentalForms fundamental_forms(const ParametricPatch& patch, std::size_t v);

struct ShapeSpectrum {
  std::vector<double> eigenvalues;  // ascending

  double sum() const;
  double spectral_radius() const;
};

/// Eigenvalues of first^{-1} second(nu) for the chosen frame normal.
ShapeSpectrum shape_spectrum(const FundamentalForms& forms, int normal_index);

/// max over frame normals of the spectral radius of the shape operator.
double second_form_norm(const FundamentalForms& forms);

struct SecondFormBound {
  double sup = 0.0;
  double delta = 1.0;    // 1 - sup
  double epsilon = 1.0;  // sup = 1 - epsilon
  std::size_t argmax = 0;
};

SecondFormBound sup_second_form(const ParametricPatch& patch);

/// H = sum over frame normals of tr(first^{-1} second(nu)) nu.
TangentVector mean_curvature_vector(const ParametricPatch& patch, std::size_t v);
TangentVector mean_curvature_vector(const FundamentalForms& forms);

/// Gauss equation for the plane spanned by two parameter-space directions.
double induced_sectional_curvature(const ModelSpace& space, const FundamentalForms& forms,
                                   std::span<const double> a, std::span<const double> b);
double induced_sectional_curvature(const ParametricPatch& patch, std::size_t v,
                                   std::span<const double> a, std::span<const double> b);

/// Gaussian curvature from the first fundamental form alone (Brioschi). k = 2,
/// non-centre vertices whose eight neighbours all have full stencils.
double intrinsic_curvature_brioschi(const ParametricPatch& patch, std::size_t v);

struct CurvatureRange {
  double k_min = 0.0;
  double k_max = 0.0;
};

/// Extremes of the induced sectional curvature over the coordinate planes
/// (the only plane when k = 2).
CurvatureRange sampled_sectional_curvatures(const ModelSpace& space, const FundamentalForms& forms);

struct PinchingViolation {
  std::size_t vertex = 0;
  double curvature = 0.0;
  std::string bound;
};

struct PinchingReport {
  bool applicable = false;  // sup |II| < 1
  double sup_second_form = 0.0;
  double epsilon = 0.0;
  double upper_bound = 0.0;  // -eps (2 - eps)
  double lower_bound = 0.0;  // -kappa - 2 (1 - eps)^2
  bool surface_case = false;
  double surface_upper_bound = -1.0;
  double surface_lower_bound = 0.0;  // -kappa - (1 - eps)^2
  double k_min = 0.0;
  double k_max = 0.0;
  std::size_t vertices_checked = 0;
  std::vector<PinchingViolation> violations;
  bool passed = false;
};

inline constexpr double kPinchingTol = 1e-3;

PinchingReport pinching_check(const ParametricPatch& patch);

struct QuasiIsometryReport {
  double delta = 0.0;
  std::size_t pairs = 0;
  double min_ratio = 0.0;  // d_Y / d_X
  double max_ratio = 0.0;
  double upper_limit = 0.0;  // 1.05 / delta
  bool lower_ok = false;
  bool upper_ok = false;
};

inline constexpr double kQuasiIsometrySlack = 0.05;

/// Intrinsic distances by Dijkstra on the grid graph with the 16-neighbourhood
/// (axis, diagonal and knight moves); edge weights are ambient geodesic lengths.
QuasiIsometryReport quasi_isometry_check(const ParametricPatch& patch, std::size_t sample_pairs,
                                         std::uint64_t seed = 1);

/// Graph distances from one vertex to all others (same graph as above).
std::vector<double> grid_graph_distances(const ParametricPatch& patch, std::size_t source);

/// CSV with columns i, j, lambda_1..lambda_k, K_min, K_max, |H| for every
/// interior vertex (k = 2 grids name the index columns i, j).
void write_spectra_csv(const ParametricPatch& patch, std::ostream& out);

}  // namespace afp
