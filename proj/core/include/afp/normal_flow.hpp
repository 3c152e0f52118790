#pragma once

// Geometry of the normal exponential map of a submanifold: Jacobi transfer
// functions along normal geodesics, shape operators of equidistant
// hypersurfaces (Riccati flow), convexity radii, and the lower bound of the
// pulled-back metric against the warped comparison metric
//   h = ds^2 + cosh^2(t) g_Y + sinh^2(t) g_sphere.
//
// Sign convention: an eigenvalue lambda of the shape operator along a normal v
// is the initial logarithmic growth rate of the Jacobi field, J'(0) = lambda J(0),
// so equidistants moving along v have lambda^t = (lambda + tanh t)/(1 + lambda tanh t)
// in curvature -1. With the immersion module's II(.,.) . nu convention this is
// the negated eigenvalue for v = nu.

#include "afp/immersion.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace afp {

inline constexpr double kIntegrationStep = 1e-3;
inline constexpr double kMaxTransferTime = 20.0;

/// f(t) = |B_t w|^2 along a normal geodesic, with finite-difference diagnostics.
/// Diagnostics are centred differences on the sample grid and are NaN on the
/// two samples at each end.
struct TransferTrace {
  double kappa = 1.0;
  double alpha = 1.0;
  double beta = 0.0;
  double step = kIntegrationStep;
  std::vector<double> ts;
  std::vector<double> f;
  std::vector<double> sqrtf_second;  // (sqrt f)''
  std::vector<double> logf_combo;    // (ln f)'' + ((ln f)')^2 / 2
  std::size_t fd_begin = 0;
  std::size_t fd_end = 0;
};

/// Integrates j'' = kappa j, j(0) = alpha, j'(0) = beta with classical RK4; f = j^2.
/// Requires alpha > 0, |beta| < alpha, 0 < T <= 20.
TransferTrace jacobi_transfer(double alpha, double beta, double T, double kappa,
                              double step = kIntegrationStep);
/// Initial slope from a principal curvature: beta = lambda_i * alpha.
TransferTrace jacobi_transfer(const ShapeSpectrum& spectrum, int eigen_index, double alpha,
                              double T, double kappa);

struct TransferCheck {
  double kappa = 1.0;
  double max_rel_residual = 0.0;  // max |(sqrt f)'' - kappa sqrt f| / sqrt f
  double max_rel_unit_residual = 0.0;  // max |(sqrt f)'' - sqrt f| / sqrt f
  double min_sqrt_excess = 0.0;   // min (sqrt f)'' - sqrt f for t >= strict_from
  double min_logf_combo = 0.0;
  bool unit_identity_ok = false;  // kappa == 1: relative residual < 1e-5
  bool strict_branch_ok = false;  // kappa > 1: excess > 0
  bool log_bound_ok = false;      // combo >= 2 - 1e-5
  bool passed = false;
};

inline constexpr double kTransferRelTol = 1e-5;
inline constexpr double kLogComboTol = 1e-5;

TransferCheck transfer_equation_check(const TransferTrace& trace, double strict_from = 0.1);

/// CSV columns: t, f, sqrtf_residual ((sqrt f)'' - kappa sqrt f), logf_combo.
void write_trace_csv(const TransferTrace& trace, std::ostream& out);

/// Riccati flow lambda' = kappa - lambda^2 by RK4 with step <= 1e-3.
double riccati_flow(double lambda, double t, double kappa = 1.0, double step = kIntegrationStep);
/// Closed form of the same flow.
double mobius_flow(double lambda, double t, double kappa = 1.0);

struct EquidistantSpectrum {
  double t = 0.0;
  double kappa = 1.0;
  ShapeSpectrum base;
  std::vector<double> tangential;         // Riccati-integrated, base order
  std::vector<double> tangential_closed;  // closed form, base order
  std::vector<double> normal;             // normal-sphere entries sqrt(k) coth(sqrt(k) t)
  bool normal_block = false;              // false when t == 0 (coth singular)
  std::vector<double> lambda_t;           // all entries, ascending
};

/// Shape operator spectrum of the distance-t hypersurface N_t Y in H^n at exp(t v),
/// from the principal curvatures of Y along v. Requires |lambda_i| < 1, t >= 0.
EquidistantSpectrum equidistant_spectrum(const ShapeSpectrum& base, double t, int ambient_dimension,
                                         double kappa = 1.0);

struct SliceReport {
  double max_value = 0.0;        // max tangential lambda^t
  double min_closed_margin = 0.0;  // min (lambda^t - closed form)
  bool passed = false;
};

SliceReport bounded_slice_check(const ShapeSpectrum& spectrum, double t);

struct KConvexityReport {
  int k = 0;
  double t = 0.0;
  std::vector<double> partial_sums;  // sum_{j<=i} lambda_j^t
  std::vector<double> lower_bounds;  // closed-form partial-sum bounds
  double min_slack = 0.0;
  double k_smallest_sum = 0.0;
  bool minimal_base = false;       // |sum lambda| <= 1e-6
  bool above_convexity_radius = false;
  bool passed = false;
};

KConvexityReport k_convexity_check(const ShapeSpectrum& spectrum, double t, int ambient_dimension);

struct ConvexityRadius {
  double r_paper = 0.0;     // atanh(1 - sup), capped at the distance cap
  double r_spectral = 0.0;  // atanh(sup)
  bool paper_saturated = false;
  bool disagree = false;

  double safe() const { return r_paper > r_spectral ? r_paper : r_spectral; }
};

ConvexityRadius convexity_radius(double sup_second_form);

struct ExpMetricReport {
  double sup_second_form = 0.0;
  double delta = 0.0;
  std::size_t samples = 0;
  double min_ratio = 0.0;  // |D exp(w)|^2 / (delta^2 h(w,w))
  double radial_min = 0.0;
  double tangential_min = 0.0;
  double sphere_min = 0.0;  // NaN in codimension one
  double mixed_min = 0.0;
  double worst_t = 0.0;
  std::size_t worst_vertex = 0;
  bool passed = false;
};

inline constexpr double kExpMetricSlack = 2e-2;

/// Compares |D exp(w)|^2, by finite differences of the normal exponential map
/// (grid steps along Y, small steps along the fibre), with delta^2 h(w,w).
ExpMetricReport exp_metric_lower_bound(const ParametricPatch& patch, const std::vector<double>& t_samples,
                                       int direction_samples, std::uint64_t seed = 1,
                                       int vertex_samples = 12);

}  // namespace afp
