#pragma once

// Closed-form surfaces of H^n (n >= 3) used as oracles for the curvature
// pipeline: the totally geodesic plane spanned by coordinate axes 1 and 2, its
// equidistant surfaces (normal direction: axis 3), and a horosphere.

#include "afp/immersion.hpp"

#include <string>

namespace afp::surfaces {

/// Fermi chart (u, v) -> cosh v (cosh u, sinh u) + sinh v e2, scaled to curvature -kappa.
HyperboloidPoint geodesic_plane_point(const ModelSpace& space, double u, double v);
/// Point at signed distance t from the plane along the axis-3 normal geodesic.
HyperboloidPoint equidistant_point(const ModelSpace& space, double u, double v, double t);
/// Horosphere centred at the ideal point of axis 3; (u, v) is a flat chart.
HyperboloidPoint horosphere_point(const ModelSpace& space, double u, double v);

ParametricPatch geodesic_plane(const ModelSpace& space, int samples, double half_width);
ParametricPatch equidistant(const ModelSpace& space, int samples, double half_width, double t);
ParametricPatch horosphere(const ModelSpace& space, int samples, double half_width);

/// "geodesic-plane", "equidistant:<t>" or "horosphere".
ParametricPatch named_surface(const ModelSpace& space, const std::string& spec, int samples,
                              double half_width);

}  // namespace afp::surfaces
