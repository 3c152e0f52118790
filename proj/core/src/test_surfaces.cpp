#include "afp/test_surfaces.hpp"

#include <cmath>
#include <stdexcept>

namespace afp::surfaces {

namespace {

void require_axis3(const ModelSpace& space) {
  if (space.dimension() < 3) throw std::invalid_argument("closed-form surfaces need n >= 3");
}

ParametricPatch square_patch(const ModelSpace& space, int samples, double half_width,
                             const ParametricPatch::ParamMap& map) {
  const double h = 2.0 * half_width / (samples - 1);
  return ParametricPatch::sample(space, {samples, samples}, {-half_width, -half_width}, {h, h}, map);
}

}  // namespace

HyperboloidPoint geodesic_plane_point(const ModelSpace& space, double u, double v) {
  require_axis3(space);
  const double s = space.sqrt_kappa();
  Vec x = Vec::Zero(space.ambient_size());
  x[0] = std::cosh(s * u) * std::cosh(s * v);
  x[1] = std::sinh(s * u) * std::cosh(s * v);
  x[2] = std::sinh(s * v);
  return space.project(x / s);
}

HyperboloidPoint equidistant_point(const ModelSpace& space, double u, double v, double t) {
  const double s = space.sqrt_kappa();
  Vec x = std::cosh(s * t) * geodesic_plane_point(space, u, v).x;
  x[3] += std::sinh(s * t) / s;
  return space.project(x);
}

HyperboloidPoint horosphere_point(const ModelSpace& space, double u, double v) {
  require_axis3(space);
  const double s = space.sqrt_kappa();
  const double a = s * u, b = s * v, q = 0.5 * (a * a + b * b);
  Vec x = Vec::Zero(space.ambient_size());
  x[0] = 1.0 + q;
  x[1] = a;
  x[2] = b;
  x[3] = q;
  return space.project(x / s);
}

ParametricPatch geodesic_plane(const ModelSpace& space, int samples, double half_width) {
  return square_patch(space, samples, half_width, [&](std::span<const double> p) {
    return geodesic_plane_point(space, p[0], p[1]);
  });
}

ParametricPatch equidistant(const ModelSpace& space, int samples, double half_width, double t) {
  return square_patch(space, samples, half_width, [&](std::span<const double> p) {
    return equidistant_point(space, p[0], p[1], t);
  });
}

ParametricPatch horosphere(const ModelSpace& space, int samples, double half_width) {
  return square_patch(space, samples, half_width, [&](std::span<const double> p) {
    return horosphere_point(space, p[0], p[1]);
  });
}

ParametricPatch named_surface(const ModelSpace& space, const std::string& spec, int samples,
                              double half_width) {
  if (spec == "geodesic-plane") return geodesic_plane(space, samples, half_width);
  if (spec == "horosphere") return horosphere(space, samples, half_width);
  const std::string prefix = "equidistant:";
  if (spec.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    const std::string tail = spec.substr(prefix.size());
    const double t = std::stod(tail, &used);
    if (used != tail.size()) throw std::invalid_argument("bad equidistant distance: " + tail);
    return equidistant(space, samples, half_width, t);
  }
  throw std::invalid_argument("unknown surface '" + spec +
                              "' (expected geodesic-plane, equidistant:<t> or horosphere)");
}

}  // namespace afp::surfaces
