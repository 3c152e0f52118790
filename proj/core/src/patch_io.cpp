#include "afp/patch_io.hpp"

#include <stdexcept>

namespace afp {

namespace {
constexpr const char* kFormat = "afp-patch";
constexpr int kVersion = 1;
}  // namespace

Json point_to_json(const HyperboloidPoint& p) {
  Json a = Json::array();
  for (int i = 0; i < p.x.size(); ++i) a.push_back(p.x[i]);
  return a;
}

HyperboloidPoint point_from_json(const ModelSpace& space, const Json& j) {
  if (!j.is_array() || static_cast<int>(j.size()) != space.ambient_size()) {
    throw std::invalid_argument("point must be an array of n+1 numbers");
  }
  Vec x(space.ambient_size());
  for (int i = 0; i < space.ambient_size(); ++i) x[i] = j.at(i).get<double>();
  return space.project(x);
}

Json patch_to_json(const ParametricPatch& patch) {
  Json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["space"] = {{"dimension", patch.space().dimension()}, {"kappa", patch.space().kappa()}};
  j["dim_k"] = patch.dim();
  j["topology"] = patch.topology() == GridTopology::Polar ? "polar" : "rectangular";
  j["grid_shape"] = patch.shape();
  j["spacing"] = patch.spacing();
  Json periodic = Json::array();
  for (int a = 0; a < patch.dim(); ++a) periodic.push_back(patch.periodic(a));
  j["periodic"] = periodic;
  Json mask = Json::array();
  for (auto m : patch.boundary_mask()) mask.push_back(static_cast<int>(m));
  j["boundary_mask"] = mask;
  Json pts = Json::array();
  for (const auto& p : patch.points()) pts.push_back(point_to_json(p));
  j["points"] = pts;
  return j;
}

ParametricPatch patch_from_json(const Json& j) {
  if (j.value("format", std::string()) != kFormat) {
    throw std::invalid_argument("not an afp-patch document");
  }
  if (j.at("version").get<int>() != kVersion) {
    throw std::invalid_argument("unsupported afp-patch version");
  }
  const ModelSpace space(j.at("space").at("dimension").get<int>(),
                         j.at("space").at("kappa").get<double>());
  auto shape = j.at("grid_shape").get<std::vector<int>>();
  auto spacing = j.at("spacing").get<std::vector<double>>();
  if (static_cast<int>(shape.size()) != j.at("dim_k").get<int>()) {
    throw std::invalid_argument("grid_shape does not match dim_k");
  }
  const std::string topo = j.at("topology").get<std::string>();
  GridTopology topology;
  if (topo == "polar") {
    topology = GridTopology::Polar;
  } else if (topo == "rectangular") {
    topology = GridTopology::Rectangular;
  } else {
    throw std::invalid_argument("unknown topology '" + topo + "'");
  }
  auto periodic = j.at("periodic").get<std::vector<bool>>();
  std::vector<std::uint8_t> mask;
  for (const auto& m : j.at("boundary_mask")) mask.push_back(m.get<int>() != 0 ? 1 : 0);
  std::vector<HyperboloidPoint> pts;
  for (const auto& p : j.at("points")) pts.push_back(point_from_json(space, p));
  return ParametricPatch(space, std::move(shape), std::move(spacing), std::move(pts),
                         std::move(mask), topology, std::move(periodic));
}

void write_patch(const std::filesystem::path& path, const ParametricPatch& patch) {
  write_json_file(path, patch_to_json(patch));
}

ParametricPatch read_patch(const std::filesystem::path& path) {
  return patch_from_json(read_json_file(path));
}

}  // namespace afp
