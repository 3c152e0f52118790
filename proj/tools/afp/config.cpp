#include "cli.hpp"

#include "afp/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace afp::cli {
namespace {

using K = ParamKind;

Json reals(std::initializer_list<double> v) { return Json(std::vector<double>(v)); }

std::vector<ParamSpec> plateau_params() {
  return {
      {"boundary", K::Text, "circle", "ideal curve: circle, ellipse:a:b, wavy:m:amp, csv:path"},
      {"R", K::Real, 4.0, "truncation radius"},
      {"n_r", K::Integer, 32, "radial grid intervals"},
      {"n_theta", K::Integer, 64, "angular samples"},
      {"tol_h", K::Real, 1e-4, "stop when sup |H| falls below this"},
      {"max_iterations", K::Integer, 100000, "flow iteration limit"},
      {"preconditioner", K::Text, "operator", "operator or jacobi"},
      {"hull_samples", K::Integer, 256, "ideal boundary samples for the Klein hull"},
      {"barrier_tol", K::Real, 2e-3, "allowed Klein-hull violation"},
  };
}

const std::vector<CommandSpec> kCommands = [] {
  std::vector<CommandSpec> c;
  c.push_back({"jacobi-check",
               "integrate the normal Jacobi equation and check the square-root identity",
               {{"kappa", K::Real, 1.0, "curvature bound (>= 1)"},
                {"alpha", K::Real, 1.0, "initial value"},
                {"beta", K::Real, 0.0, "initial slope, |beta| < alpha"},
                {"T", K::Real, 3.0, "final time"},
                {"step", K::Real, 1e-3, "RK4 step"},
                {"strict_from", K::Real, 0.1, "start of the strict-inequality window"}}});
  c.push_back({"equidistant-spectrum",
               "principal curvatures of an equidistant hypersurface",
               {{"lambdas", K::RealList, reals({-0.5, 0.5}), "base principal curvatures"},
                {"t", K::Real, 1.0, "distance"},
                {"n", K::Integer, 3, "ambient dimension"},
                {"kappa", K::Real, 1.0, "curvature"},
                {"sweep_lambdas", K::Integer, 0, "sweep grid size in lambda (0: no sweep)"},
                {"sweep_times", K::Integer, 0, "sweep grid size in t"},
                {"lambda_max", K::Real, 0.95, "sweep range |lambda| <= lambda_max"},
                {"t_max", K::Real, 10.0, "sweep range t <= t_max"}}});
  c.push_back({"phi-table",
               "table of the minimal trace function Phi on [0, d_max]",
               {{"k", K::Integer, 2, "submanifold dimension (2..4)"},
                {"sup_ii", K::Real, 0.5, "second fundamental form bound"},
                {"d_max", K::Real, 0.0, "table range; 0 uses the larger convexity radius"},
                {"steps", K::Integer, 60, "table intervals"},
                {"c_samples", K::Integer, 200, "samples for the subharmonicity constant"}}});
  c.push_back({"hull-check",
               "Klein-model convex hull of an ideal curve, optionally as a barrier for a patch",
               {{"boundary", K::Text, "circle", "ideal curve"},
                {"hull_samples", K::Integer, 256, "boundary samples"},
                {"patch", K::Text, "", "patch file to test against the hull"},
                {"barrier_tol", K::Real, 2e-3, "allowed violation"}}});
  auto solve = plateau_params();
  solve.push_back({"init", K::Text, "cone", "cone, graph or perturbed:seed:amp"});
  solve.push_back({"plane_tol", K::Real, 1e-3, "circle only: allowed distance to the geodesic plane"});
  c.push_back({"plateau-solve", "solve a truncated asymptotic Plateau problem", solve});
  auto uniq = plateau_params();
  uniq.front().fallback = "wavy:3:0.1";
  uniq.push_back({"starts", K::Integer, 3, "number of initial surfaces"});
  uniq.push_back({"amplitude", K::Real, 0.2, "perturbed-start amplitude"});
  uniq.push_back({"hausdorff_tol", K::Real, 5e-3, "allowed pairwise Hausdorff distance"});
  uniq.push_back({"subharmonic_fraction", K::Real, 0.99, "required fraction of vertices with Lap u >= C u - tol"});
  c.push_back({"uniqueness", "multi-start Plateau solve and comparison of the limits", uniq});
  c.push_back({"hessian-check",
               "Hessian of the distance function against closed forms",
               {{"kappa", K::Real, 1.0, "curvature"},
                {"n", K::Integer, 3, "dimension"},
                {"f", K::RealList, reals({0.5, 1.0, 2.0}), "distances"},
                {"a", K::Real, 0.0, "lower comparison curvature root (0: sqrt kappa)"},
                {"b", K::Real, 0.0, "upper comparison curvature root (0: sqrt kappa)"},
                {"tol", K::Real, 1e-3, "allowed deviation from the closed form"}}});
  auto pinch = plateau_params();
  pinch.insert(pinch.begin(), {"patch", K::Text, "", "patch file; empty solves the Plateau problem"});
  pinch.push_back({"init", K::Text, "cone", "initial surface when solving"});
  pinch.push_back({"gauss_tol", K::Real, 5e-3, "allowed |K_intrinsic - (-kappa - lambda^2)|"});
  c.push_back({"pinching-check", "Gauss-equation curvature window on a minimal surface", pinch});
  return c;
}();

std::string kind_name(ParamKind k) {
  switch (k) {
    case K::Real:
      return "a number";
    case K::Integer:
      return "an integer";
    case K::Text:
      return "a string";
    case K::Boolean:
      return "a boolean";
    case K::RealList:
      return "a list of numbers";
  }
  return "?";
}

Json checked(const ParamSpec& spec, const Json& v) {
  auto bad = [&] { return ConfigError("key '" + spec.key + "' must be " + kind_name(spec.kind)); };
  switch (spec.kind) {
    case K::Real:
      if (!v.is_number() || !std::isfinite(v.get<double>())) throw bad();
      return v.get<double>();
    case K::Integer:
      if (!v.is_number_integer()) throw bad();
      return v.get<long long>();
    case K::Text:
      if (!v.is_string()) throw bad();
      return v;
    case K::Boolean:
      if (!v.is_boolean()) throw bad();
      return v;
    case K::RealList: {
      if (!v.is_array()) throw bad();
      Json out = Json::array();
      for (const auto& e : v) {
        if (!e.is_number() || !std::isfinite(e.get<double>())) throw bad();
        out.push_back(e.get<double>());
      }
      return out;
    }
  }
  throw bad();
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

std::uint64_t seed_from(const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError("key 'seed' must be a non-negative integer");
}

int threads_from(const Json& v) {
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1024) {
    throw ConfigError("key 'threads' must be an integer in [1, 1024]");
  }
  return static_cast<int>(v.get<long long>());
}

}  // namespace

const std::vector<CommandSpec>& commands() { return kCommands; }

const CommandSpec& command_spec(const std::string& name) {
  for (const auto& c : kCommands) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

Json parse_value(const ParamSpec& spec, const std::string& raw) {
  auto bad = [&] { return ConfigError("flag --" + spec.key + ": '" + raw + "' is not " + kind_name(spec.kind)); };
  switch (spec.kind) {
    case K::Real: {
      double v = 0;
      if (!parse_number(raw, v) || !std::isfinite(v)) throw bad();
      return v;
    }
    case K::Integer: {
      long long v = 0;
      if (!parse_number(raw, v)) throw bad();
      return v;
    }
    case K::Text:
      return raw;
    case K::Boolean:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw bad();
    case K::RealList: {
      if (!raw.empty() && raw.front() == '[') {
        try {
          return checked(spec, Json::parse(raw));
        } catch (const Json::exception&) {
          throw bad();
        }
      }
      Json out = Json::array();
      std::size_t start = 0;
      while (start <= raw.size()) {
        const std::size_t comma = std::min(raw.find(',', start), raw.size());
        double v = 0;
        if (!parse_number(raw.substr(start, comma - start), v) || !std::isfinite(v)) throw bad();
        out.push_back(v);
        start = comma + 1;
      }
      return out;
    }
  }
  throw bad();
}

Json Config::to_json() const {
  Json j;
  j["command"] = command;
  j["output_dir"] = output_dir.generic_string();
  j["seed"] = seed;
  j["threads"] = threads;
  j["params"] = params;
  return j;
}

Config resolve_config(const std::string& command, const Json& document,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  Json doc = document.is_null() ? Json::object() : document;
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (doc.contains("format")) {
    if (doc["format"] != "afp-manifest" || !doc.contains("config")) {
      throw ConfigError("unrecognised document format");
    }
    doc = doc["config"];
  }
  static const std::set<std::string> top = {"command", "output_dir", "seed", "threads", "params"};
  for (const auto& [k, v] : doc.items()) {
    if (!top.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }

  Config cfg;
  cfg.command = command;
  if (doc.contains("command")) {
    if (!doc["command"].is_string()) throw ConfigError("key 'command' must be a string");
    const std::string c = doc["command"];
    if (cfg.command.empty()) {
      cfg.command = c;
    } else if (c != cfg.command) {
      throw ConfigError("config is for '" + c + "' but the command is '" + cfg.command + "'");
    }
  }
  if (cfg.command.empty()) throw ConfigError("no command given");
  const CommandSpec& spec = command_spec(cfg.command);

  cfg.threads = default_thread_count();
  for (const auto& p : spec.params) cfg.params[p.key] = p.fallback;

  auto find = [&](const std::string& key) -> const ParamSpec* {
    for (const auto& p : spec.params) {
      if (p.key == key) return &p;
    }
    return nullptr;
  };
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ConfigError("key 'output_dir' must be a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("seed")) cfg.seed = seed_from(doc["seed"]);
  if (doc.contains("threads")) cfg.threads = threads_from(doc["threads"]);
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw ConfigError("key 'params' must be an object");
    for (const auto& [k, v] : doc["params"].items()) {
      const ParamSpec* p = find(k);
      if (!p) throw ConfigError("unknown parameter '" + k + "' for " + cfg.command);
      cfg.params[k] = checked(*p, v);
    }
  }

  for (const auto& [key, raw] : overrides) {
    if (key == "output_dir") {
      cfg.output_dir = raw;
    } else if (key == "seed") {
      std::uint64_t s = 0;
      if (!parse_number(raw, s)) throw ConfigError("flag --seed: '" + raw + "' is not a non-negative integer");
      cfg.seed = s;
    } else if (key == "threads") {
      long long t = 0;
      if (!parse_number(raw, t)) throw ConfigError("flag --threads: '" + raw + "' is not an integer");
      cfg.threads = threads_from(t);
    } else {
      const ParamSpec* p = find(key);
      if (!p) throw ConfigError("unknown parameter '" + key + "' for " + cfg.command);
      cfg.params[key] = parse_value(*p, raw);
    }
  }
  return cfg;
}

void Outcome::check(std::string id, std::string statement, bool passed, double value, double threshold,
                    double margin, bool asserted) {
  checks.push_back({std::move(id), std::move(statement), asserted, passed, value, threshold, margin});
}

}  // namespace afp::cli
