#include "afp/hull.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace afp {

namespace {

Eigen::Vector3d unit3(const Eigen::Vector3d& v) {
  const double len = v.norm();
  if (!(len > 0.0)) throw GeometryError("ideal curve: zero direction");
  return v / len;
}

double parse_number(const std::string& s, const std::string& spec) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(x)) {
    throw std::invalid_argument("bad number '" + s + "' in curve spec '" + spec + "'");
  }
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<Eigen::Vector3d> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open curve file " + path);
  std::vector<Eigen::Vector3d> pts;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 3) throw std::invalid_argument("curve csv rows need three columns: " + line);
    Eigen::Vector3d p;
    try {
      for (int a = 0; a < 3; ++a) p[a] = parse_number(cells[static_cast<std::size_t>(a)], path);
    } catch (const std::invalid_argument&) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw;
    }
    first = false;
    if (std::abs(p.norm() - 1.0) > 1e-6) throw std::invalid_argument("curve csv rows must be unit vectors");
    pts.push_back(p.normalized());
  }
  if (pts.size() < 3) throw std::invalid_argument("curve csv needs at least three samples");
  return pts;
}

}  // namespace

IdealCurve::IdealCurve(std::function<Eigen::Vector3d(double)> f, std::string name)
    : f_(std::move(f)), name_(std::move(name)) {}

IdealCurve IdealCurve::parse(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.empty()) throw std::invalid_argument("empty curve spec");
  const std::string& kind = parts[0];
  if (kind == "circle" && parts.size() == 1) {
    return IdealCurve([](double t) { return Eigen::Vector3d(std::cos(t), std::sin(t), 0.0); }, spec);
  }
  if (kind == "ellipse" && parts.size() == 3) {
    const double a = parse_number(parts[1], spec), b = parse_number(parts[2], spec);
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("ellipse axes must be positive");
    return IdealCurve(
        [a, b](double t) {
          const double X = a * std::cos(t), Y = b * std::sin(t);
          const double r2 = X * X + Y * Y;
          return unit3(Eigen::Vector3d(2 * X, 2 * Y, r2 - 1.0) / (r2 + 1.0));
        },
        spec);
  }
  if (kind == "wavy" && parts.size() == 3) {
    const double m = parse_number(parts[1], spec), amp = parse_number(parts[2], spec);
    if (m != std::round(m) || m < 1) throw std::invalid_argument("wavy mode must be a positive integer");
    return IdealCurve(
        [m, amp](double t) { return unit3(Eigen::Vector3d(std::cos(t), std::sin(t), amp * std::sin(m * t))); },
        spec);
  }
  if (kind == "csv" && parts.size() >= 2) {
    return from_samples(read_curve_csv(spec.substr(4)), spec);
  }
  if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".csv") {
    return from_samples(read_curve_csv(spec), spec);
  }
  throw std::invalid_argument("unknown boundary curve '" + spec + "'");
}

IdealCurve IdealCurve::from_samples(std::vector<Eigen::Vector3d> samples, std::string name) {
  if (samples.size() < 3) throw std::invalid_argument("curve needs at least three samples");
  return IdealCurve(
      [s = std::move(samples)](double t) {
        const double n = static_cast<double>(s.size());
        double u = t / (2 * std::numbers::pi) * n;
        u -= n * std::floor(u / n);
        const auto i = static_cast<std::size_t>(std::floor(u)) % s.size();
        const double w = u - std::floor(u);
        return unit3((1 - w) * s[i] + w * s[(i + 1) % s.size()]);
      },
      std::move(name));
}

IdealPoint IdealCurve::at(double theta) const {
  const Eigen::Vector3d p = f_(theta);
  IdealPoint q;
  q.klein = Vec(3);
  q.klein << p[0], p[1], p[2];
  return q;
}

IdealBoundarySet IdealCurve::sample(int count) const {
  if (count < 3) throw std::invalid_argument("sample: need at least three samples");
  IdealBoundarySet set;
  for (int i = 0; i < count; ++i) set.samples.push_back(at(2 * std::numbers::pi * i / count));
  return set;
}

double KleinHull::margin(const Eigen::VectorXd& p) const {
  if (p.size() != dimension) throw std::invalid_argument("hull margin: dimension mismatch");
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& f : facets) m = std::max(m, f.normal.dot(p) - f.offset);
  if (degenerate) {
    const Eigen::VectorXd d = p - origin;
    const double perp = (d - basis * (basis.transpose() * d)).norm();
    m = std::max(m, perp);
  }
  return m;
}

namespace {

struct SubFacet {
  Eigen::VectorXd normal;
  double offset;
};

void hull_1d(const std::vector<Eigen::VectorXd>& q, std::vector<SubFacet>& facets, std::set<std::size_t>& verts) {
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i][0] < q[lo][0]) lo = i;
    if (q[i][0] > q[hi][0]) hi = i;
  }
  facets.push_back({Eigen::VectorXd::Constant(1, 1.0), q[hi][0]});
  facets.push_back({Eigen::VectorXd::Constant(1, -1.0), -q[lo][0]});
  verts.insert(lo);
  verts.insert(hi);
}

void hull_2d(const std::vector<Eigen::VectorXd>& q, std::vector<SubFacet>& facets, std::set<std::size_t>& verts) {
  std::vector<std::size_t> order(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (q[a][0] != q[b][0]) return q[a][0] < q[b][0];
    if (q[a][1] != q[b][1]) return q[a][1] < q[b][1];
    return a < b;
  });
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (q[a][0] - q[o][0]) * (q[b][1] - q[o][1]) - (q[a][1] - q[o][1]) * (q[b][0] - q[o][0]);
  };
  std::vector<std::size_t> h(2 * q.size());
  std::size_t k = 0;
  for (std::size_t i : order) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], i) <= kHullEps) --k;
    h[k++] = i;
  }
  const std::size_t lower = k + 1;
  for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
    while (k >= lower && cross(h[k - 2], h[k - 1], *it) <= kHullEps) --k;
    h[k++] = *it;
  }
  h.resize(k - 1);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& a = q[h[i]];
    const auto& b = q[h[(i + 1) % h.size()]];
    Eigen::VectorXd n(2);
    n << b[1] - a[1], a[0] - b[0];
    n.normalize();
    facets.push_back({n, std::max(n.dot(a), n.dot(b))});
    verts.insert(h[i]);
  }
}

struct Face {
  int a, b, c;
  Eigen::Vector3d n;
  double off;
  bool alive;
};

void hull_3d(const std::vector<Eigen::VectorXd>& q, std::vector<SubFacet>& facets, std::set<std::size_t>& verts) {
  const int N = static_cast<int>(q.size());
  // Tiny deterministic perturbation puts the samples in general position for the
  // combinatorial search; facet planes are recomputed from the exact samples.
  std::vector<Eigen::Vector3d> p(static_cast<std::size_t>(N));
  std::vector<Eigen::Vector3d> exact(static_cast<std::size_t>(N));
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> jitter(-1e-9, 1e-9);
  for (int i = 0; i < N; ++i) {
    exact[i] = Eigen::Vector3d(q[i][0], q[i][1], q[i][2]);
    p[i] = exact[i] + Eigen::Vector3d(jitter(rng), jitter(rng), jitter(rng));
  }
  std::vector<int> order(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int d = 0; d < 3; ++d) {
      if (exact[a][d] != exact[b][d]) return exact[a][d] < exact[b][d];
    }
    return a < b;
  });

  const int i0 = order[0];
  int i1 = i0, i2 = i0, i3 = i0;
  double best = -1;
  for (int i : order) {
    const double d = (p[i] - p[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  best = -1;
  const Eigen::Vector3d dir = (p[i1] - p[i0]).normalized();
  for (int i : order) {
    const Eigen::Vector3d r = p[i] - p[i0];
    const double d = (r - r.dot(dir) * dir).norm();
    if (d > best) best = d, i2 = i;
  }
  best = -1;
  const Eigen::Vector3d pn = (p[i1] - p[i0]).cross(p[i2] - p[i0]).normalized();
  for (int i : order) {
    const double d = std::abs(pn.dot(p[i] - p[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (!(best > kHullEps)) throw GeometryError("build_hull: samples are coplanar");

  const Eigen::Vector3d inside = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
  std::vector<Face> faces;
  auto add_face = [&](int a, int b, int c) {
    Eigen::Vector3d n = (p[b] - p[a]).cross(p[c] - p[a]);
    if (n.dot(inside - p[a]) > 0) {
      std::swap(b, c);
      n = -n;
    }
    n.normalize();
    faces.push_back({a, b, c, n, n.dot(p[a]), true});
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  for (int i : order) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    std::set<std::pair<int, int>> edges;
    bool any = false;
    for (auto& f : faces) {
      if (!f.alive || f.n.dot(p[i]) - f.off <= kHullEps) continue;
      any = true;
      f.alive = false;
      edges.insert({f.a, f.b});
      edges.insert({f.b, f.c});
      edges.insert({f.c, f.a});
    }
    if (!any) continue;
    for (const auto& [a, b] : edges) {
      if (edges.count({b, a})) continue;
      Eigen::Vector3d n = (p[b] - p[a]).cross(p[i] - p[a]).normalized();
      faces.push_back({a, b, i, n, n.dot(p[a]), true});
    }
    if (faces.size() > 8 * static_cast<std::size_t>(N) + 64) {
      std::erase_if(faces, [](const Face& f) { return !f.alive; });
    }
  }

  for (const auto& f : faces) {
    if (!f.alive) continue;
    verts.insert(static_cast<std::size_t>(f.a));
    verts.insert(static_cast<std::size_t>(f.b));
    verts.insert(static_cast<std::size_t>(f.c));
    Eigen::Vector3d n = (exact[f.b] - exact[f.a]).cross(exact[f.c] - exact[f.a]);
    if (!(n.norm() > 1e-300)) continue;
    n.normalize();
    if (n.dot(f.n) < 0) n = -n;
    const double off = std::max({n.dot(exact[f.a]), n.dot(exact[f.b]), n.dot(exact[f.c])});
    bool dup = false;
    for (const auto& g : facets) {
      if ((g.normal - n).norm() < 1e-10 && std::abs(g.offset - off) < 1e-10) {
        dup = true;
        break;
      }
    }
    if (!dup) facets.push_back({Eigen::VectorXd(n), off});
  }
}

}  // namespace

KleinHull build_hull(const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) throw std::invalid_argument("build_hull: no samples");
  const int n = static_cast<int>(points[0].size());
  for (const auto& x : points) {
    if (x.size() != n) throw std::invalid_argument("build_hull: mixed dimensions");
    if (!x.allFinite()) throw std::invalid_argument("build_hull: non-finite sample");
  }
  const auto N = points.size();

  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
  for (const auto& x : points) centroid += x;
  centroid /= static_cast<double>(N);
  Eigen::MatrixXd M(static_cast<Eigen::Index>(N), n);
  for (std::size_t i = 0; i < N; ++i) M.row(static_cast<Eigen::Index>(i)) = (points[i] - centroid).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv[0] > 1e-12) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv[i] > 1e-9 * sv[0]) ++rank;
    }
  }

  KleinHull h;
  h.dimension = n;
  h.rank = rank;
  h.degenerate = rank < n;
  if (h.degenerate) {
    h.origin = centroid;
    h.basis = svd.matrixV().leftCols(rank);
  } else {
    h.origin = Eigen::VectorXd::Zero(n);
    h.basis = Eigen::MatrixXd::Identity(n, n);
  }
  if (rank > 3) throw std::invalid_argument("build_hull: hulls of affine rank above 3 are not supported");

  std::vector<Eigen::VectorXd> q(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Eigen::VectorXd d = points[i] - h.origin;
    q[i] = h.basis.transpose() * d;
    if (h.degenerate) h.thickness = std::max(h.thickness, (d - h.basis * q[i]).norm());
  }

  std::vector<SubFacet> sub;
  std::set<std::size_t> verts;
  if (rank == 0) {
    verts.insert(0);
  } else if (rank == 1) {
    hull_1d(q, sub, verts);
  } else if (rank == 2) {
    hull_2d(q, sub, verts);
  } else {
    hull_3d(q, sub, verts);
  }
  for (const auto& f : sub) {
    HullFacet g;
    g.normal = h.basis * f.normal;
    g.offset = f.offset + g.normal.dot(h.origin);
    h.facets.push_back(std::move(g));
  }
  h.vertices.assign(verts.begin(), verts.end());
  for (const auto& x : points) {
    for (const auto& f : h.facets) h.max_violation = std::max(h.max_violation, f.normal.dot(x) - f.offset);
  }
  return h;
}

KleinHull build_hull(const IdealBoundarySet& set) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(set.samples.size());
  for (const auto& s : set.samples) {
    const double len = s.klein.norm();
    if (std::abs(len - 1.0) > 1e-9) throw std::invalid_argument("build_hull: ideal samples must be unit vectors");
    pts.emplace_back(Eigen::VectorXd(s.klein / len));
  }
  return build_hull(pts);
}

Containment contains_klein(const KleinHull& hull, const Eigen::VectorXd& p, double tol) {
  Containment c;
  c.margin = hull.margin(p);
  c.contained = c.margin <= tol;
  return c;
}

Containment contains(const KleinHull& hull, const ModelSpace& space, const HyperboloidPoint& x, double tol) {
  return contains_klein(hull, Eigen::VectorXd(space.to_klein(x)), tol);
}

BarrierReport barrier_check(const KleinHull& hull, const ParametricPatch& patch, double tol) {
  BarrierReport r;
  r.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < patch.size(); ++v) {
    if (patch.is_boundary(v)) continue;
    const auto c = contains(hull, patch.space(), patch.point(v), tol);
    ++r.vertices_checked;
    if (!c.contained) ++r.violations;
    if (c.margin > r.max_margin) {
      r.max_margin = c.margin;
      r.worst_vertex = v;
    }
  }
  r.passed = r.violations == 0;
  return r;
}

namespace {

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from(const Json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw std::invalid_argument("hull json: bad vector");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace

Json hull_to_json(const KleinHull& hull) {
  Json j;
  j["format"] = "afp-hull";
  j["version"] = 1;
  j["dimension"] = hull.dimension;
  j["rank"] = hull.rank;
  j["degenerate"] = hull.degenerate;
  j["thickness"] = hull.thickness;
  j["max_violation"] = hull.max_violation;
  j["origin"] = vec_json(hull.origin);
  Json basis = Json::array();
  for (int c = 0; c < hull.rank; ++c) basis.push_back(vec_json(hull.basis.col(c)));
  j["basis"] = basis;
  Json facets = Json::array();
  for (const auto& f : hull.facets) {
    Json g;
    g["normal"] = vec_json(f.normal);
    g["offset"] = f.offset;
    facets.push_back(g);
  }
  j["facets"] = facets;
  j["vertices"] = hull.vertices;
  return j;
}

KleinHull hull_from_json(const Json& j) {
  if (j.value("format", "") != "afp-hull") throw std::invalid_argument("not a hull document");
  KleinHull h;
  h.dimension = j.at("dimension").get<int>();
  h.rank = j.at("rank").get<int>();
  h.degenerate = j.at("degenerate").get<bool>();
  h.thickness = j.at("thickness").get<double>();
  h.max_violation = j.at("max_violation").get<double>();
  h.origin = vec_from(j.at("origin"), h.dimension);
  h.basis.resize(h.dimension, h.rank);
  const auto& basis = j.at("basis");
  if (!basis.is_array() || static_cast<int>(basis.size()) != h.rank) throw std::invalid_argument("hull json: bad basis");
  for (int c = 0; c < h.rank; ++c) h.basis.col(c) = vec_from(basis.at(static_cast<std::size_t>(c)), h.dimension);
  for (const auto& f : j.at("facets")) {
    h.facets.push_back({vec_from(f.at("normal"), h.dimension), f.at("offset").get<double>()});
  }
  h.vertices = j.at("vertices").get<std::vector<std::size_t>>();
  return h;
}

}  // namespace afp
