#include "afp/json_format.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace afp {

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace {

void emit(const Json& j, std::ostringstream& out, int indent) {
  const std::string pad(indent + 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << Json(it.key()).dump() << ": ";
        emit(it.value(), out, indent + 2);
      }
      out << "\n" << std::string(indent, ' ') << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      bool scalars = true;
      for (const auto& e : j) scalars &= !e.is_structured();
      if (scalars) {
        out << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ", ";
          emit(j[i], out, indent);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        emit(j[i], out, indent + 2);
      }
      out << "\n" << std::string(indent, ' ') << "]";
      return;
    }
    case Json::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j) {
  std::ostringstream out;
  emit(j, out, 0);
  out << "\n";
  return out.str();
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << dump_json(j);
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  return Json::parse(f);
}

}  // namespace afp
