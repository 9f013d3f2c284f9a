#include "soliton_forge/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "soliton_forge/error.hpp"

namespace soliton_forge {

double Grid::x(std::size_t j) const {
  // Interpolate from both ends so the last point is exactly x_max.
  const double f = static_cast<double>(j) / static_cast<double>(n_x - 1);
  return x_min + f * (x_max - x_min);
}

std::vector<double> Grid::points() const {
  std::vector<double> p(n_x);
  for (std::size_t j = 0; j < n_x; ++j) p[j] = x(j);
  return p;
}

void Grid::check() const {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max))
    throw Error(ErrorCode::invalid_argument, "grid needs finite x_min < x_max");
  if (n_x < 2) throw Error(ErrorCode::invalid_argument, "grid needs n_x >= 2");
}

const char* to_string(Scheme s) { return s == Scheme::fd ? "fd" : "trace"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "fd") return Scheme::fd;
  if (s == "trace") return Scheme::trace;
  throw Error(ErrorCode::invalid_argument, "scheme must be fd or trace, got '" + s + "'");
}

double SolutionField::sup_abs_finite() const {
  double m = 0.0;
  for (double v : q)
    if (std::isfinite(v)) m = std::max(m, std::abs(v));
  return m;
}

double sup_difference(const SolutionField& a, const SolutionField& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::invalid_argument, "fields have different sizes");
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = std::abs(a.q[j] - b.q[j]);
    if (std::isnan(d)) return std::numeric_limits<double>::quiet_NaN();
    m = std::max(m, d);
  }
  return m;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, end);
}

std::string to_csv(const SolutionField& f) {
  std::string out = "x,q\n";
  for (std::size_t j = 0; j < f.size(); ++j) {
    out += format_number(f.x(j));
    out += ',';
    out += format_number(f.q[j]);
    out += '\n';
  }
  return out;
}

void write_csv(const SolutionField& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + path.string());
  out << to_csv(f);
}

}  // namespace soliton_forge
