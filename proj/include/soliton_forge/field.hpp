#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace soliton_forge {

/// Uniform grid x_j = x_min + j * dx, j = 0..n_x-1.
struct Grid {
  double x_min = -5.0;
  double x_max = 5.0;
  std::size_t n_x = 201;

  double dx() const { return (x_max - x_min) / static_cast<double>(n_x - 1); }
  double x(std::size_t j) const;
  std::vector<double> points() const;
  /// Throws invalid_argument unless x_min < x_max, n_x >= 2, finite.
  void check() const;
};

enum class Scheme { fd, trace };

const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct FieldMetadata {
  std::string measure_name;
  std::string method;
  int n = 0;
  Scheme scheme = Scheme::trace;
  bool nonnegative = true;
  /// Highest working precision used anywhere on the grid.
  std::string precision = "binary64";
  bool singular = false;
  std::vector<double> singular_x;
  std::vector<std::string> warnings;
};

/// q(x, t) sampled on a grid. Singular samples are NaN and listed in
/// metadata.singular_x; every other sample is finite.
struct SolutionField {
  Grid grid;
  double t = 0.0;
  std::vector<double> q;
  FieldMetadata meta;

  std::size_t size() const { return q.size(); }
  double x(std::size_t j) const { return grid.x(j); }
  double sup_abs_finite() const;
};

double sup_difference(const SolutionField& a, const SolutionField& b);

/// CSV: header "x,q", 17 significant digits, LF endings, "nan" for singular samples.
std::string to_csv(const SolutionField& f);
void write_csv(const SolutionField& f, const std::filesystem::path& path);

/// 17 significant digits, locale independent.
std::string format_number(double v);

}  // namespace soliton_forge
