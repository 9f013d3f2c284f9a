#include "soliton_forge/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "soliton_forge/condensate.hpp"
#include "soliton_forge/darboux.hpp"
#include "soliton_forge/dyson.hpp"
#include "soliton_forge/error.hpp"
#include "soliton_forge/field.hpp"
#include "soliton_forge/measure_io.hpp"
#include "soliton_forge/verify.hpp"

namespace soliton_forge::cli {

namespace {

using json = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  std::string measure;
  std::string seed = "zero";
  std::string atoms;
  std::string out;
  std::string report;
  std::string target;
  std::string method = "dyson";
  double x_min = -5.0;
  double x_max = 5.0;
  std::size_t n_x = 201;
  std::string times = "0";
  int n = 40;
  std::string scheme = "trace";
  double h = 1.0;
  double ds = 1e-3;
  double delta = 1e-2;
  std::vector<std::string> checks;
  std::vector<std::string> tolerances;
};

// Shortest round-trip spelling, used in file suffixes and messages.
std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<double> parse_times(const std::string& list) {
  std::vector<double> ts;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size() || !std::isfinite(v))
      throw Error(ErrorCode::invalid_argument, "--t: cannot read time '" + item + "'");
    ts.push_back(v);
  }
  if (ts.empty()) throw Error(ErrorCode::invalid_argument, "--t: no times given");
  return ts;
}

std::vector<Atom> parse_atoms(const std::string& list) {
  std::vector<Atom> atoms;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    Atom a;
    auto read = [&](std::string_view s, double& v) {
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      return r.ec == std::errc() && r.ptr == s.data() + s.size();
    };
    if (colon == std::string::npos || !read(std::string_view(item).substr(0, colon), a.kappa) ||
        !read(std::string_view(item).substr(colon + 1), a.weight))
      throw Error(ErrorCode::invalid_argument, "--atoms: expected kappa:weight, got '" + item + "'");
    atoms.push_back(a);
  }
  return atoms;
}

Grid grid_of(const RunConfig& c) {
  Grid g{c.x_min, c.x_max, c.n_x};
  g.check();
  return g;
}

std::filesystem::path output_path(const std::string& out, double t, bool multi) {
  std::filesystem::path p(out);
  if (!multi) return p;
  auto name = p.stem().string() + "_t" + shortest(t) + p.extension().string();
  return p.parent_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::invalid_argument, "cannot write " + path.string());
  f << text;
}

void emit(const SolutionField& f, const RunConfig& c, bool multi, std::ostream& out) {
  if (c.out.empty()) {
    if (multi) throw Error(ErrorCode::invalid_argument, "several times need --out");
    out << to_csv(f);
    return;
  }
  write_csv(f, output_path(c.out, f.t, multi));
}

// Centers of the runs of singular samples.
std::vector<double> pole_centers(const SolutionField& f) {
  std::vector<double> centers;
  const auto& xs = f.meta.singular_x;
  const double gap = 1.5 * f.grid.dx();
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j + 1 < xs.size() && xs[j + 1] - xs[j] <= gap) ++j;
    centers.push_back(0.5 * (xs[i] + xs[j]));
    i = j + 1;
  }
  return centers;
}

SpectralMeasure load_target_measure(const RunConfig& c) {
  if (c.measure.empty()) throw Error(ErrorCode::invalid_argument, "--measure is required");
  return load_measure(c.measure);
}

// Fields go out before a pole is reported, so the file still documents it.
int finish_fields(const std::vector<SolutionField>& fields, const RunConfig& c, std::ostream& out, std::ostream& err) {
  const bool multi = fields.size() > 1;
  int code = ok;
  for (const auto& f : fields) {
    emit(f, c, multi, out);
    for (const auto& w : f.meta.warnings) err << "warning (t=" << shortest(f.t) << "): " << w << "\n";
    if (f.meta.singular) {
      for (double x : pole_centers(f)) err << "pole near x=" << shortest(x) << " at t=" << shortest(f.t) << "\n";
      code = numeric_error;
    }
  }
  return code;
}

int cmd_gas(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto m = load_target_measure(c);
  const auto grid = grid_of(c);
  const auto scheme = parse_scheme(c.scheme);
  std::vector<SolutionField> fields;
  for (double t : parse_times(c.times)) fields.push_back(q_dyson(m, grid, t, c.n, scheme));
  return finish_fields(fields, c, out, err);
}

std::vector<Atom> soliton_atoms(const RunConfig& c) {
  if (!c.atoms.empty()) return parse_atoms(c.atoms);
  const auto m = load_target_measure(c);
  if (!m.atomic()) throw Error(ErrorCode::invalid_argument, "solitons: the measure has density pieces");
  validate(m);
  return m.atoms;
}

int cmd_solitons(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto atoms = soliton_atoms(c);
  validate(SpectralMeasure{"atoms", atoms, {}});
  const auto grid = grid_of(c);
  const auto scheme = parse_scheme(c.scheme);
  std::vector<SolutionField> fields;
  for (double t : parse_times(c.times)) fields.push_back(kay_moses(atoms, grid, t, scheme));
  return finish_fields(fields, c, out, err);
}

SolutionField condensate_field(const RunConfig& c, const Grid& grid, double t) {
  if (c.method == "dyson") return q_dyson(condensate_measure(c.h), grid, t, c.n, parse_scheme(c.scheme));
  if (c.method == "fredholm-y") return q_condensate_via_Y(CondensateSpec{c.h, c.n, grid, t});
  throw Error(ErrorCode::invalid_argument, "--method must be dyson or fredholm-y");
}

json levels_json(const SolutionField& f, double h) {
  json j;
  j["t"] = f.t;
  try {
    const auto lv = asymptotic_levels(f, h);
    j["left_level"] = lv.left;
    j["right_level"] = lv.right;
    j["left_slope"] = lv.left_slope;
    j["right_slope"] = lv.right_slope;
  } catch (const Error& e) {
    j["left_level"] = nullptr;
    j["right_level"] = nullptr;
    j["note"] = e.what();
  }
  return j;
}

int cmd_condensate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto grid = grid_of(c);
  std::vector<SolutionField> fields;
  json summary;
  summary["h"] = c.h;
  summary["levels"] = json::array();
  for (double t : parse_times(c.times)) {
    fields.push_back(condensate_field(c, grid, t));
    summary["levels"].push_back(levels_json(fields.back(), c.h));
  }
  const int code = finish_fields(fields, c, out, err);
  if (!c.report.empty())
    write_text(c.report, summary.dump(2) + "\n");
  else if (!c.out.empty())
    out << summary.dump(2) << "\n";
  return code;
}

SeedPotential make_seed(const RunConfig& c, double t) {
  const double reach = std::max(40.0, c.x_max + 10.0);
  if (c.seed == "zero") return SeedPotential::zero(reach);
  return SeedPotential::gas(load_measure(c.seed), c.n, t, reach);
}

int cmd_darboux(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto sigma = load_target_measure(c);
  const auto grid = grid_of(c);
  DarbouxOptions opts;
  opts.ds = c.ds;
  opts.scheme = parse_scheme(c.scheme);
  opts.tabulate = false;
  std::vector<SolutionField> fields;
  for (double t : parse_times(c.times))
    fields.push_back(darboux_transform(make_seed(c, t), sigma, grid, t, c.n, opts).field);
  return finish_fields(fields, c, out, err);
}

// ---- verify ----

struct CheckList {
  json checks = json::array();
  bool all_pass = true;

  void add(const std::string& name, double value, double tolerance, const std::string& note = {}) {
    const bool pass = std::isfinite(value) && value <= tolerance;
    json j;
    j["name"] = name;
    j["value"] = std::isfinite(value) ? json(value) : json(nullptr);
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    if (!note.empty()) j["note"] = note;
    checks.push_back(std::move(j));
    all_pass = all_pass && pass;
  }
};

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
  std::map<std::string, double> tol{{"residual", 1e-3}, {"residual_order", 1.0}, {"bounds", 0.0},
                                    {"left_level", 5e-2}, {"right_level", 1e-6},  {"route", 1e-6},
                                    {"spectrum", 1e-3},  {"probe_depth", 0.10},  {"probe_speed", 0.15},
                                    {"reduction", 1e-6}, {"roundtrip", 1e-5}};
  for (const auto& item : items) {
    const auto eq = item.find('=');
    double v = 0;
    const char* first = item.data() + (eq == std::string::npos ? 0 : eq + 1);
    const char* last = item.data() + item.size();
    const auto r = std::from_chars(first, last, v);
    if (eq == std::string::npos || r.ec != std::errc() || r.ptr != last || !(v >= 0))
      throw Error(ErrorCode::invalid_argument, "--tol: expected name=value, got '" + item + "'");
    const auto name = item.substr(0, eq);
    if (!tol.count(name)) throw Error(ErrorCode::invalid_argument, "--tol: unknown check '" + name + "'");
    tol[name] = v;
  }
  return tol;
}

std::vector<std::string> default_checks(const std::string& target, const SpectralMeasure& m) {
  if (target == "condensate") return {"residual", "bounds", "asymptotics"};
  if (target == "solitons") return {"residual", "spectrum"};
  if (target == "darboux") return {"reduction", "roundtrip"};
  std::vector<std::string> v{"residual"};
  if (m.nonnegative()) v.push_back("bounds");
  return v;
}

struct VerifyTarget {
  SpectralMeasure measure;
  DiscretizedMeasure discrete;
  double h = 0.0;
};

void run_check(const std::string& check, const std::string& suffix, const RunConfig& c, const VerifyTarget& tg,
               const Grid& grid, double t, const std::map<std::string, double>& tol, CheckList& list) {
  const bool darboux = c.target == "darboux";
  auto need = [&](bool ok_here, const char* what) {
    if (!ok_here) throw Error(ErrorCode::invalid_argument, "check '" + check + "' " + what);
  };
  auto field = [&] {
    if (c.target == "condensate") return condensate_field(c, grid, t);
    if (c.target == "solitons") return kay_moses(tg.measure.atoms, grid, t, parse_scheme(c.scheme));
    return q_dyson(tg.discrete, grid, t, parse_scheme(c.scheme));
  };

  if (check == "residual") {
    need(!darboux, "needs a measure target");
    const auto& d = tg.discrete;
    const WideProducer p = [&d](numkit::Quad x, numkit::Quad tt) { return q_point_quad(d, x, tt); };
    const auto r = kdv_residual(p, grid.x_min, grid.x_max, t, c.delta, c.delta);
    std::string note = "excluded=" + std::to_string(r.coarse.excluded);
    list.add("residual" + suffix, r.coarse.sup, tol.at("residual"), note);
    list.add("residual_order" + suffix, r.order ? std::abs(*r.order - 4.0) : NAN, tol.at("residual_order"));
  } else if (check == "bounds") {
    need(!darboux && tg.measure.nonnegative(), "needs a nonnegative measure");
    const auto b = bounds_check(field(), tg.h, 1e-9);
    std::string note = "min=" + shortest(b.min) + " max=" + shortest(b.max);
    if (!b.pass()) note += " first_violation_x=" + shortest(b.violations.front().first);
    list.add("bounds" + suffix, static_cast<double>(b.violations.size()), tol.at("bounds"), note);
  } else if (check == "asymptotics") {
    need(!darboux, "needs a measure target");
    const auto f = field();
    try {
      const auto lv = asymptotic_levels(f, tg.h);
      list.add("left_level" + suffix, std::abs(lv.left + tg.h * tg.h), tol.at("left_level"), "level=" + shortest(lv.left));
      list.add("right_level" + suffix, std::abs(lv.right), tol.at("right_level"), "level=" + shortest(lv.right));
    } catch (const Error& e) {
      list.add("left_level" + suffix, NAN, tol.at("left_level"), e.what());
      list.add("right_level" + suffix, NAN, tol.at("right_level"), e.what());
    }
  } else if (check == "route") {
    need(c.target == "condensate" && c.h == 1.0, "needs the h = 1 condensate");
    const auto y = q_condensate_via_Y(CondensateSpec{1.0, c.n, grid, t});
    const auto d = q_dyson(condensate_measure(1.0), grid, t, c.n);
    list.add("route" + suffix, sup_difference(y, d), tol.at("route"));
  } else if (check == "spectrum") {
    need(!darboux && tg.measure.atomic() && !tg.measure.atoms.empty() && tg.measure.nonnegative(),
         "needs positive atoms only");
    std::vector<double> kappas;
    for (const auto& a : tg.measure.atoms) kappas.push_back(a.kappa);
    std::sort(kappas.begin(), kappas.end(), std::greater<>());
    const auto& d = tg.discrete;
    const auto q = [&d, t](double x) { return q_point(d, x, t); };
    const auto sc = count_bound_states(q, grid.x_min, grid.x_max, -0.5 * kappas.back() * kappas.back());
    double err = sc.count == static_cast<int>(kappas.size()) ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < kappas.size() && std::isfinite(err); ++i)
      err = std::max(err, std::abs(sc.eigenvalues[i] + kappas[i] * kappas[i]));
    list.add("spectrum" + suffix, err, tol.at("spectrum"), "count=" + std::to_string(sc.count));
  } else if (check == "probe") {
    need(c.target == "condensate", "needs the condensate target");
    const auto& d = tg.discrete;
    const auto q = [&d](double x, double tt) { return q_point(d, x, tt); };
    const double two_h2 = 2 * tg.h * tg.h;
    try {
      const auto pr = leading_soliton_probe(q, tg.h, t, grid.x_min, grid.x_max);
      list.add("probe_depth" + suffix, std::abs(pr.depth + two_h2) / two_h2, tol.at("probe_depth"),
               "depth=" + shortest(pr.depth));
      list.add("probe_speed" + suffix, std::abs(pr.speed - two_h2) / two_h2, tol.at("probe_speed"),
               "speed=" + shortest(pr.speed));
    } catch (const Error& e) {
      list.add("probe_depth" + suffix, NAN, tol.at("probe_depth"), e.what());
      list.add("probe_speed" + suffix, NAN, tol.at("probe_speed"), e.what());
    }
  } else if (check == "reduction") {
    need(darboux && c.seed == "zero", "needs the darboux target with the zero seed");
    DarbouxOptions opts;
    opts.ds = c.ds;
    opts.tabulate = false;
    const auto dressed = darboux_transform(make_seed(c, t), tg.measure, grid, t, c.n, opts);
    const auto ref = tg.measure.atomic() ? kay_moses(tg.measure.atoms, grid, t) : q_dyson(tg.discrete, grid, t);
    list.add("reduction" + suffix, sup_difference(dressed.field, ref), tol.at("reduction"), "reference=" + ref.meta.method);
  } else if (check == "roundtrip") {
    need(darboux, "needs the darboux target");
    DarbouxOptions opts;
    opts.ds = c.ds;
    const auto seed = make_seed(c, t);
    const auto dressed = darboux_transform(seed, tg.measure, grid, t, c.n, opts);
    const auto back = darboux_invert(dressed, grid, c.n, opts);
    double err = 0;
    for (std::size_t j = 0; j < back.size(); ++j) err = std::max(err, std::abs(back.q[j] - seed(grid.x(j))));
    list.add("roundtrip" + suffix, err, tol.at("roundtrip"));
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown check '" + check + "'");
  }
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  static const std::vector<std::string> targets{"gas", "solitons", "condensate", "darboux"};
  if (std::find(targets.begin(), targets.end(), c.target) == targets.end())
    throw Error(ErrorCode::invalid_argument, "--target must be gas, solitons, condensate or darboux");
  const auto tol = parse_tolerances(c.tolerances);
  const auto grid = grid_of(c);
  const auto times = parse_times(c.times);
  parse_scheme(c.scheme);

  VerifyTarget tg;
  if (c.target == "condensate")
    tg.measure = condensate_measure(c.h);
  else if (c.target == "solitons")
    tg.measure = SpectralMeasure{"atoms", soliton_atoms(c), {}};
  else
    tg.measure = load_target_measure(c);
  carleson_check(tg.measure);
  tg.discrete = discretize(tg.measure, c.target == "solitons" ? 1 : c.n);
  tg.h = c.target == "condensate" ? c.h : tg.measure.sup_support();

  auto checks = c.checks.empty() ? default_checks(c.target, tg.measure) : c.checks;

  json echo;
  echo["command"] = "verify";
  echo["target"] = c.target;
  echo["measure"] = c.measure;
  if (c.target == "darboux") echo["seed"] = c.seed;
  if (c.target == "condensate") {
    echo["h"] = c.h;
    echo["method"] = c.method;
  }
  echo["grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"n_x", grid.n_x}};
  echo["t"] = times;
  echo["n"] = c.n;
  echo["scheme"] = c.scheme;
  echo["delta"] = c.delta;
  echo["ds"] = c.ds;
  echo["checks"] = checks;
  echo["tolerances"] = tol;

  CheckList list;
  for (double t : times) {
    const std::string suffix = times.size() > 1 ? "@t=" + shortest(t) : "";
    for (const auto& check : checks) run_check(check, suffix, c, tg, grid, t, tol, list);
  }
  json report;
  report["checks"] = list.checks;
  report["config_echo"] = echo;
  const auto text = report.dump(2) + "\n";
  if (c.out.empty())
    out << text;
  else
    write_text(c.out, text);
  return list.all_pass ? ok : verification_failed;
}

void add_grid_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--xmin", c.x_min, "left end of the grid");
  sub->add_option("--xmax", c.x_max, "right end of the grid");
  sub->add_option("--nx", c.n_x, "number of grid points");
  sub->add_option("--t", c.times, "time, or a comma-separated list of times");
  sub->add_option("--n", c.n, "quadrature nodes per density piece")->check(CLI::PositiveNumber);
  sub->add_option("--scheme", c.scheme, "fd or trace")->check(CLI::IsMember({"fd", "trace"}));
  sub->add_option("--out", c.out, "output file (stdout when omitted)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Reflectionless KdV fields from spectral measures", "soliton_forge"};
  app.require_subcommand(1);

  auto* gas = app.add_subcommand("gas", "Dyson determinant for a measure file");
  add_grid_options(gas, c);
  gas->add_option("--measure", c.measure, "measure JSON")->required();

  auto* sol = app.add_subcommand("solitons", "exact N-soliton determinant");
  add_grid_options(sol, c);
  sol->add_option("--measure", c.measure, "measure JSON with atoms only");
  sol->add_option("--atoms", c.atoms, "kappa:weight,kappa:weight,...");

  auto* cond = app.add_subcommand("condensate", "soliton condensate of level h");
  add_grid_options(cond, c);
  cond->set_help_flag("--help", "print this help");
  cond->add_option("--h", c.h, "spectral edge")->check(CLI::PositiveNumber);
  cond->add_option("--method", c.method, "dyson or fredholm-y")->check(CLI::IsMember({"dyson", "fredholm-y"}));
  cond->add_option("--report", c.report, "JSON file for the plateau levels");

  auto* dar = app.add_subcommand("darboux", "dress a seed potential by a measure");
  add_grid_options(dar, c);
  dar->add_option("--measure", c.measure, "dressing measure JSON")->required();
  dar->add_option("--seed", c.seed, "'zero' or a measure JSON whose Dyson field is the seed");
  dar->add_option("--ds", c.ds, "Jost integration step")->check(CLI::PositiveNumber);

  auto* ver = app.add_subcommand("verify", "run checks and write a JSON report");
  add_grid_options(ver, c);
  ver->set_help_flag("--help", "print this help");
  ver->add_option("--target", c.target, "gas, solitons, condensate or darboux")->required();
  ver->add_option("--measure", c.measure, "measure JSON");
  ver->add_option("--atoms", c.atoms, "kappa:weight,... for the solitons target");
  ver->add_option("--seed", c.seed, "darboux seed");
  ver->add_option("--h", c.h, "condensate edge")->check(CLI::PositiveNumber);
  ver->add_option("--method", c.method, "condensate route")->check(CLI::IsMember({"dyson", "fredholm-y"}));
  ver->add_option("--ds", c.ds, "Jost integration step")->check(CLI::PositiveNumber);
  ver->add_option("--delta", c.delta, "residual step in x and t")->check(CLI::PositiveNumber);
  ver->add_option("--checks", c.checks,
                  "residual, bounds, asymptotics, route, spectrum, probe, reduction, roundtrip")
      ->delimiter(',');
  ver->add_option("--tol", c.tolerances, "override a tolerance, name=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*gas) return cmd_gas(c, out, err);
    if (*sol) return cmd_solitons(c, out, err);
    if (*cond) return cmd_condensate(c, out, err);
    if (*dar) return cmd_darboux(c, out, err);
    return cmd_verify(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? config_error : numeric_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return numeric_error;
  }
}

}  // namespace soliton_forge::cli
