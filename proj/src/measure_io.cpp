#include "soliton_forge/measure_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "soliton_forge/error.hpp"

namespace soliton_forge {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::measure_parse_error, "field '" + field + "': " + why);
}

double number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) fail(path + "." + key, "missing");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  const json& v = obj.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

DensityPiece parse_piece(const json& d, const std::string& path) {
  if (!d.is_object()) fail(path, "expected an object");
  DensityPiece p;
  if (!d.contains("form") || !d["form"].is_string()) fail(path + ".form", "missing or not a string");
  const std::string form = d["form"].get<std::string>();

  if (!d.contains("support")) fail(path + ".support", "missing");
  const auto support = number_list(d, "support", path);
  if (support.size() != 2) fail(path + ".support", "expected [a, b]");
  p.a = support[0];
  p.b = support[1];

  if (d.contains("sign")) {
    if (!d["sign"].is_number_integer()) fail(path + ".sign", "expected 1 or -1");
    p.sign = d["sign"].get<int>();
    if (p.sign != 1 && p.sign != -1) fail(path + ".sign", "expected 1 or -1");
  }

  const json params = d.contains("params") ? d["params"] : json::object();
  if (!params.is_object()) fail(path + ".params", "expected an object");
  const std::string ppath = path + ".params";
  if (form == "condensate") {
    CondensateDensity c;
    c.h = number(params, "h", ppath);
    if (params.contains("scale")) c.scale = number(params, "scale", ppath);
    p.form = c;
  } else if (form == "uniform") {
    p.form = UniformDensity{number(params, "value", ppath)};
  } else if (form == "table") {
    TableDensity t;
    t.k = number_list(params, "k", ppath);
    t.value = number_list(params, "value", ppath);
    if (t.k.size() != t.value.size()) fail(ppath + ".value", "length differs from k");
    p.form = std::move(t);
  } else {
    fail(path + ".form", "unknown form '" + form + "'");
  }
  return p;
}

}  // namespace

SpectralMeasure parse_measure(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("<document>", "expected an object");

  SpectralMeasure m;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) fail("name", "expected a string");
    m.name = doc["name"].get<std::string>();
  }
  if (doc.contains("atoms")) {
    if (!doc["atoms"].is_array()) fail("atoms", "expected an array");
    for (std::size_t i = 0; i < doc["atoms"].size(); ++i) {
      const std::string path = "atoms[" + std::to_string(i) + "]";
      const json& a = doc["atoms"][i];
      if (!a.is_object()) fail(path, "expected an object");
      m.atoms.push_back({number(a, "kappa", path), number(a, "weight", path)});
    }
  }
  if (doc.contains("densities")) {
    if (!doc["densities"].is_array()) fail("densities", "expected an array");
    for (std::size_t i = 0; i < doc["densities"].size(); ++i)
      m.densities.push_back(parse_piece(doc["densities"][i], "densities[" + std::to_string(i) + "]"));
  }
  for (const auto& [key, _] : doc.items())
    if (key != "name" && key != "atoms" && key != "densities") fail(key, "unknown field");

  validate(m);
  return m;
}

SpectralMeasure load_measure(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::measure_parse_error, "cannot open measure file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_measure(ss.str());
}

std::string measure_to_json(const SpectralMeasure& m) {
  json doc;
  doc["name"] = m.name;
  doc["atoms"] = json::array();
  for (const auto& a : m.atoms) doc["atoms"].push_back({{"kappa", a.kappa}, {"weight", a.weight}});
  doc["densities"] = json::array();
  for (const auto& p : m.densities) {
    json d;
    d["form"] = p.form_name();
    d["support"] = {p.a, p.b};
    d["sign"] = p.sign;
    if (const auto* c = std::get_if<CondensateDensity>(&p.form))
      d["params"] = {{"h", c->h}, {"scale", c->scale}};
    else if (const auto* u = std::get_if<UniformDensity>(&p.form))
      d["params"] = {{"value", u->value}};
    else if (const auto* t = std::get_if<TableDensity>(&p.form))
      d["params"] = {{"k", t->k}, {"value", t->value}};
    doc["densities"].push_back(d);
  }
  return doc.dump();
}

}  // namespace soliton_forge
