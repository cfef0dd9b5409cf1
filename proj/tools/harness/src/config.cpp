#include "zeno_harness/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace zeno::harness {

namespace {

enum class T { number, integer, string, boolean, object, numbers, integers, int_or_ints, int_ladder, real_ladder, pairs };

struct Key {
  T type;
  bool required = false;
};

using Schema = std::map<std::string, Key>;

const char* type_name(T t) {
  switch (t) {
    case T::number: return "a number";
    case T::integer: return "an integer";
    case T::string: return "a string";
    case T::boolean: return "a boolean";
    case T::object: return "an object";
    case T::numbers: return "an array of numbers";
    case T::integers: return "an array of integers";
    case T::int_or_ints: return "an integer or an array of integers";
    case T::int_ladder: return "an integer ladder (array or \"a:b\")";
    case T::real_ladder: return "a number ladder (array or \"log:lo:hi:count\")";
    case T::pairs: return "an array of [label, label] pairs";
  }
  return "?";
}

bool is_integer(const Json& v) {
  if (v.is_number_integer()) return true;
  return v.is_number_float() && std::isfinite(v.get<double>()) && v.get<double>() == std::floor(v.get<double>());
}

bool all_of(const Json& v, bool (*pred)(const Json&)) {
  if (!v.is_array()) return false;
  for (const auto& e : v)
    if (!pred(e)) return false;
  return true;
}

bool is_number(const Json& v) { return v.is_number(); }

bool type_ok(T t, const Json& v) {
  switch (t) {
    case T::number: return v.is_number();
    case T::integer: return is_integer(v);
    case T::string: return v.is_string();
    case T::boolean: return v.is_boolean();
    case T::object: return v.is_object();
    case T::numbers: return all_of(v, is_number);
    case T::integers: return all_of(v, is_integer);
    case T::int_or_ints: return is_integer(v) || all_of(v, is_integer);
    case T::int_ladder: return v.is_string() || all_of(v, is_integer);
    case T::real_ladder: return v.is_string() || all_of(v, is_number);
    case T::pairs:
      if (!v.is_array()) return false;
      for (const auto& p : v)
        if (!p.is_array() || p.size() != 2 || !all_of(p[0], is_integer) || !all_of(p[1], is_integer)) return false;
      return true;
  }
  return false;
}

void check_section(const Json& obj, const Schema& schema, const std::string& pointer) {
  if (!obj.is_object()) throw ConfigError(pointer + " must be an object", pointer);
  for (const auto& [key, value] : obj.items()) {
    const auto it = schema.find(key);
    if (it == schema.end()) throw ConfigError("unknown key \"" + key + "\"", pointer + "/" + key);
    if (!type_ok(it->second.type, value))
      throw ConfigError(key + " must be " + type_name(it->second.type), pointer + "/" + key);
  }
  for (const auto& [key, k] : schema)
    if (k.required && !obj.contains(key)) throw ConfigError("missing required key \"" + key + "\"", pointer + "/" + key);
}

const Schema kTop{{"kind", {T::string, true}}, {"domain", {T::object}}, {"grid", {T::object}},
                  {"units", {T::object}},      {"params", {T::object}}, {"output", {T::string}},
                  {"seed", {T::integer}},      {"jobs", {T::integer}},  {"dat", {T::boolean}}};

const std::map<std::string, Schema> kDomains{
    {"interval", {{"type", {T::string, true}}, {"x0", {T::number, true}}, {"x1", {T::number, true}}}},
    {"rectangle", {{"type", {T::string, true}}, {"a", {T::number, true}}, {"b", {T::number, true}}}},
    {"annulus", {{"type", {T::string, true}}, {"r1", {T::number, true}}, {"r2", {T::number, true}}}},
    {"shell", {{"type", {T::string, true}}, {"r1", {T::number, true}}, {"r2", {T::number, true}}}},
    {"mask",
     {{"type", {T::string, true}}, {"pgm", {T::string, true}}, {"origin", {T::numbers}}, {"spacing", {T::number, true}}}},
};

const Schema kGrid{{"points", {T::int_or_ints}}, {"origin", {T::numbers}}, {"extent", {T::numbers}}};
const Schema kUnits{{"hbar", {T::number}}, {"mass", {T::number}}};

const Schema kBasisKeys{{"nmax", {T::integer}}, {"mmax", {T::integer}}, {"lmax", {T::integer}}, {"count", {T::integer}}};

Schema with_basis(Schema s) {
  s.insert(kBasisKeys.begin(), kBasisKeys.end());
  return s;
}

const std::map<ExperimentKind, Schema>& param_schemas() {
  static const std::map<ExperimentKind, Schema> s{
      {ExperimentKind::spectrum, with_basis({{"source", {T::string}}, {"radial_points", {T::integer}}})},
      {ExperimentKind::zeno_run, with_basis({{"t", {T::number}}, {"n_ladder", {T::int_ladder}}, {"initial", {T::integers}}})},
      {ExperimentKind::short_time, with_basis({{"taus", {T::real_ladder}}, {"pairs", {T::pairs}}})},
      {ExperimentKind::leakage,
       with_basis({{"taus", {T::real_ladder}}, {"initial", {T::integers}}, {"operator_norm", {T::boolean}}})},
      {ExperimentKind::reduce,
       {{"family", {T::string, true}},
        {"a", {T::number}},
        {"b_ladder", {T::numbers}},
        {"m", {T::integer}},
        {"n_max", {T::integer}},
        {"R", {T::number}},
        {"dr_ladder", {T::numbers}},
        {"l_set", {T::integers}},
        {"t", {T::number}},
        {"target_ratio", {T::number}},
        {"max_steps", {T::integer}},
        {"transverse_points", {T::integer}},
        {"control_factor", {T::number}},
        {"run_transverse", {T::boolean}},
        {"negative_control", {T::boolean}},
        {"energy_shift", {T::number}}}},
      {ExperimentKind::algebra_check,
       {{"trials", {T::integer}},
        {"dim", {T::integer}},
        {"rank", {T::integer}},
        {"xp_points", {T::integer}},
        {"xp_rank", {T::integer}},
        {"annulus_r1", {T::number}},
        {"annulus_r2", {T::number}},
        {"t_ladder", {T::real_ladder}},
        {"polar_rings", {T::integer}},
        {"polar_angles", {T::integer}},
        {"free_points", {T::integer}},
        {"projector_ladder", {T::int_ladder}},
        {"projector_points", {T::integer}},
        {"w0", {T::number}},
        {"profile", {T::string}},
        {"step_taus", {T::real_ladder}}}},
  };
  return s;
}

bool needs_domain(ExperimentKind k) { return k != ExperimentKind::reduce && k != ExperimentKind::algebra_check; }

void fill(Json& obj, const std::string& key, Json value) {
  if (!obj.contains(key)) obj[key] = std::move(value);
}

void fill_defaults(ExperimentKind kind, Json& p, const std::string& domain_type) {
  switch (kind) {
    case ExperimentKind::spectrum:
      fill(p, "source", domain_type == "mask" ? "fd" : "analytic");
      break;
    case ExperimentKind::zeno_run:
      fill(p, "t", 1.0);
      fill(p, "n_ladder", "1:64");
      break;
    case ExperimentKind::short_time:
      fill(p, "taus", "log:1e-4:1e-2:13");
      break;
    case ExperimentKind::leakage:
      fill(p, "taus", "log:1e-4:1e-2:13");
      fill(p, "operator_norm", false);
      break;
    case ExperimentKind::reduce: {
      const std::string fam = p.value("family", "");
      if (fam == "rectangle-to-interval") {
        fill(p, "a", 3.141592653589793);
        fill(p, "b_ladder", Json::array({0.1, 0.09, 0.08}));
        fill(p, "m", 1);
        fill(p, "n_max", 3);
      } else if (fam == "annulus-to-circle" || fam == "shell-to-sphere") {
        fill(p, "R", 1.0);
        fill(p, "dr_ladder", Json::array({0.1, 0.05, 0.02}));
        fill(p, "l_set", Json::array({0, 1, 2, 3}));
      } else {
        throw ConfigError("family must be rectangle-to-interval, annulus-to-circle or shell-to-sphere",
                          "/params/family");
      }
      break;
    }
    case ExperimentKind::algebra_check:
      fill(p, "trials", 100);
      fill(p, "dim", 64);
      fill(p, "rank", 32);
      fill(p, "xp_points", 64);
      fill(p, "xp_rank", 8);
      fill(p, "annulus_r1", 1.0);
      fill(p, "annulus_r2", 2.0);
      fill(p, "t_ladder", Json::array({1e-4, 3e-4, 1e-3, 3e-3, 1e-2}));
      fill(p, "polar_rings", 64);
      fill(p, "polar_angles", 128);
      fill(p, "free_points", 48);
      fill(p, "projector_ladder", "4:256:x2");
      fill(p, "projector_points", 400000);
      fill(p, "w0", 1.0);
      fill(p, "profile", "linear");
      fill(p, "step_taus", "log:1e-4:1e-2:5");
      break;
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::zeno_run: return "zeno-run";
    case ExperimentKind::short_time: return "short-time";
    case ExperimentKind::leakage: return "leakage";
    case ExperimentKind::reduce: return "reduce";
    case ExperimentKind::algebra_check: return "algebra-check";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::spectrum, ExperimentKind::zeno_run, ExperimentKind::short_time, ExperimentKind::leakage,
                 ExperimentKind::reduce, ExperimentKind::algebra_check})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment kind \"" + name + "\"", "/kind");
}

ExperimentConfig parse_config(Json j) {
  check_section(j, kTop, "");
  ExperimentConfig cfg;
  cfg.kind = parse_kind(j["kind"].get<std::string>());

  std::string domain_type;
  if (needs_domain(cfg.kind)) {
    if (!j.contains("domain")) throw ConfigError("missing required key \"domain\"", "/domain");
    const Json& d = j["domain"];
    if (!d.contains("type") || !d["type"].is_string()) throw ConfigError("domain needs a string type", "/domain/type");
    domain_type = d["type"].get<std::string>();
    const auto it = kDomains.find(domain_type);
    if (it == kDomains.end())
      throw ConfigError("domain type must be interval, rectangle, annulus, shell or mask", "/domain/type");
    check_section(d, it->second, "/domain");
    if (j.contains("grid")) check_section(j["grid"], kGrid, "/grid");
  } else {
    for (const char* key : {"domain", "grid"})
      if (j.contains(key))
        throw ConfigError(std::string(key) + " is not used by " + to_string(cfg.kind), std::string("/") + key);
  }
  if (j.contains("units")) check_section(j["units"], kUnits, "/units");
  Json& units = j["units"];
  if (units.is_null()) units = Json::object();
  fill(units, "hbar", 1.0);
  fill(units, "mass", 1.0);

  Json& params = j["params"];
  if (params.is_null()) params = Json::object();
  check_section(params, param_schemas().at(cfg.kind), "/params");
  fill_defaults(cfg.kind, params, domain_type);
  check_section(params, param_schemas().at(cfg.kind), "/params");

  fill(j, "seed", 12345);
  cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("jobs")) {
    cfg.jobs = j["jobs"].get<int>();
    if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1", "/jobs");
  }
  cfg.dat = j.value("dat", false);
  cfg.output = j.contains("output") ? std::filesystem::path(j["output"].get<std::string>()) : default_output_dir();
  cfg.hash = config_hash(j);
  cfg.raw = std::move(j);
  return cfg;
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), "");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what(), "");
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const Json& config) {
  Json c = config;
  for (const char* key : {"output", "jobs", "dat"}) c.erase(key);
  return fnv1a_hex(c.dump());
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("ZENO_OUT"); env && *env) return env;
  return "zeno-out";
}

std::string field_pointer(const std::string& field) {
  if (field.empty()) return "";
  std::string p = "/";
  if (field.find('.') == std::string::npos) p += "params/";
  for (char c : field) p += c == '.' ? '/' : c;
  return p;
}

std::vector<int> parse_int_ladder(const Json& value, const std::string& pointer) {
  std::vector<int> out;
  if (value.is_array()) {
    for (const auto& v : value) out.push_back(static_cast<int>(v.get<double>()));
  } else {
    const std::string s = value.get<std::string>();
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError("ladder \"" + s + "\" must look like a:b, a:b:step or a:b:x2", pointer);
    int lo = 0, hi = 0;
    try {
      lo = std::stoi(parts[0]);
      hi = std::stoi(parts[1]);
      if (parts.size() == 2) {
        for (int n = lo; n <= hi; ++n) out.push_back(n);
      } else if (parts[2].size() > 1 && parts[2][0] == 'x') {
        const int f = std::stoi(parts[2].substr(1));
        if (f < 2) throw ConfigError("geometric factor must be >= 2", pointer);
        for (long n = lo; n <= hi; n *= f) out.push_back(static_cast<int>(n));
      } else {
        const int step = std::stoi(parts[2]);
        if (step < 1) throw ConfigError("ladder step must be >= 1", pointer);
        for (int n = lo; n <= hi; n += step) out.push_back(n);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("ladder \"" + s + "\" is not made of integers", pointer);
    }
    if (lo < 1) throw ConfigError("ladder entries must be >= 1", pointer);
  }
  if (out.empty()) throw ConfigError("ladder is empty", pointer);
  for (int n : out)
    if (n < 1) throw ConfigError("ladder entries must be >= 1", pointer);
  return out;
}

std::vector<double> parse_real_ladder(const Json& value, const std::string& pointer) {
  std::vector<double> out;
  if (value.is_array()) {
    for (const auto& v : value) out.push_back(v.get<double>());
  } else {
    const std::string s = value.get<std::string>();
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 4 || parts[0] != "log") throw ConfigError("ladder \"" + s + "\" must look like log:lo:hi:count", pointer);
    try {
      const double lo = std::stod(parts[1]), hi = std::stod(parts[2]);
      const int count = std::stoi(parts[3]);
      if (!(lo > 0.0) || !(hi > lo) || count < 2) throw ConfigError("need 0 < lo < hi and count >= 2", pointer);
      for (int k = 0; k < count; ++k) out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
    } catch (const std::logic_error&) {
      throw ConfigError("ladder \"" + s + "\" has malformed numbers", pointer);
    }
  }
  if (out.empty()) throw ConfigError("ladder is empty", pointer);
  for (double v : out)
    if (!std::isfinite(v)) throw ConfigError("ladder values must be finite", pointer);
  return out;
}

}  // namespace zeno::harness
