#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

#include "zeno_harness/config.hpp"
#include "zeno_harness/report.hpp"
#include "zeno_harness/runner.hpp"

using namespace zeno::harness;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  int jobs = 0;
  bool dat = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::string domain;
  std::map<std::string, double> domain_numbers;  // a, b, x0, x1, r1, r2
  std::map<std::string, double> units;
  std::optional<int> points;
  std::map<std::string, int> basis;  // lmax, nmax, mmax, count
  std::map<std::string, std::string> params;  // raw strings for source, n_ladder, taus, family, ladder
  std::map<std::string, double> param_numbers;  // t, R
};

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return text;
  }
}

Json build_config(ExperimentKind kind, const CommonFlags& f) {
  Json j = f.config.empty() ? Json::object() : load_json(f.config);
  if (!j.is_object()) throw ConfigError("config must be a JSON object", "");
  if (j.contains("kind") && j["kind"] != to_string(kind))
    throw ConfigError("config kind " + j["kind"].dump() + " does not match the subcommand", "/kind");
  j["kind"] = to_string(kind);

  if (!f.domain.empty()) j["domain"]["type"] = f.domain;
  for (const auto& [k, v] : f.domain_numbers) j["domain"][k] = v;
  for (const auto& [k, v] : f.units) j["units"][k] = v;
  if (f.points) j["grid"]["points"] = *f.points;
  for (const auto& [k, v] : f.basis) j["params"][k] = v;
  for (const auto& [k, v] : f.param_numbers) j["params"][k] = v;
  for (const auto& [k, v] : f.params) {
    if (k == "ladder") {
      const std::string key = j["params"].value("family", "") == "rectangle-to-interval" ? "b_ladder" : "dr_ladder";
      j["params"][key] = parse_value(v);
    } else {
      j["params"][k] = parse_value(v);
      if (k == "source" || k == "family" || k == "n_ladder" || k == "taus") j["params"][k] = v;
    }
  }
  if (!f.out.empty()) j["output"] = f.out;
  if (f.jobs > 0) j["jobs"] = f.jobs;
  if (f.dat) j["dat"] = true;
  if (f.seed) j["seed"] = *f.seed;

  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || s.empty() || s[0] != '/')
      throw ConfigError("--set expects /json/pointer=value, got \"" + s + "\"", "");
    j[Json::json_pointer(s.substr(0, eq))] = parse_value(s.substr(eq + 1));
  }
  return j;
}

int emit_error() {
  const auto [code, err] = describe_current_exception();
  std::cout << err.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected-evolution experiments: Zeno dynamics, Dirichlet spectra, reductions and projected algebras"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kArtifactName) + " " + kArtifactVersion);

  CommonFlags flags;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, double> numbers;
  std::map<std::string, int> ints;
  std::map<std::string, std::string> strings;

  const std::vector<std::pair<ExperimentKind, const char*>> kinds{
      {ExperimentKind::spectrum, "Dirichlet eigenvalues, analytic or finite difference"},
      {ExperimentKind::zeno_run, "(P U(t/N) P)^N over an N ladder against the Dirichlet evolution"},
      {ExperimentKind::short_time, "Projected matrix elements and their short-time orders"},
      {ExperimentKind::leakage, "||Q U(tau) P psi|| over a tau ladder"},
      {ExperimentKind::reduce, "Thin-domain reductions and their extrapolated constants"},
      {ExperimentKind::algebra_check, "Projected star-product identities and counterexamples"}};

  for (const auto& [kind, help] : kinds) {
    const std::string name = to_string(kind);
    auto* sub = app.add_subcommand(name, help);
    subs[name] = sub;
    sub->add_option("--config", flags.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "Output directory (default $ZENO_OUT or ./zeno-out)");
    sub->add_option("--jobs", flags.jobs, "Concurrent ladder points")->check(CLI::PositiveNumber);
    sub->add_flag("--dat", flags.dat, "Also write gnuplot .dat files");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { flags.seed = v; }, "RNG seed");
    sub->add_option("--set", flags.sets, "Override a config field: /json/pointer=value");
    sub->add_option("--hbar", numbers["hbar"], "Reduced Planck constant");
    sub->add_option("--mass", numbers["mass"], "Particle mass");
    if (kind == ExperimentKind::reduce) {
      sub->add_option("--family", strings["family"], "rectangle-to-interval, annulus-to-circle or shell-to-sphere");
      sub->add_option("--a", numbers["a"], "Rectangle length");
      sub->add_option("--R", numbers["R"], "Mid radius");
      sub->add_option("--t", numbers["t"], "Evolution time");
      sub->add_option("--ladder", strings["ladder"], "JSON array of thicknesses, largest first");
      continue;
    }
    if (kind == ExperimentKind::algebra_check) continue;
    sub->add_option("--domain", flags.domain, "interval, rectangle, annulus, shell or mask");
    for (const char* k : {"a", "b", "x0", "x1", "r1", "r2"}) sub->add_option(std::string("--") + k, numbers[k]);
    sub->add_option("--points", ints["points"], "Grid points per axis");
    for (const char* k : {"lmax", "nmax", "mmax", "count"}) sub->add_option(std::string("--") + k, ints[k]);
    if (kind == ExperimentKind::spectrum) sub->add_option("--source", strings["source"], "analytic or fd");
    if (kind == ExperimentKind::zeno_run) {
      sub->add_option("--t", numbers["t"], "Evolution time");
      sub->add_option("--n-ladder", strings["n_ladder"], "a:b, a:b:step or a:b:x2");
    }
    if (kind == ExperimentKind::short_time || kind == ExperimentKind::leakage)
      sub->add_option("--taus", strings["taus"], "log:lo:hi:count or a JSON array");
  }

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "Merge result envelopes into summary.json and summary.txt");
  rep->add_option("dir", report_dir, "Results directory (default $ZENO_OUT or ./zeno-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (rep->parsed()) {
      const auto dir = report_dir.empty() ? default_output_dir() : std::filesystem::path(report_dir);
      const auto summary = build_summary(dir);
      for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
      const auto files = write_summary(dir, summary);
      std::cout << summary.text;
      for (const auto& f : files) std::cerr << f.string() << "\n";
      return kExitOk;
    }
    for (const auto& [kind, help] : kinds) {
      CLI::App* sub = subs[to_string(kind)];
      if (!sub->parsed()) continue;
      auto given = [&](const std::string& k) { return sub->get_option_no_throw("--" + k) && sub->count("--" + k) > 0; };
      for (const char* k : {"a", "b", "x0", "x1", "r1", "r2"})
        if (kind != ExperimentKind::reduce && given(k)) flags.domain_numbers[k] = numbers[k];
      for (const char* k : {"hbar", "mass"})
        if (given(k)) flags.units[k] = numbers[k];
      if (given("points")) flags.points = ints["points"];
      for (const char* k : {"lmax", "nmax", "mmax", "count"})
        if (given(k)) flags.basis[k] = ints[k];
      if (given("t")) flags.param_numbers["t"] = numbers["t"];
      if (kind == ExperimentKind::reduce) {
        if (given("a")) flags.param_numbers["a"] = numbers["a"];
        if (given("R")) flags.param_numbers["R"] = numbers["R"];
      }
      if (given("family")) flags.params["family"] = strings["family"];
      if (given("ladder")) flags.params["ladder"] = strings["ladder"];
      if (given("source")) flags.params["source"] = strings["source"];
      if (given("n-ladder")) flags.params["n_ladder"] = strings["n_ladder"];
      if (given("taus")) {
        const auto& v = strings["taus"];
        flags.params["taus"] = v;
        if (!v.empty() && v[0] == '[') flags.params.erase("taus"), flags.sets.push_back("/params/taus=" + v);
      }

      const ExperimentConfig cfg = parse_config(build_config(kind, flags));
      std::filesystem::create_directories(cfg.output);
      const RunResult result = run_experiment(cfg);
      const auto files = write_run(cfg, result);
      Json out{{"status", "ok"}, {"kind", to_string(kind)}, {"config_hash", cfg.hash}, {"files", Json::array()}};
      for (const auto& f : files) out["files"].push_back(f.string());
      std::cout << out.dump() << std::endl;
      return kExitOk;
    }
  } catch (...) {
    return emit_error();
  }
  return kExitFailure;
}
