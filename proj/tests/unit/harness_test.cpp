#include <gtest/gtest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "zeno/errors.hpp"
#include "zeno_harness/config.hpp"
#include "zeno_harness/output.hpp"
#include "zeno_harness/report.hpp"
#include "zeno_harness/runner.hpp"

using namespace zeno::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("zeno_harness_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string pointer_of(const Json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<no throw>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string body(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

Json annulus_spectrum() {
  return Json{{"kind", "spectrum"},
              {"domain", {{"type", "annulus"}, {"r1", 1.0}, {"r2", 2.0}}},
              {"params", {{"lmax", 3}, {"nmax", 5}}}};
}

Json interval_run(const std::string& ladder) {
  return Json{{"kind", "zeno-run"},
              {"domain", {{"type", "interval"}, {"x0", 0.0}, {"x1", 1.0}}},
              {"grid", {{"points", 64}}},
              {"params", {{"t", 0.05}, {"n_ladder", ladder}, {"nmax", 3}}}};
}

}  // namespace

TEST(Config, RejectsUnknownKeysWithPointer) {
  Json j = annulus_spectrum();
  j["domain"]["r3"] = 1.0;
  EXPECT_EQ(pointer_of(j), "/domain/r3");
  j = annulus_spectrum();
  j["params"]["bogus"] = 1;
  EXPECT_EQ(pointer_of(j), "/params/bogus");
  j = annulus_spectrum();
  j["extra"] = true;
  EXPECT_EQ(pointer_of(j), "/extra");
}

TEST(Config, TypeErrorsAndKinds) {
  Json j = annulus_spectrum();
  j["domain"]["r1"] = "one";
  EXPECT_EQ(pointer_of(j), "/domain/r1");
  j = annulus_spectrum();
  j["kind"] = "nope";
  EXPECT_EQ(pointer_of(j), "/kind");
  EXPECT_EQ(pointer_of(Json{{"kind", "reduce"}, {"params", {{"family", "torus"}}}}), "/params/family");
  EXPECT_EQ(pointer_of(Json{{"kind", "algebra-check"}, {"domain", {{"type", "interval"}}}}), "/domain");
}

TEST(Config, DefaultsAndHash) {
  const auto a = parse_config(interval_run("1:8"));
  EXPECT_EQ(a.raw["units"]["hbar"], 1.0);
  EXPECT_EQ(a.hash.size(), 16u);
  Json j = interval_run("1:8");
  j["output"] = "/somewhere/else";
  j["jobs"] = 4;
  j["dat"] = true;
  EXPECT_EQ(parse_config(j).hash, a.hash);
  EXPECT_NE(parse_config(interval_run("1:9")).hash, a.hash);
}

TEST(Config, LadderParsing) {
  EXPECT_EQ(parse_int_ladder("1:4", ""), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(parse_int_ladder("2:11:3", ""), (std::vector<int>{2, 5, 8, 11}));
  EXPECT_EQ(parse_int_ladder("4:256:x2", ""), (std::vector<int>{4, 8, 16, 32, 64, 128, 256}));
  EXPECT_EQ(parse_int_ladder(Json::array({3, 1}), ""), (std::vector<int>{3, 1}));
  EXPECT_THROW(parse_int_ladder("0:4", "/p"), ConfigError);
  EXPECT_THROW(parse_int_ladder("a:b", "/p"), ConfigError);
  const auto r = parse_real_ladder("log:1e-4:1e-2:3", "");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[1], 1e-3, 1e-18);
  EXPECT_THROW(parse_real_ladder("lin:1:2:3", "/p"), ConfigError);
}

TEST(Config, FieldPointer) {
  EXPECT_EQ(field_pointer("domain.r1"), "/domain/r1");
  EXPECT_EQ(field_pointer("t"), "/params/t");
  EXPECT_EQ(field_pointer(""), "");
}

TEST(Output, NumbersRoundTripRandom) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> e(-300, 300);
  for (int k = 0; k < 5000; ++k) {
    const double v = std::pow(10.0, e(rng)) * ((rng() & 1) ? 1 : -1);
    const std::string s = format_number(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
    EXPECT_EQ(s.find(','), std::string::npos);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Output, CsvCarriesHashAndHeader) {
  CsvTable t("x", {"a", "b"});
  t.add({1, 2.5});
  t.add({std::string("s"), true});
  EXPECT_EQ(t.csv("abc"), "# config_hash=abc\na,b\n1,2.5\ns,1\n");
  EXPECT_NE(t.dat("abc").find("# a b"), std::string::npos);
  EXPECT_THROW(t.add({1}), std::exception);
}

TEST(Runner, AnnulusSpectrumHasTwentySortedRows) {
  auto cfg = parse_config(annulus_spectrum());
  cfg.output = fresh_dir("spectrum");
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.tables.size(), 1u);
  const auto& rows = r.tables[0].rows();
  ASSERT_EQ(rows.size(), 20u);
  EXPECT_EQ(r.tables[0].header(), (std::vector<std::string>{"l", "n", "k", "energy"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i - 1][3]), std::stod(rows[i][3]));
  const auto files = write_run(cfg, r);
  ASSERT_EQ(files.size(), 2u);
  for (const auto& f : files) EXPECT_NE(slurp(f).find(cfg.hash), std::string::npos);
}

TEST(Runner, RerunsAreByteIdentical) {
  auto a = parse_config(interval_run("1:6"));
  a.output = fresh_dir("det_a");
  auto b = a;
  b.output = fresh_dir("det_b");
  b.jobs = 3;
  const auto fa = write_run(a, run_experiment(a));
  const auto fb = write_run(b, run_experiment(b));
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 1; i < fa.size(); ++i) EXPECT_EQ(body(slurp(fa[i])), body(slurp(fb[i]))) << fa[i];
}

TEST(Runner, ShellGridExperimentsAreRejected) {
  Json j{{"kind", "zeno-run"}, {"domain", {{"type", "shell"}, {"r1", 1.0}, {"r2", 2.0}}}};
  auto cfg = parse_config(j);
  try {
    run_experiment(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/domain/type");
  }
}

TEST(Runner, ExceptionsMapToExitCodes) {
  auto code = [](auto thrower) {
    try {
      thrower();
    } catch (...) {
      return describe_current_exception();
    }
    return std::pair<int, Json>{0, Json()};
  };
  const auto v = code([] { throw zeno::StructuralError("bad", "domain.r1"); });
  EXPECT_EQ(v.first, kExitValidation);
  EXPECT_EQ(v.second["error"]["pointer"], "/domain/r1");
  EXPECT_EQ(code([] { throw zeno::NumericalError("nan"); }).first, kExitNumerical);
  EXPECT_EQ(code([] { throw zeno::GuardViolation("wrap"); }).first, kExitGuard);
  EXPECT_EQ(code([] { throw std::runtime_error("x"); }).first, kExitFailure);
}

TEST(Report, MergesLaddersSortedByN) {
  const auto dir = fresh_dir("report");
  for (const char* ladder : {"4:6", "1:3"}) {
    auto cfg = parse_config(interval_run(ladder));
    cfg.output = dir;
    write_run(cfg, run_experiment(cfg));
  }
  const auto s = build_summary(dir);
  EXPECT_TRUE(s.warnings.empty());
  const auto& conv = s.json["convergence"];
  ASSERT_EQ(conv.size(), 6u);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(conv[static_cast<std::size_t>(k)]["N"], k + 1);
  EXPECT_EQ(conv[0]["group"], conv[5]["group"]);
  write_summary(dir, s);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_EQ(build_summary(dir).json["envelopes"], 2);  // summary.json is not an envelope
}

TEST(Report, SingleEnvelopeKeepsPayloadAndWarnsOnMixedVersions) {
  const auto dir = fresh_dir("report_single");
  auto cfg = parse_config(annulus_spectrum());
  cfg.output = dir;
  const auto r = run_experiment(cfg);
  const auto files = write_run(cfg, r);
  auto s = build_summary(dir);
  ASSERT_EQ(s.json["runs"].size(), 1u);
  EXPECT_EQ(s.json["runs"][0]["payload"], r.payload);
  EXPECT_EQ(s.json["runs"][0]["config_hash"], cfg.hash);

  Json env = load_json(files[0]);
  env["version"] = "0.0.9";
  std::ofstream(dir / "old.json") << env.dump();
  s = build_summary(dir);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("mixed artifact versions"), std::string::npos);
  EXPECT_NE(s.text.find("0.0.9"), std::string::npos);
}

TEST(Report, EmptyDirectoryIsAnError) { EXPECT_THROW(build_summary(fresh_dir("empty")), ConfigError); }

TEST(Report, ReductionLimitsAppear) {
  const auto dir = fresh_dir("report_reduce");
  auto cfg = parse_config(Json{{"kind", "reduce"}, {"params", {{"family", "annulus-to-circle"}}}});
  cfg.output = dir;
  write_run(cfg, run_experiment(cfg));
  const auto s = build_summary(dir);
  EXPECT_EQ(s.json["limits"].size(), 4u);
  ASSERT_EQ(s.json["offsets"].size(), 1u);
  EXPECT_NEAR(s.json["offsets"][0]["offset"].get<double>(), -0.125, 1e-4);
}
