#include "zeno_harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "zeno_harness/output.hpp"

namespace zeno::harness {

namespace {

std::string cell(const Json& v) {
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string render(const std::string& title, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream os;
  os << title << "\n";
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string& s = c < r.size() ? r[c] : std::string();
      os << (c ? "  " : "") << s << std::string(width[c] - s.size(), ' ');
    }
    os << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  os << "\n";
  return os.str();
}

/// Config identity with the N ladder removed, so ladders of one setup merge.
std::string ladder_group(const Json& config) {
  Json c = config;
  if (c.contains("params")) c["params"].erase("n_ladder");
  return config_hash(c);
}

}  // namespace

Summary build_summary(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "summary.json")
        files.push_back(e.path());
  std::sort(files.begin(), files.end());

  Summary s;
  std::vector<std::pair<std::string, Json>> envelopes;
  for (const auto& f : files) {
    Json j;
    try {
      j = load_json(f);
    } catch (const std::exception&) {
      s.warnings.push_back("skipped unreadable file " + f.filename().string());
      continue;
    }
    if (!j.is_object() || j.value("artifact", "") != kArtifactName || !j.contains("payload")) {
      s.warnings.push_back("skipped non-envelope " + f.filename().string());
      continue;
    }
    envelopes.emplace_back(f.filename().string(), std::move(j));
  }
  if (envelopes.empty()) throw ConfigError("no result envelopes in " + dir.string(), "/dir");

  std::set<std::string> versions;
  for (const auto& [name, e] : envelopes) versions.insert(e.value("version", "unknown"));
  if (versions.size() > 1) {
    std::string list;
    for (const auto& v : versions) list += (list.empty() ? "" : ", ") + v;
    s.warnings.push_back("mixed artifact versions: " + list);
  }

  Json runs = Json::array();
  for (const auto& [name, e] : envelopes) {
    Json r{{"file", name},
           {"kind", e["kind"]},
           {"version", e.value("version", "unknown")},
           {"config_hash", e.value("config_hash", "")},
           {"wall_seconds", e.value("wall_seconds", 0.0)},
           {"flags", e.value("flags", Json::object())}};
    r["payload"] = e["payload"];
    runs.push_back(std::move(r));
  }

  // Convergence rows keyed by (group, N); the first envelope in file order wins a tie.
  std::map<std::string, std::map<int, Json>> convergence;
  std::vector<std::vector<std::string>> fit_rows, limit_rows, offset_rows;
  Json fits = Json::array(), limits = Json::array(), offsets = Json::array();
  for (const auto& [name, e] : envelopes) {
    const std::string kind = e["kind"].get<std::string>();
    const std::string version = e.value("version", "unknown");
    const std::string hash = e.value("config_hash", "");
    const Json& p = e["payload"];
    auto add_fit = [&](const std::string& what, const Json& f) {
      if (!f.is_object() || !f.contains("slope")) return;
      fits.push_back({{"config_hash", hash}, {"kind", kind}, {"quantity", what}, {"slope", f["slope"]},
                      {"r2", f["r2"]}, {"version", version}});
      fit_rows.push_back({hash, kind, what, cell(f["slope"]), cell(f["r2"]), version});
    };
    if (kind == "zeno-run") {
      auto& group = convergence[ladder_group(e["config"])];
      for (const auto& pt : p.value("points", Json::array())) {
        Json row = pt;
        row["version"] = version;
        row["config_hash"] = hash;
        group.emplace(pt["N"].get<int>(), std::move(row));
      }
      add_fit("residual", p.value("residual_fit", Json()));
      add_fit("norm_loss", p.value("norm_loss_fit", Json()));
    } else if (kind == "short-time") {
      for (const auto& f : p.value("fits", Json::array()))
        add_fit(f.value("quantity", "") + "(" + f.value("m", "") + "," + f.value("n", "") + ")", f);
    } else if (kind == "leakage") {
      add_fit("leakage", p.value("leakage_fit", Json()));
    } else if (kind == "algebra-check") {
      add_fit("free_commutator", p.value("free_commutator_fit", Json()));
      add_fit("projector_error", p.value("projector_fit", Json()));
      add_fit("step_defect", p.value("step_defect_fit", Json()));
    } else if (kind == "reduce") {
      const std::string family = p.value("family", "");
      for (const auto& l : p.value("limits", Json::array())) {
        limits.push_back({{"config_hash", hash}, {"family", family}, {"label", l["label"]}, {"c0", l["c0"]},
                          {"target", l["target"]}, {"rms_residual", l["rms_residual"]}, {"version", version}});
        limit_rows.push_back({hash, family, cell(l["label"]), cell(l["c0"]), cell(l["target"]),
                              cell(l["rms_residual"]), version});
      }
      if (p.contains("offset")) {
        offsets.push_back({{"config_hash", hash}, {"family", family}, {"offset", p["offset"]},
                           {"expected", p["offset_expected"]}, {"tolerance", p["offset_tolerance"]},
                           {"version", version}});
        offset_rows.push_back({hash, family, cell(p["offset"]), cell(p["offset_expected"]),
                               cell(p["offset_tolerance"]), version});
      }
    }
  }

  Json conv = Json::array();
  std::vector<std::vector<std::string>> conv_rows;
  for (const auto& [group, rows] : convergence)
    for (const auto& [N, row] : rows) {
      Json r = row;
      r["group"] = group;
      conv.push_back(r);
      conv_rows.push_back({group, std::to_string(N), cell(row["fidelity"]), cell(row["residual"]), cell(row["phase"]),
                           cell(row["norm_loss"]), row["version"].get<std::string>()});
    }

  s.json = {{"artifact", kArtifactName},
            {"version", kArtifactVersion},
            {"schema", kSchemaVersion},
            {"envelopes", static_cast<int>(envelopes.size())},
            {"warnings", s.warnings},
            {"runs", runs},
            {"convergence", conv},
            {"fits", fits},
            {"limits", limits},
            {"offsets", offsets}};

  std::ostringstream os;
  os << kArtifactName << " " << kArtifactVersion << " summary of " << envelopes.size() << " envelope(s)\n\n";
  for (const auto& w : s.warnings) os << "warning: " << w << "\n";
  if (!s.warnings.empty()) os << "\n";
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : runs)
      rows.push_back({r["file"].get<std::string>(), r["kind"].get<std::string>(), r["version"].get<std::string>(),
                      cell(r["wall_seconds"])});
    os << render("runs", {"file", "kind", "version", "wall_seconds"}, rows);
  }
  if (!conv_rows.empty())
    os << render("convergence", {"group", "N", "fidelity", "residual", "phase", "norm_loss", "version"}, conv_rows);
  if (!fit_rows.empty()) os << render("fits", {"config", "kind", "quantity", "slope", "r2", "version"}, fit_rows);
  if (!limit_rows.empty())
    os << render("reduction limits", {"config", "family", "label", "c0", "target", "rms_residual", "version"},
                 limit_rows);
  if (!offset_rows.empty())
    os << render("reduction offsets", {"config", "family", "offset", "expected", "tolerance", "version"}, offset_rows);
  s.text = os.str();
  return s;
}

std::vector<std::filesystem::path> write_summary(const std::filesystem::path& dir, const Summary& summary) {
  const auto j = dir / "summary.json";
  const auto t = dir / "summary.txt";
  atomic_write(j, summary.json.dump(2) + "\n");
  atomic_write(t, summary.text);
  return {j, t};
}

}  // namespace zeno::harness
