// Copyright 2026 The fairmiss Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fairmiss command-line tool.
//
// Exit codes:
//   0  success
//   2  I/O, parse, schema or configuration error
//   3  a protected group is empty
//   4  the MCAR test is undefined (no usable missing values)
//   5  more than the allowed fraction of repetitions was discarded
//   1  unexpected internal failure
//
// Results go to stdout; every diagnostic goes to stderr.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairmiss/digest.hpp"
#include "fairmiss/fairmiss.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fairmiss::cli {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 1;
  std::string out_dir;
  std::string format;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyGroup: return 3;
    case ErrorCode::kNoMissingValues:
    case ErrorCode::kInsufficientPatternSize: return 4;
    case ErrorCode::kRegimeEmpty: return 5;
    default: return 2;
  }
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string opt_fixed(const std::optional<double>& v) { return v ? fixed(*v) : "n/a"; }

fs::path schema_for(const std::string& csv, const std::string& schema) {
  if (!schema.empty()) return schema;
  fs::path p(csv);
  p.replace_extension(".schema.json");
  return p;
}

Dataset load(const std::string& csv, const std::string& schema) {
  return load_csv_file(csv, Schema::from_file(schema_for(csv, schema).string()));
}

/// A group argument is either a JSON file or the name of one under
/// `<data_dir>/groups`.
std::pair<std::string, GroupSpec> load_group(const std::string& arg, const fs::path& data_dir) {
  fs::path p(arg);
  if (!fs::exists(p)) p = data_dir / "groups" / (arg + ".json");
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIo, "cannot open group config '" + arg + "'");
  try {
    return {p.stem().string(), json::parse(in).get<GroupSpec>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, "group config '" + p.string() + "': " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_file(path, text);
}

/// Warns when a dataset listed in a neighbouring SHA256SUMS does not match.
json digest_status(const std::string& csv) {
  const auto expected = listed_digest(csv);
  if (!expected) return json{{"listed", false}};
  const auto actual = sha256_file(csv);
  if (actual != *expected) {
    std::cerr << "warning: " << csv << " does not match its SHA256SUMS entry; published figures may not apply\n";
  }
  return json{{"listed", true}, {"verified", actual == *expected}, {"sha256", actual}};
}

// inspect ------------------------------------------------------------------

int cmd_inspect(const Globals& g, const std::string& csv, const std::string& schema) {
  const Dataset d = load(csv, schema);
  const auto fractions = missing_fraction_per_column(d);
  const auto patterns = pattern_table(d);
  const auto flags = rows_with_missing(d);
  const auto incomplete = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1));
  json j{{"schema_version", "fairmiss.inspect/1"},
         {"dataset", csv},
         {"rows", d.n_rows()},
         {"columns", d.n_columns()},
         {"label", d.label_name() ? json(*d.label_name()) : json()},
         {"rows_with_missing", incomplete},
         {"missing_cells", d.missing_cell_count()},
         {"missing_fraction", json::array()},
         {"patterns", patterns}};
  for (const auto& f : fractions) j["missing_fraction"].push_back({{"column", f.column}, {"fraction", f.fraction}});

  const std::string format = g.format.empty() ? "text" : g.format;
  if (format == "json") {
    std::cout << j.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << pattern_table_csv(patterns);
  } else {
    std::cout << "rows: " << d.n_rows() << "\ncolumns: " << d.n_columns() << "\nrows with missing values: "
              << incomplete << "\n\nmissing fraction per column:\n";
    for (const auto& f : fractions) std::cout << "  " << f.column << ": " << fixed(100.0 * f.fraction, 2) << "%\n";
    std::cout << "\nmissingness patterns (1 = missing):\n  ";
    for (const auto& c : patterns.columns) std::cout << c << " ";
    std::cout << "\n";
    for (const auto& row : patterns.rows) {
      std::cout << "  ";
      for (auto m : row.pattern) std::cout << int(m) << " ";
      std::cout << " n=" << row.count << " (" << fixed(100.0 * row.fraction, 2) << "%)\n";
    }
  }
  if (!g.out_dir.empty()) {
    write_file(fs::path(g.out_dir) / "inspect.json", j.dump(2) + "\n");
    write_file(fs::path(g.out_dir) / "patterns.csv", pattern_table_csv(patterns));
  }
  return 0;
}

// audit --------------------------------------------------------------------

std::optional<FairnessReport> subset_audit(const Dataset& d, const GroupSpec& g) {
  try {
    return audit_dataset(d, g);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyGroup) throw;
    return std::nullopt;
  }
}

json report_or_null(const std::optional<FairnessReport>& r) { return r ? json(*r) : json(); }

int cmd_audit(const Globals& g, const std::string& csv, const std::string& schema,
              const std::vector<std::string>& groups, const fs::path& data_dir) {
  const Dataset d = load(csv, schema);
  const auto subsets = split_by_missingness(d);
  json j{{"schema_version", "fairmiss.audit/1"},
         {"dataset", csv},
         {"digest", digest_status(csv)},
         {"rows", {{"all", d.n_rows()}, {"with_missing", subsets.with_missing.n_rows()},
                   {"without_missing", subsets.without_missing.n_rows()}}},
         {"cases", json::array()}};
  std::ostringstream md;
  md << "| case | SPD all | SPD with ⊙ | SPD w/o ⊙ | DI all | P(+|priv) | P(+|unpriv) |\n"
        "|---|---|---|---|---|---|---|\n";
  for (const auto& arg : groups) {
    const auto [id, spec] = load_group(arg, data_dir);
    const FairnessReport all = audit_dataset(d, spec);  // empty group here is fatal
    const auto with = subset_audit(subsets.with_missing, spec);
    const auto without = subset_audit(subsets.without_missing, spec);
    const std::array<std::optional<double>, 3> spds{
        all.spd, with ? std::optional(with->spd) : std::nullopt, without ? std::optional(without->spd) : std::nullopt};
    std::size_t fairest = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (spds[k] && std::fabs(*spds[k]) < std::fabs(*spds[fairest])) fairest = k;
    }
    static constexpr const char* kNames[] = {"all", "with_missing", "without_missing"};
    j["cases"].push_back({{"id", id},
                          {"group", spec},
                          {"all", all},
                          {"with_missing", report_or_null(with)},
                          {"without_missing", report_or_null(without)},
                          {"fairest", kNames[fairest]}});
    md << "| " << id;
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string cell = opt_fixed(spds[k]);
      md << " | " << (k == fairest ? "**" + cell + "**" : cell);
    }
    md << " | " << opt_fixed(all.di) << " | " << fixed(all.group_positive_rates.first) << " | "
       << fixed(all.group_positive_rates.second) << " |\n";
  }
  const std::string format = g.format.empty() ? "markdown" : g.format;
  if (format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << md.str();
  }
  if (!g.out_dir.empty()) {
    write_file(fs::path(g.out_dir) / "audit.json", j.dump(2) + "\n");
    write_file(fs::path(g.out_dir) / "audit.md", md.str());
  }
  return 0;
}

// mcar ---------------------------------------------------------------------

int cmd_mcar(const Globals& g, const std::string& csv, const std::string& schema, const std::string& encoding) {
  const Dataset d = load(csv, schema);
  const auto result = little_mcar_test(d, parse_encoding(encoding));
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  json j = result;
  j["schema_version"] = "fairmiss.mcar/1";
  j["dataset"] = csv;
  j["encoding"] = encoding;
  const auto patterns = pattern_table(d);
  if (g.format == "csv") {
    std::cout << pattern_table_csv(patterns);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  if (!g.out_dir.empty()) {
    write_file(fs::path(g.out_dir) / "mcar.json", j.dump(2) + "\n");
    write_file(fs::path(g.out_dir) / "patterns.csv", pattern_table_csv(patterns));
  }
  return 0;
}

// octagon ------------------------------------------------------------------

int cmd_octagon(const Globals& g, const std::string& csv, const std::string& schema, const std::string& group,
                const fs::path& data_dir) {
  const Dataset d = load(csv, schema);
  const auto [id, spec] = load_group(group, data_dir);
  const DatasetStats s = dataset_stats(d, spec);
  const OctagonSpec o = octagon_vertices(s);
  const BaselinePoints b = baseline_points(s);
  if (o.degenerate) std::cerr << "warning: octagon is degenerate (some vertices coincide)\n";
  json j{{"schema_version", "fairmiss.octagon/1"},
         {"dataset", csv},
         {"group", spec},
         {"stats", s},
         {"octagon", o},
         {"baselines", {{"majority", b.majority}, {"perfect", b.perfect}}}};
  // Closed polygon trace for plotting tools.
  std::ostringstream trace;
  trace << std::setprecision(17) << "vertex,accuracy,spd\n";
  for (std::size_t v = 0; v <= o.vertices.size(); ++v) {
    const auto& p = o.vertices[v % o.vertices.size()];
    trace << "v" << (v % o.vertices.size()) + 1 << "," << p.accuracy << "," << p.spd << "\n";
  }
  if (g.format == "csv") {
    std::cout << trace.str();
  } else {
    std::cout << j.dump(2) << "\n";
  }
  if (!g.out_dir.empty()) {
    write_file(fs::path(g.out_dir) / "octagon.csv", trace.str());
    write_file(fs::path(g.out_dir) / "octagon.json", j.dump(2) + "\n");
  }
  return 0;
}

// experiment ---------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::string data_dir;
  std::size_t repetitions = 0;  // 0 keeps the file value
};

int cmd_experiment(const Globals& g, const ExperimentArgs& a, const std::vector<std::string>& argv,
                   const fs::path& default_data_dir) {
  std::ifstream in(a.config, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + a.config + "'");
  const std::string config_text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json raw;
  try {
    raw = json::parse(config_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, "config '" + a.config + "': " + e.what());
  }
  if (!raw.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
  const fs::path config_dir = fs::absolute(a.config).parent_path();
  auto relative_to_config = [&](const std::string& p) { return fs::weakly_canonical(config_dir / p); };

  // Precedence: flags, then the file, then built-in defaults.
  fs::path data_dir = default_data_dir;
  if (raw.contains("data_dir")) data_dir = relative_to_config(raw.at("data_dir").get<std::string>());
  if (!a.data_dir.empty()) data_dir = fs::absolute(a.data_dir);
  if (raw.contains("csv")) raw["csv"] = relative_to_config(raw.at("csv").get<std::string>()).string();
  if (raw.contains("schema")) raw["schema"] = relative_to_config(raw.at("schema").get<std::string>()).string();
  raw.erase("data_dir");

  ExperimentConfig cfg = parse_experiment_config(raw, data_dir / "groups");
  if (g.seed_set) cfg.master_seed = g.seed;
  if (a.repetitions > 0) cfg.repetitions = a.repetitions;
  const DatasetPaths paths = dataset_paths(cfg, data_dir);
  // Pin the dataset to absolute paths so the run directory's config.json
  // re-executes the same run from anywhere.
  cfg.csv = fs::weakly_canonical(paths.csv).string();
  cfg.schema = fs::weakly_canonical(paths.schema).string();
  cfg.validate();

  const fs::path run_dir = g.out_dir.empty() ? fs::path("runs") / cfg.name : fs::path(g.out_dir);
  fs::create_directories(run_dir);
  const std::string resolved = json(cfg).dump(2) + "\n";
  write_file(run_dir / "config.json", resolved);

  json manifest{{"schema_version", "fairmiss.manifest/1"},
                {"tool_version", kVersion},
                {"command_line", argv},
                {"config_path", fs::absolute(a.config).string()},
                {"config_sha256", sha256_hex(config_text)},
                {"resolved_config", "config.json"},
                {"resolved_config_sha256", sha256_hex(resolved)},
                {"datasets",
                 json::array({{{"csv", cfg.csv},
                               {"csv_sha256", sha256_file(cfg.csv)},
                               {"schema", cfg.schema},
                               {"schema_sha256", sha256_file(cfg.schema)}}})},
                {"master_seed", cfg.master_seed},
                {"threads", g.threads},
                {"rerun", "fairmiss experiment --config config.json --out-dir <dir>"},
                {"started_at", utc_now()},
                {"status", "running"}};
  write_file(run_dir / "manifest.json", manifest.dump(2) + "\n");

  auto finalize = [&](const std::string& status, int code, const std::string& message) {
    manifest["status"] = status;
    manifest["exit_code"] = code;
    manifest["finished_at"] = utc_now();
    if (!message.empty()) manifest["error"] = message;
    json outputs = json::object();
    for (const char* f : {"report.json", "report.md", "points.csv", "octagon.csv"}) {
      if (fs::exists(run_dir / f)) outputs[f] = sha256_file(run_dir / f);
    }
    manifest["outputs"] = outputs;
    write_file(run_dir / "manifest.json", manifest.dump(2) + "\n");
  };

  try {
    const Dataset data = load_dataset(paths);
    std::cerr << "running " << cfg.repetitions << " repetitions of the " << to_string(cfg.protocol)
              << " protocol on " << cfg.csv << " (" << data.n_rows() << " rows, " << g.threads << " threads)\n";
    const ExperimentReport report = run_experiment(cfg, data, g.threads);
    for (const auto& d : report.discarded) std::cerr << "discarded repetition " << d.repetition << ": " << d.reason << "\n";
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    write_report_files(report, run_dir);
    finalize("complete", 0, "");
    const std::string format = g.format.empty() ? "markdown" : g.format;
    if (format == "json") {
      std::cout << report_json_text(report);
    } else if (format == "csv") {
      std::cout << report_points_csv(report);
    } else {
      std::cout << report_markdown(report);
    }
    std::cerr << "wrote " << run_dir.string() << "\n";
    return 0;
  } catch (const Error& e) {
    finalize("failed", exit_code_for(e.code()), e.what());
    throw;
  }
}

}  // namespace fairmiss::cli

int main(int argc, char** argv) {
  using namespace fairmiss;
  using namespace fairmiss::cli;
  CLI::App app{"Audit how missing data interacts with group fairness."};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Globals g;
  auto* seed = app.add_option("--seed", g.seed, "Master seed (overrides the config file)");
  app.add_option("--threads", g.threads, "Worker threads for repetitions")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for written artifacts");
  app.add_option("--format", g.format, "Stdout format")->check(CLI::IsMember({"text", "json", "markdown", "csv"}));
  std::string data_dir_flag;
  app.add_option("--data-dir", data_dir_flag, "Directory holding datasets and groups/");

  std::string csv, schema, encoding = "ordinal", octagon_group;
  std::vector<std::string> groups;
  ExperimentArgs ex;

  auto* inspect = app.add_subcommand("inspect", "Row/column counts, missing fractions and patterns");
  inspect->add_option("dataset", csv, "CSV file")->required();
  inspect->add_option("--schema", schema, "Schema JSON (default: <dataset>.schema.json)");

  auto* audit = app.add_subcommand("audit", "SPD over all rows, rows with and rows without missing values");
  audit->add_option("dataset", csv, "CSV file")->required();
  audit->add_option("--schema", schema, "Schema JSON");
  audit->add_option("--group", groups, "Group config file or name (repeatable)")->required();

  auto* mcar = app.add_subcommand("mcar", "Little's MCAR test");
  mcar->add_option("dataset", csv, "CSV file")->required();
  mcar->add_option("--schema", schema, "Schema JSON");
  mcar->add_option("--encoding", encoding, "Categorical encoding")->check(CLI::IsMember({"ordinal", "onehot"}));

  auto* octagon = app.add_subcommand("octagon", "Feasible SPD-accuracy octagon and baselines");
  octagon->add_option("dataset", csv, "CSV file")->required();
  octagon->add_option("--schema", schema, "Schema JSON");
  octagon->add_option("--group", octagon_group, "Group config file or name")->required();

  auto* experiment = app.add_subcommand("experiment", "Run a configured experiment protocol");
  experiment->add_option("--config", ex.config, "Experiment config JSON")->required();
  experiment->add_option("--repetitions", ex.repetitions, "Override the repetition count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, std::cerr, std::cerr);
    return rc == 0 ? 0 : 2;
  }
  g.seed_set = seed->count() > 0;
  const fs::path data_dir = data_dir_flag.empty() ? fs::path(FAIRMISS_DEFAULT_DATA_DIR) : fs::path(data_dir_flag);
  ex.data_dir = data_dir_flag;

  try {
    if (*inspect) return cmd_inspect(g, csv, schema);
    if (*audit) return cmd_audit(g, csv, schema, groups, data_dir);
    if (*mcar) return cmd_mcar(g, csv, schema, encoding);
    if (*octagon) return cmd_octagon(g, csv, schema, octagon_group, data_dir);
    if (*experiment) return cmd_experiment(g, ex, std::vector<std::string>(argv, argv + argc), data_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
