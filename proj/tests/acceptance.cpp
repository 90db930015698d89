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

// Acceptance run: prints one PASS/FAIL line per criterion on stdout and
// details on stderr. Exits non-zero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fairmiss/digest.hpp"
#include "fairmiss/fairmiss.hpp"

namespace fs = std::filesystem;
using namespace fairmiss;

namespace {

const fs::path kData = FAIRMISS_DATA_DIR;

std::size_t worker_count() { return std::max(2u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Dataset load(const std::string& name) {
  return load_csv_file((kData / (name + ".csv")).string(), Schema::from_file((kData / (name + ".schema.json")).string()));
}

GroupSpec group(const std::string& name) {
  std::ifstream in(kData / "groups" / (name + ".json"));
  return nlohmann::json::parse(in).get<GroupSpec>();
}

struct Case {
  std::string dataset;
  std::string group;
  std::array<double, 3> spd;  // all, with missing, without missing
};

// Published audit values.
const std::vector<Case> kPublishedAudit{{"adult", "adult_race", {0.1014, 0.0361, 0.1040}},
                                {"adult", "adult_sex", {0.1945, 0.1117, 0.1989}},
                                {"compas", "compas_race", {0.0864, 0.0716, 0.0920}},
                                {"compas", "compas_sex", {0.1161, 0.0243, 0.1186}},
                                {"titanic", "titanic_class", {0.3149, 0.2722, 0.3115}},
                                {"titanic", "titanic_sex", {0.5365, 0.4727, 0.5458}}};

const std::map<std::string, std::size_t> kRows{{"adult", 48842}, {"compas", 7214}, {"titanic", 1309}};

Outcome published_audit() {
  Stopwatch clock;
  std::size_t within = 0, bold = 0;
  double worst = 0.0;
  std::map<std::string, Dataset> cache;
  bool rows_ok = true;
  for (const auto& c : kPublishedAudit) {
    if (!cache.contains(c.dataset)) cache.emplace(c.dataset, load(c.dataset));
    const Dataset& d = cache.at(c.dataset);
    rows_ok = rows_ok && d.n_rows() == kRows.at(c.dataset);
    const auto parts = split_by_missingness(d);
    const GroupSpec g = group(c.group);
    const std::array<double, 3> got{audit_dataset(d, g).spd, audit_dataset(parts.with_missing, g).spd,
                                    audit_dataset(parts.without_missing, g).spd};
    for (std::size_t k = 0; k < 3; ++k) {
      const double err = std::fabs(got[k] - c.spd[k]);
      worst = std::max(worst, err);
      within += err <= 0.01 ? 1 : 0;
    }
    const bool with_fairest = std::fabs(got[1]) < std::fabs(got[0]) && std::fabs(got[1]) < std::fabs(got[2]);
    bold += with_fairest ? 1 : 0;
    std::cerr << "  " << c.group << ": " << got[0] << " " << got[1] << " " << got[2] << "\n";
  }
  const double secs = clock.seconds();
  std::ostringstream os;
  os << within << "/18 cells within 0.01 (max err " << worst << "), with-missing fairest in " << bold
     << "/6, row counts " << (rows_ok ? "match" : "differ") << ", " << secs << " s";
  return {within == 18 && bold == 6 && rows_ok && secs < 10.0, os.str()};
}

// Independent oracle: every labelling's (accuracy, SPD) by direct counting.
Outcome octagon_oracle() {
  Stopwatch clock;
  Rng rng(20260101);
  std::size_t ok = 0, datasets = 0;
  while (datasets < 200) {
    const std::size_t n = 2 + rng.below(11);
    std::vector<int> priv(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      priv[i] = rng.uniform() < 0.5;
      y[i] = rng.uniform() < 0.6;
    }
    priv[0] = 1;
    priv[1] = 0;
    int pos = 0;
    for (int v : y) pos += v;
    if (2 * pos < static_cast<int>(n)) continue;  // favourable class must be the majority
    ++datasets;
    DatasetStats s;
    for (std::size_t i = 0; i < n; ++i) {
      (priv[i] ? (y[i] ? s.pos_priv : s.neg_priv) : (y[i] ? s.pos_unpriv : s.neg_unpriv)) += 1;
    }
    const OctagonSpec o = octagon_vertices(s);
    std::vector<std::pair<double, double>> pts;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
      double correct = 0, pp = 0, pu = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const int pred = (mask >> i) & 1U;
        correct += pred == y[i];
        (priv[i] ? pp : pu) += pred;
      }
      pts.emplace_back(correct / static_cast<double>(n),
                       pp / static_cast<double>(s.n_priv()) - pu / static_cast<double>(s.n_unpriv()));
    }
    bool inside = true;
    for (const auto& [acc, spd] : pts) {
      for (std::size_t v = 0; v < 8; ++v) {
        const auto& a = o.vertices[v];
        const auto& b = o.vertices[(v + 1) % 8];
        const double ex = b.spd - a.spd, ey = b.accuracy - a.accuracy;
        const double len = std::hypot(ex, ey);
        if (len == 0.0) continue;
        // Counter-clockwise with SPD on x: inside is to the left of each edge.
        if ((ex * (acc - a.accuracy) - ey * (spd - a.spd)) / len < -1e-9) inside = false;
      }
    }
    bool attained = true;
    for (const auto& v : o.vertices) {
      bool hit = false;
      for (const auto& [acc, spd] : pts) hit = hit || (std::fabs(acc - v.accuracy) <= 1e-12 && std::fabs(spd - v.spd) <= 1e-12);
      attained = attained && hit;
    }
    ok += inside && attained ? 1 : 0;
  }
  const double secs = clock.seconds();
  std::ostringstream os;
  os << ok << "/200 datasets contained and attained, " << secs << " s";
  return {ok == 200 && secs < 60.0, os.str()};
}

Outcome worked_example_vertices() {
  const OctagonSpec o = octagon_vertices(DatasetStats{24, 6, 35, 35});
  const std::array<std::pair<double, double>, 8> expected{
      {{1, 0.3}, {0.76, -0.5}, {0.41, -1}, {0.06, -0.5}, {0, -0.3}, {0.24, 0.5}, {0.59, 1}, {0.94, 0.5}}};
  double worst = 0;
  for (std::size_t v = 0; v < 8; ++v) {
    worst = std::max({worst, std::fabs(o.vertices[v].accuracy - expected[v].first),
                      std::fabs(o.vertices[v].spd - expected[v].second)});
  }
  std::ostringstream os;
  os << "max deviation " << worst;
  return {worst <= 1e-12, os.str()};
}

Outcome antisymmetry() {
  Rng rng(4242);
  std::size_t ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(200);
    std::vector<std::string> groups(n), labels(n);
    const double pp = rng.uniform(), py = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      groups[i] = rng.uniform() < pp ? "a" : "b";
      labels[i] = rng.uniform() < py ? "1" : "0";
    }
    groups[0] = "a";
    groups[1] = "b";
    std::vector<Column> cols;
    cols.push_back(Column::categorical_from_strings("group", groups));
    cols.push_back(Column::categorical_from_strings("y", labels, {}, Levels{"0", "1"}));
    const Dataset d(std::move(cols), std::string("y"));
    const GroupSpec g{"group", {"a"}, "1"};
    const double base = spd(true_labels(d), d, g);
    const bool fav = spd(true_labels(d), d, GroupSpec{"group", {"a"}, "0"}) == -base;
    const bool grp = spd(true_labels(d), d, g.swapped_groups(d)) == -base;
    bool constant = true;
    for (std::int32_t c : {0, 1}) {
      const std::vector<std::int32_t> pred(n, c);
      constant = constant && spd(pred, d, g) == 0.0;
    }
    ok += fav && grp && constant ? 1 : 0;
  }
  std::ostringstream os;
  os << ok << "/1000 fixtures exact";
  return {ok == 1000, os.str()};
}

Outcome mcar() {
  Stopwatch clock;
  bool real_ok = true;
  std::ostringstream os;
  for (const char* name : {"adult", "compas", "titanic"}) {
    const auto r = little_mcar_test(load(name), CategoricalEncoding::kOrdinal);
    real_ok = real_ok && r.p_value < 0.001;
    os << name << " p=" << r.p_value << ", ";
  }
  Rng rng(777);
  std::size_t rejections = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd x(2000, 5);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double shared = 0.0;
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        if (j == 0) shared = z;
        x(i, j) = 0.6 * shared + z;
      }
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (rng.uniform() < 0.1) x(i, j) = std::numeric_limits<double>::quiet_NaN();
      }
    }
    rejections += little_mcar_test(x).p_value < 0.05 ? 1 : 0;
  }
  const double rate = static_cast<double>(rejections) / trials;
  const double secs = clock.seconds();
  os << "synthetic rejection rate " << rate << ", " << secs << " s";
  return {real_ok && rate >= 0.01 && rate <= 0.12 && secs < 300.0, os.str()};
}

ExperimentConfig config_for(const std::string& dataset, const std::string& protocol, std::size_t reps,
                            const nlohmann::json& models) {
  const std::map<std::string, std::vector<std::string>> groups{{"adult", {"adult_race", "adult_sex"}},
                                                               {"compas", {"compas_race", "compas_sex"}},
                                                               {"titanic", {"titanic_class", "titanic_sex"}}};
  const nlohmann::json j{{"name", protocol + "_" + dataset}, {"dataset", dataset},
                         {"groups", groups.at(dataset)},     {"protocol", protocol},
                         {"models", models},                 {"repetitions", reps},
                         {"master_seed", 2026}};
  return parse_experiment_config(j, kData / "groups");
}

Outcome subset_pattern() {
  Stopwatch clock;
  std::size_t lower = 0;
  std::ostringstream os;
  bool acc_ok = true;
  const std::map<std::string, double> published{{"adult", 0.8504}, {"titanic", 0.7819}};
  for (const char* name : {"adult", "compas", "titanic"}) {
    const auto cfg = config_for(name, "subset", 100, nlohmann::json::array({{{"kind", "cart"}}}));
    const auto r = run_experiment(cfg, load(name), worker_count());
    for (const auto& g : r.groups) {
      double with = 0, without = 0, all_acc = 0;
      for (const auto& res : g.results) {
        if (res.regime == "with_miss") with = res.spd_mean;
        if (res.regime == "without_miss") without = res.spd_mean;
        if (res.regime == "all_rows") all_acc = res.accuracy_mean;
      }
      lower += std::fabs(with) < std::fabs(without) ? 1 : 0;
      std::cerr << "  " << g.id << ": acc " << all_acc << ", spd with " << with << ", without " << without << "\n";
      if (published.contains(name)) acc_ok = acc_ok && std::fabs(all_acc - published.at(name)) <= 0.03;
    }
  }
  const double secs = clock.seconds();
  os << "|SPD with| < |SPD without| in " << lower << "/6 cases, accuracy bands " << (acc_ok ? "met" : "missed")
     << ", " << secs << " s";
  return {lower >= 5 && acc_ok && secs < 900.0, os.str()};
}

Outcome imputation_direction() {
  Stopwatch clock;
  std::size_t cells = 0, good = 0;
  bool baselines = true;
  const nlohmann::json models = nlohmann::json::array(
      {{{"kind", "cart"}}, {{"kind", "logistic"}}, {{"kind", "naive_bayes"}}, {{"kind", "forest"}, {"n_trees", 50}}});
  for (const char* name : {"adult", "compas", "titanic"}) {
    const auto r = run_experiment(config_for(name, "imputation", 10, models), load(name), worker_count());
    for (const auto& g : r.groups) {
      for (const auto& b : g.baselines) baselines = baselines && b.matches_closed_form;
      for (const std::string model : {"cart", "logistic", "naive_bayes", "forest"}) {
        double imp = 0, del = 0;
        for (const auto& res : g.results) {
          if (res.model != model) continue;
          (res.regime == "imputation" ? imp : del) = res.accuracy_mean;
        }
        ++cells;
        good += imp >= del - 0.005 ? 1 : 0;
        std::cerr << "  " << g.id << "/" << model << ": imputation " << imp << ", deletion " << del << "\n";
      }
    }
  }
  std::ostringstream os;
  os << good << "/" << cells << " cells with imputation >= deletion - 0.005, baselines "
     << (baselines ? "exact" : "inexact") << ", " << clock.seconds() << " s";
  return {4 * good >= 3 * cells && baselines, os.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Outcome determinism() {
  std::ostringstream os;
  // Library level: 1 versus N workers on every protocol.
  bool same = true;
  const nlohmann::json models =
      nlohmann::json::array({{{"kind", "cart"}}, {{"kind", "naive_bayes"}}, {{"kind", "forest"}, {"n_trees", 10}}});
  for (const char* protocol : {"columns", "imputation"}) {
    const auto cfg = config_for("titanic", protocol, 8, models);
    same = same && report_json_text(run_experiment(cfg, load("titanic"), 1)) ==
                       report_json_text(run_experiment(cfg, load("titanic"), 4));
  }
  os << "library reports " << (same ? "identical" : "differ");
  // Tool level: re-execute from the run directory's manifest config.
  bool rerun = true;
#ifdef FAIRMISS_CLI
  const fs::path root = fs::temp_directory_path() / "fairmiss_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = FAIRMISS_CLI;
  const std::string config = std::string(FAIRMISS_SOURCE_DIR) + "/configs/subset_titanic.json";
  const auto run = [&](const std::string& cfg, const fs::path& out, int threads) {
    const std::string cmd = "\"" + cli + "\" --threads " + std::to_string(threads) + " --out-dir \"" + out.string() +
                            "\" experiment --config \"" + cfg + "\" > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  rerun = run(config, root / "a", 1) && run((root / "a" / "config.json").string(), root / "b", 4);
  const auto manifest = nlohmann::json::parse(read_file(root / "a" / "manifest.json"));
  rerun = rerun && manifest.at("status") == "complete" &&
          read_file(root / "a" / "report.json") == read_file(root / "b" / "report.json");
  os << ", re-run from manifest " << (rerun ? "byte-identical" : "differs");
  fs::remove_all(root);
#endif
  return {same && rerun, os.str()};
}

}  // namespace

int main() {
  // Published tolerances only apply to the canonical files.
  bool digests = true;
  for (const auto& c : verify_sha256sums(kData / "SHA256SUMS")) {
    if (!c.ok()) {
      std::cerr << "digest mismatch: " << c.file << "\n";
      digests = false;
    }
  }
  std::cerr << "dataset digests " << (digests ? "verified" : "NOT verified") << "\n";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 Published audit reproduction", published_audit},
      {"2 Octagon oracle equivalence", octagon_oracle},
      {"3 Worked octagon example", worked_example_vertices},
      {"4 SPD antisymmetry", antisymmetry},
      {"5 MCAR test", mcar},
      {"6 Subset regime pattern", subset_pattern},
      {"7 Imputation vs deletion direction", imputation_direction},
      {"8 Determinism", determinism}};
  const std::set<std::string> needs_canonical{"1", "5", "6", "7"};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!digests && needs_canonical.contains(name.substr(0, 1))) {
      o.pass = false;
      o.detail += " (datasets fail digest check)";
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
