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

#ifndef FAIRMISS_EXPERIMENTS_HPP
#define FAIRMISS_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/csv.hpp"
#include "fairmiss/dataset.hpp"
#include "fairmiss/group.hpp"
#include "fairmiss/handling.hpp"
#include "fairmiss/metrics.hpp"
#include "fairmiss/models.hpp"
#include "fairmiss/octagon.hpp"
#include "fairmiss/random.hpp"
#include "fairmiss/stats.hpp"

namespace fairmiss {

inline constexpr std::string_view kReportSchemaVersion = "fairmiss.report/1";
inline constexpr std::string_view kConfigSchemaVersion = "fairmiss.experiment/1";

enum class Protocol { kSubset, kColumns, kImputation };

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kSubset: return "subset";
    case Protocol::kColumns: return "columns";
    case Protocol::kImputation: return "imputation";
  }
  return "subset";
}

inline Protocol parse_protocol(std::string_view s) {
  if (s == "subset") return Protocol::kSubset;
  if (s == "columns") return Protocol::kColumns;
  if (s == "imputation") return Protocol::kImputation;
  throw Error(ErrorCode::kInvalidArgument, "unknown protocol '" + std::string(s) + "'");
}

/// Training-set regimes. The first four belong to the subset and column
/// protocols, the last two to imputation versus deletion.
enum class Regime { kAllRows, kWithMissing, kWithoutMissing, kSampleWithoutMissing, kDeletion, kImputation };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::kAllRows: return "all_rows";
    case Regime::kWithMissing: return "with_miss";
    case Regime::kWithoutMissing: return "without_miss";
    case Regime::kSampleWithoutMissing: return "sample_without_miss";
    case Regime::kDeletion: return "deletion";
    case Regime::kImputation: return "imputation";
  }
  return "all_rows";
}

inline Regime parse_regime(std::string_view s) {
  for (auto r : {Regime::kAllRows, Regime::kWithMissing, Regime::kWithoutMissing, Regime::kSampleWithoutMissing,
                 Regime::kDeletion, Regime::kImputation}) {
    if (s == to_string(r)) return r;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown regime '" + std::string(s) + "'");
}

enum class ImputationMode { kFullDataset, kTrainOnly };

inline std::string_view to_string(ImputationMode m) {
  return m == ImputationMode::kFullDataset ? "full_dataset" : "train_only";
}

inline ImputationMode parse_imputation_mode(std::string_view s) {
  if (s == "full_dataset") return ImputationMode::kFullDataset;
  if (s == "train_only") return ImputationMode::kTrainOnly;
  throw Error(ErrorCode::kInvalidArgument, "unknown imputation mode '" + std::string(s) + "'");
}

struct NamedModel {
  std::string id;
  ModelSpec spec;
};

struct NamedGroup {
  std::string id;
  GroupSpec spec;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string dataset;  // id, or a CSV path when `schema` is set
  std::string csv;
  std::string schema;
  std::vector<NamedGroup> groups;
  Protocol protocol = Protocol::kSubset;
  std::vector<Regime> regimes;  // empty means the protocol's full set
  std::vector<NamedModel> models;
  std::size_t repetitions = 100;
  double test_fraction = 0.3;
  std::uint64_t master_seed = 0;
  ImputationMode imputation_mode = ImputationMode::kFullDataset;
  NumericFill numeric_fill = NumericFill::kMean;
  double alpha = 0.05;
  double max_discard_fraction = 0.1;

  std::vector<Regime> effective_regimes() const {
    if (protocol == Protocol::kImputation) return {Regime::kDeletion, Regime::kImputation};
    if (!regimes.empty()) return regimes;
    return {Regime::kAllRows, Regime::kWithMissing, Regime::kWithoutMissing, Regime::kSampleWithoutMissing};
  }

  void validate() const {
    if (repetitions < 1) throw Error(ErrorCode::kInvalidArgument, "repetitions must be at least 1");
    if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one group is required");
    if (models.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one model is required");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "test_fraction must lie in (0, 1)");
    }
    if (!(max_discard_fraction >= 0.0 && max_discard_fraction <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "max_discard_fraction must lie in [0, 1]");
    }
    std::set<std::string> ids;
    for (const auto& m : models) {
      if (!ids.insert(m.id).second) throw Error(ErrorCode::kInvalidArgument, "duplicate model id '" + m.id + "'");
    }
    for (auto r : effective_regimes()) {
      const bool imputation_regime = r == Regime::kDeletion || r == Regime::kImputation;
      if (imputation_regime != (protocol == Protocol::kImputation)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "regime '" + std::string(to_string(r)) + "' does not belong to protocol '" +
                        std::string(to_string(protocol)) + "'");
      }
    }
    if (protocol == Protocol::kSubset) {
      for (const auto& m : models) {
        if (m.spec.kind != ModelKind::kCart && m.spec.kind != ModelKind::kMajority &&
            m.spec.kind != ModelKind::kPerfect) {
          throw Error(ErrorCode::kInvalidArgument,
                      "model '" + m.id + "' cannot train on masked cells; use the columns or imputation protocol");
        }
      }
    }
  }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"schema_version", kConfigSchemaVersion},
                     {"name", c.name},
                     {"dataset", c.dataset},
                     {"protocol", to_string(c.protocol)},
                     {"repetitions", c.repetitions},
                     {"test_fraction", c.test_fraction},
                     {"master_seed", c.master_seed},
                     {"alpha", c.alpha},
                     {"max_discard_fraction", c.max_discard_fraction}};
  if (!c.csv.empty()) j["csv"] = c.csv;
  if (!c.schema.empty()) j["schema"] = c.schema;
  j["groups"] = nlohmann::json::array();
  for (const auto& g : c.groups) {
    nlohmann::json jg = g.spec;
    jg["id"] = g.id;
    j["groups"].push_back(jg);
  }
  std::vector<std::string> regimes;
  for (auto r : c.effective_regimes()) regimes.emplace_back(to_string(r));
  j["regimes"] = regimes;
  j["models"] = nlohmann::json::array();
  for (const auto& m : c.models) {
    nlohmann::json jm = m.spec;
    jm["id"] = m.id;
    j["models"].push_back(jm);
  }
  if (c.protocol == Protocol::kImputation) {
    j["imputation_mode"] = to_string(c.imputation_mode);
    j["numeric_fill"] = c.numeric_fill == NumericFill::kMean ? "mean" : "median";
  }
}

/// Parses a configuration. Groups may be inline objects or names of files
/// `<groups_dir>/<name>.json`.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& groups_dir) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorCode::kParseError, "experiment config must be a JSON object");
    if (j.contains("schema_version") && j.at("schema_version").get<std::string>() != kConfigSchemaVersion) {
      throw Error(ErrorCode::kParseError, "unsupported config schema_version '" +
                                              j.at("schema_version").get<std::string>() + "'");
    }
    c.name = j.value("name", c.name);
    c.dataset = j.at("dataset").get<std::string>();
    c.csv = j.value("csv", std::string());
    c.schema = j.value("schema", std::string());
    c.protocol = parse_protocol(j.value("protocol", std::string("subset")));
    c.repetitions = j.value("repetitions", c.repetitions);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.alpha = j.value("alpha", c.alpha);
    c.max_discard_fraction = j.value("max_discard_fraction", c.max_discard_fraction);
    c.imputation_mode = parse_imputation_mode(j.value("imputation_mode", std::string("full_dataset")));
    const auto fill = j.value("numeric_fill", std::string("mean"));
    if (fill != "mean" && fill != "median") throw Error(ErrorCode::kInvalidArgument, "numeric_fill must be mean or median");
    c.numeric_fill = fill == "mean" ? NumericFill::kMean : NumericFill::kMedian;
    if (j.contains("regimes")) {
      for (const auto& r : j.at("regimes")) c.regimes.push_back(parse_regime(r.get<std::string>()));
    }
    for (const auto& g : j.at("groups")) {
      NamedGroup ng;
      if (g.is_string()) {
        ng.id = g.get<std::string>();
        const auto path = groups_dir / (ng.id + ".json");
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::kIo, "cannot open group config '" + path.string() + "'");
        ng.spec = nlohmann::json::parse(in).get<GroupSpec>();
      } else {
        ng.spec = g.get<GroupSpec>();
        ng.id = g.value("id", ng.spec.protected_attribute);
      }
      c.groups.push_back(std::move(ng));
    }
    for (const auto& m : j.at("models")) {
      NamedModel nm;
      nm.spec = m.get<ModelSpec>();
      nm.id = m.value("id", std::string(to_string(nm.spec.kind)));
      c.models.push_back(std::move(nm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

struct DatasetPaths {
  std::filesystem::path csv;
  std::filesystem::path schema;
};

/// `csv`/`schema` from the config when set, otherwise `<data_dir>/<dataset>.csv`
/// and its `.schema.json` sidecar.
inline DatasetPaths dataset_paths(const ExperimentConfig& c, const std::filesystem::path& data_dir) {
  DatasetPaths p;
  p.csv = c.csv.empty() ? data_dir / (c.dataset + ".csv") : std::filesystem::path(c.csv);
  if (!c.schema.empty()) {
    p.schema = c.schema;
  } else {
    p.schema = p.csv;
    p.schema.replace_extension(".schema.json");
  }
  return p;
}

inline Dataset load_dataset(const DatasetPaths& p) {
  return load_csv_file(p.csv.string(), Schema::from_file(p.schema.string()));
}

struct SignificanceMarks {
  std::vector<std::string> regimes;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> p_values;  // Holm-adjusted, one per pair
  std::vector<bool> starred;     // per regime: differs from every other regime
  std::string procedure = "welch+holm";
};

/// Pairwise Welch tests among the regimes' repetition-level samples with a
/// Holm adjustment at family level `alpha`. A regime is starred when it
/// differs significantly from every other regime.
inline SignificanceMarks significance_marks(const std::vector<std::string>& regimes,
                                            const std::vector<std::vector<double>>& samples, double alpha = 0.05) {
  if (regimes.size() != samples.size()) throw Error(ErrorCode::kLengthMismatch, "one sample per regime expected");
  for (const auto& s : samples) {
    if (s.size() < 2) throw Error(ErrorCode::kInsufficientRepetitions, "significance needs at least 2 repetitions");
  }
  SignificanceMarks m;
  m.regimes = regimes;
  std::vector<double> raw;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      m.pairs.emplace_back(a, b);
      raw.push_back(stats::welch_t_test(samples[a], samples[b]).p_value);
    }
  }
  m.p_values = stats::holm_adjust(raw);
  m.starred.assign(regimes.size(), regimes.size() > 1);
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    if (m.p_values[k] < alpha) continue;
    m.starred[m.pairs[k].first] = false;
    m.starred[m.pairs[k].second] = false;
  }
  return m;
}

struct RegimeResult {
  std::string regime;
  std::string model;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double spd_mean = 0.0;
  double spd_std = 0.0;
  std::optional<bool> significant;       // set on the with-missing regime only
  std::optional<std::string> amplification;  // "amplified" or "reduced" against the matching audit column
  bool fairest = false;                   // closest to zero among this model's regimes
  std::vector<double> accuracy_samples;
  std::vector<double> spd_samples;
};

struct BaselineResult {
  std::string name;
  double accuracy_mean = 0.0;
  double spd_mean = 0.0;
  bool matches_closed_form = true;  // in every repetition
};

struct SubsetAudit {
  std::optional<double> all_rows;
  std::optional<double> with_miss;
  std::optional<double> without_miss;
};

struct GroupReport {
  std::string id;
  GroupSpec group;
  SubsetAudit audit;
  std::vector<RegimeResult> results;
  std::vector<BaselineResult> baselines;
  std::vector<std::string> pareto;  // "model/regime" labels and baseline names
  std::vector<TradeoffPoint> octagon;
};

struct Discard {
  std::size_t repetition = 0;
  std::string reason;
};

struct ExperimentReport {
  nlohmann::json config;
  std::string protocol;
  std::string imputation_mode;  // empty unless protocol is imputation
  std::size_t dataset_rows = 0;
  std::size_t repetitions_completed = 0;
  std::vector<Discard> discarded;
  std::vector<std::string> test_row_hashes;  // per completed repetition
  std::vector<GroupReport> groups;
  std::vector<std::string> warnings;
};

namespace detail {

/// FNV-1a over the row ids, as 16 hex digits.
inline std::string row_id_hash(std::span<const RowId> ids) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto id : ids) {
    for (int b = 0; b < 4; ++b) {
      h ^= (id >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes
/// only its own slot, so results do not depend on scheduling. The first
/// exception (by index) is rethrown.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t k = std::max<std::size_t>(1, std::min(threads, n));
  if (k == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < k; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Cell {
  double accuracy = 0.0;
  std::vector<double> spd;  // per group
};

struct RepOutcome {
  bool discarded = false;
  std::string reason;
  std::string test_hash;
  std::vector<std::vector<Cell>> cells;  // [regime][model]
  Cell majority;
  Cell perfect;
  std::vector<bool> majority_exact, perfect_exact;  // per group
  std::vector<std::string> warnings;
};

inline std::optional<double> audit_spd(const Dataset& d, const GroupSpec& g) {
  try {
    return audit_dataset(d, g).spd;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyGroup) return std::nullopt;
    throw;
  }
}

inline std::vector<std::size_t> pick(const std::vector<std::size_t>& rows, const std::vector<std::uint8_t>& flag,
                                     bool want) {
  std::vector<std::size_t> out;
  for (auto r : rows) {
    if ((flag[r] != 0) == want) out.push_back(r);
  }
  return out;
}

}  // namespace detail

/// Runs the configured protocol on `data`. Repetition r uses the seed
/// derive_seed(master_seed, r) whatever the thread count.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data, std::size_t threads = 1) {
  cfg.validate();
  if (!data.has_label()) throw Error(ErrorCode::kMissingLabel, "experiment data needs a label column");
  for (const auto& g : cfg.groups) resolve_group(data, g.spec);

  const auto regimes = cfg.effective_regimes();
  const auto missing_flags = rows_with_missing(data);

  // The data models train on. Membership in the missing/complete subsets is
  // always taken from the original masks.
  Dataset fit_data = data;
  if (cfg.protocol == Protocol::kColumns) {
    fit_data = drop_columns(data, columns_with_missing(data));
    if (fit_data.n_features() == 0) throw Error(ErrorCode::kNoColumnsLeft, "every feature has missing values");
  } else if (cfg.protocol == Protocol::kImputation && cfg.imputation_mode == ImputationMode::kFullDataset) {
    fit_data = apply_imputer(fit_imputer(data, cfg.numeric_fill), data).first;
  }

  std::vector<detail::RepOutcome> reps(cfg.repetitions);
  detail::parallel_for(cfg.repetitions, threads, [&](std::size_t r) {
    detail::RepOutcome& out = reps[r];
    const std::uint64_t seed = derive_seed(cfg.master_seed, r);
    const auto split = stratified_split_indices(data, cfg.test_fraction, seed);
    const auto with = detail::pick(split.train_rows, missing_flags, true);
    const auto without = detail::pick(split.train_rows, missing_flags, false);

    Dataset train_all = fit_data.select_rows(split.train_rows);
    Dataset test = fit_data.select_rows(split.test_rows);
    if (cfg.protocol == Protocol::kImputation && cfg.imputation_mode == ImputationMode::kTrainOnly) {
      const auto imputer = fit_imputer(data.select_rows(split.train_rows), cfg.numeric_fill);
      train_all = apply_imputer(imputer, train_all).first;
      test = apply_imputer(imputer, test).first;
    }
    // Positions inside train_all of each regime's rows.
    std::vector<std::size_t> pos_with, pos_without, pos_all(split.train_rows.size());
    for (std::size_t i = 0; i < split.train_rows.size(); ++i) {
      pos_all[i] = i;
      (missing_flags[split.train_rows[i]] ? pos_with : pos_without).push_back(i);
    }
    std::vector<std::vector<std::size_t>> regime_rows;
    for (auto regime : regimes) {
      switch (regime) {
        case Regime::kAllRows:
        case Regime::kImputation:
          regime_rows.push_back(pos_all);
          break;
        case Regime::kWithMissing:
          regime_rows.push_back(pos_with);
          break;
        case Regime::kWithoutMissing:
        case Regime::kDeletion:
          regime_rows.push_back(pos_without);
          break;
        case Regime::kSampleWithoutMissing: {
          if (pos_with.size() > pos_without.size()) {
            out.discarded = true;
            out.reason = "fewer complete rows than rows with missing values";
            return;
          }
          std::vector<std::size_t> rows;
          for (auto i : sample_row_indices(pos_without.size(), pos_with.size(), derive_seed(seed, 1))) {
            rows.push_back(pos_without[i]);
          }
          regime_rows.push_back(std::move(rows));
          break;
        }
      }
      if (regime_rows.back().empty()) {
        out.discarded = true;
        out.reason = "regime " + std::string(to_string(regime)) + " has no training rows";
        return;
      }
    }
    out.test_hash = detail::row_id_hash(test.row_ids());

    auto score = [&](const Predictions& p) {
      detail::Cell c;
      c.accuracy = accuracy(p, test);
      for (const auto& g : cfg.groups) c.spd.push_back(spd(p.labels, test, g.spec));
      return c;
    };
    out.cells.assign(regimes.size(), {});
    for (std::size_t k = 0; k < regimes.size(); ++k) {
      const Dataset train = train_all.select_rows(regime_rows[k]);
      for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        const Model model = fit(train, cfg.models[m].spec, derive_seed(seed, 1000 + m));
        for (const auto& w : model.warnings) {
          out.warnings.push_back(cfg.models[m].id + "/" + std::string(to_string(regimes[k])) + ": " + w);
        }
        out.cells[k].push_back(score(predict(model, test)));
      }
    }

    // Baselines, checked against their closed forms on this test set.
    const Model majority = fit(train_all, ModelSpec::of(ModelKind::kMajority), 0);
    const Predictions pm = predict(majority, test);
    out.majority = score(pm);
    const auto& mm = std::get<models::MajorityModel>(majority.impl);
    const auto majority_code = test.label().level_code(mm.classes[mm.cls]);
    std::size_t hits = 0;
    for (auto y : test.label().codes()) hits += (majority_code && y == *majority_code) ? 1 : 0;
    const double majority_acc = static_cast<double>(hits) / static_cast<double>(test.n_rows());
    out.perfect = score(predict(Model{models::PerfectOracleModel{}, {}, {}}, test));
    for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
      out.majority_exact.push_back(out.majority.spd[g] == 0.0 && out.majority.accuracy == majority_acc);
      out.perfect_exact.push_back(out.perfect.accuracy == 1.0 &&
                                  out.perfect.spd[g] == audit_dataset(test, cfg.groups[g].spec).spd);
    }
  });

  ExperimentReport rep;
  rep.config = cfg;
  rep.protocol = to_string(cfg.protocol);
  if (cfg.protocol == Protocol::kImputation) rep.imputation_mode = to_string(cfg.imputation_mode);
  rep.dataset_rows = data.n_rows();
  std::vector<std::size_t> kept;
  std::set<std::string> seen_warnings;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (reps[r].discarded) {
      rep.discarded.push_back({r, reps[r].reason});
      continue;
    }
    kept.push_back(r);
    rep.test_row_hashes.push_back(reps[r].test_hash);
    for (const auto& w : reps[r].warnings) {
      if (seen_warnings.insert(w).second) rep.warnings.push_back(w);
    }
  }
  rep.repetitions_completed = kept.size();
  if (static_cast<double>(rep.discarded.size()) > cfg.max_discard_fraction * static_cast<double>(cfg.repetitions) ||
      kept.empty()) {
    throw Error(ErrorCode::kRegimeEmpty, std::to_string(rep.discarded.size()) + " of " +
                                             std::to_string(cfg.repetitions) + " repetitions were discarded");
  }

  const auto subsets = split_by_missingness(data);
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    GroupReport gr;
    gr.id = cfg.groups[g].id;
    gr.group = cfg.groups[g].spec;
    gr.audit.all_rows = detail::audit_spd(data, gr.group);
    gr.audit.with_miss = detail::audit_spd(subsets.with_missing, gr.group);
    gr.audit.without_miss = detail::audit_spd(subsets.without_missing, gr.group);

    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
      std::vector<RegimeResult> per_model;
      for (std::size_t k = 0; k < regimes.size(); ++k) {
        RegimeResult res;
        res.regime = to_string(regimes[k]);
        res.model = cfg.models[m].id;
        for (auto r : kept) {
          res.accuracy_samples.push_back(reps[r].cells[k][m].accuracy);
          res.spd_samples.push_back(reps[r].cells[k][m].spd[g]);
        }
        res.accuracy_mean = stats::mean(res.accuracy_samples);
        res.accuracy_std = stats::stddev(res.accuracy_samples);
        res.spd_mean = stats::mean(res.spd_samples);
        res.spd_std = stats::stddev(res.spd_samples);
        std::optional<double> reference;
        switch (regimes[k]) {
          case Regime::kWithMissing: reference = gr.audit.with_miss; break;
          case Regime::kWithoutMissing:
          case Regime::kSampleWithoutMissing: reference = gr.audit.without_miss; break;
          default: reference = gr.audit.all_rows; break;
        }
        if (reference) res.amplification = std::fabs(res.spd_mean) > std::fabs(*reference) ? "amplified" : "reduced";
        per_model.push_back(std::move(res));
      }
      std::size_t fairest = 0;
      for (std::size_t k = 1; k < per_model.size(); ++k) {
        if (std::fabs(per_model[k].spd_mean) < std::fabs(per_model[fairest].spd_mean)) fairest = k;
      }
      per_model[fairest].fairest = true;

      // Stars compare the with-missing regime against the other subsets.
      std::vector<std::string> names;
      std::vector<std::vector<double>> samples;
      std::optional<std::size_t> with_at;
      for (std::size_t k = 0; k < regimes.size(); ++k) {
        if (regimes[k] == Regime::kWithMissing) with_at = names.size();
        if (regimes[k] == Regime::kWithMissing || regimes[k] == Regime::kWithoutMissing ||
            regimes[k] == Regime::kSampleWithoutMissing) {
          names.push_back(per_model[k].regime);
          samples.push_back(per_model[k].spd_samples);
        }
      }
      if (with_at && names.size() > 1 && kept.size() >= 2) {
        const auto marks = significance_marks(names, samples, cfg.alpha);
        for (auto& res : per_model) {
          if (res.regime == "with_miss") res.significant = marks.starred[*with_at];
        }
      }
      for (auto& res : per_model) gr.results.push_back(std::move(res));
    }

    BaselineResult maj{"Majority", 0, 0, true}, per{"Perfect", 0, 0, true};
    std::vector<double> ma, ms, pa, ps;
    for (auto r : kept) {
      ma.push_back(reps[r].majority.accuracy);
      ms.push_back(reps[r].majority.spd[g]);
      pa.push_back(reps[r].perfect.accuracy);
      ps.push_back(reps[r].perfect.spd[g]);
      maj.matches_closed_form = maj.matches_closed_form && reps[r].majority_exact[g];
      per.matches_closed_form = per.matches_closed_form && reps[r].perfect_exact[g];
    }
    maj.accuracy_mean = stats::mean(ma);
    maj.spd_mean = stats::mean(ms);
    per.accuracy_mean = stats::mean(pa);
    per.spd_mean = stats::mean(ps);
    gr.baselines = {maj, per};

    std::vector<TradeoffPoint> points;
    for (const auto& res : gr.results) points.push_back({res.model + "/" + res.regime, res.accuracy_mean, res.spd_mean});
    points.push_back({maj.name, maj.accuracy_mean, maj.spd_mean});
    points.push_back({per.name, per.accuracy_mean, per.spd_mean});
    for (const auto& p : pareto_front(points)) gr.pareto.push_back(p.label);

    const auto octagon = octagon_vertices(dataset_stats(data, gr.group));
    for (std::size_t v = 0; v < octagon.vertices.size(); ++v) {
      gr.octagon.push_back({"v" + std::to_string(v + 1), octagon.vertices[v].accuracy, octagon.vertices[v].spd});
    }
    rep.groups.push_back(std::move(gr));
  }
  return rep;
}

inline ExperimentReport run_subset_experiment(ExperimentConfig cfg, const Dataset& data, std::size_t threads = 1) {
  cfg.protocol = Protocol::kSubset;
  return run_experiment(cfg, data, threads);
}

inline ExperimentReport run_column_removal_experiment(ExperimentConfig cfg, const Dataset& data,
                                                      std::size_t threads = 1) {
  cfg.protocol = Protocol::kColumns;
  return run_experiment(cfg, data, threads);
}

inline ExperimentReport run_imputation_vs_deletion(ExperimentConfig cfg, const Dataset& data,
                                                   std::size_t threads = 1) {
  cfg.protocol = Protocol::kImputation;
  cfg.regimes.clear();
  return run_experiment(cfg, data, threads);
}

// JSON: lossless, and parsing it back reproduces the report.

inline nlohmann::json optional_to_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }
inline std::optional<double> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline void to_json(nlohmann::json& j, const RegimeResult& r) {
  j = nlohmann::json{{"regime", r.regime},
                     {"model", r.model},
                     {"accuracy_mean", r.accuracy_mean},
                     {"accuracy_std", r.accuracy_std},
                     {"spd_mean", r.spd_mean},
                     {"spd_std", r.spd_std},
                     {"significant", r.significant ? nlohmann::json(*r.significant) : nlohmann::json()},
                     {"amplification", r.amplification ? nlohmann::json(*r.amplification) : nlohmann::json()},
                     {"fairest", r.fairest},
                     {"accuracy_samples", r.accuracy_samples},
                     {"spd_samples", r.spd_samples}};
}

inline void from_json(const nlohmann::json& j, RegimeResult& r) {
  r.regime = j.at("regime").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.accuracy_mean = j.at("accuracy_mean").get<double>();
  r.accuracy_std = j.at("accuracy_std").get<double>();
  r.spd_mean = j.at("spd_mean").get<double>();
  r.spd_std = j.at("spd_std").get<double>();
  r.significant = j.at("significant").is_null() ? std::nullopt : std::optional<bool>(j.at("significant").get<bool>());
  r.amplification = j.at("amplification").is_null() ? std::nullopt
                                                     : std::optional<std::string>(j.at("amplification").get<std::string>());
  r.fairest = j.at("fairest").get<bool>();
  r.accuracy_samples = j.at("accuracy_samples").get<std::vector<double>>();
  r.spd_samples = j.at("spd_samples").get<std::vector<double>>();
}

inline void to_json(nlohmann::json& j, const BaselineResult& b) {
  j = nlohmann::json{{"name", b.name},
                     {"accuracy_mean", b.accuracy_mean},
                     {"spd_mean", b.spd_mean},
                     {"matches_closed_form", b.matches_closed_form}};
}

inline void from_json(const nlohmann::json& j, BaselineResult& b) {
  b.name = j.at("name").get<std::string>();
  b.accuracy_mean = j.at("accuracy_mean").get<double>();
  b.spd_mean = j.at("spd_mean").get<double>();
  b.matches_closed_form = j.at("matches_closed_form").get<bool>();
}

inline void to_json(nlohmann::json& j, const GroupReport& g) {
  j = nlohmann::json{{"id", g.id},
                     {"group", g.group},
                     {"audit",
                      {{"all_rows", optional_to_json(g.audit.all_rows)},
                       {"with_miss", optional_to_json(g.audit.with_miss)},
                       {"without_miss", optional_to_json(g.audit.without_miss)}}},
                     {"results", g.results},
                     {"baselines", g.baselines},
                     {"pareto", g.pareto},
                     {"octagon", g.octagon}};
}

inline void from_json(const nlohmann::json& j, GroupReport& g) {
  g.id = j.at("id").get<std::string>();
  g.group = j.at("group").get<GroupSpec>();
  const auto& a = j.at("audit");
  g.audit = {optional_from_json(a.at("all_rows")), optional_from_json(a.at("with_miss")),
             optional_from_json(a.at("without_miss"))};
  g.results = j.at("results").get<std::vector<RegimeResult>>();
  g.baselines = j.at("baselines").get<std::vector<BaselineResult>>();
  g.pareto = j.at("pareto").get<std::vector<std::string>>();
  g.octagon = j.at("octagon").get<std::vector<TradeoffPoint>>();
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
  nlohmann::json discarded = nlohmann::json::array();
  for (const auto& d : r.discarded) discarded.push_back({{"repetition", d.repetition}, {"reason", d.reason}});
  j = nlohmann::json{{"schema_version", kReportSchemaVersion},
                     {"config", r.config},
                     {"protocol", r.protocol},
                     {"imputation_mode", r.imputation_mode},
                     {"significance_procedure", "welch+holm"},
                     {"dataset_rows", r.dataset_rows},
                     {"repetitions_completed", r.repetitions_completed},
                     {"discarded", discarded},
                     {"test_row_hashes", r.test_row_hashes},
                     {"groups", r.groups},
                     {"warnings", r.warnings}};
}

inline void from_json(const nlohmann::json& j, ExperimentReport& r) {
  if (j.at("schema_version").get<std::string>() != kReportSchemaVersion) {
    throw Error(ErrorCode::kParseError, "unsupported report schema_version");
  }
  r.config = j.at("config");
  r.protocol = j.at("protocol").get<std::string>();
  r.imputation_mode = j.at("imputation_mode").get<std::string>();
  r.dataset_rows = j.at("dataset_rows").get<std::size_t>();
  r.repetitions_completed = j.at("repetitions_completed").get<std::size_t>();
  r.discarded.clear();
  for (const auto& d : j.at("discarded")) {
    r.discarded.push_back({d.at("repetition").get<std::size_t>(), d.at("reason").get<std::string>()});
  }
  r.test_row_hashes = j.at("test_row_hashes").get<std::vector<std::string>>();
  r.groups = j.at("groups").get<std::vector<GroupReport>>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
}

namespace detail {

inline std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace detail

/// Results markdown: one row per group and model, accuracy and SPD per
/// regime. ▲/▽ mark amplified/reduced bias against the dataset audit, bold is
/// the fairest regime, * marks a significant with-missing regime.
inline std::string report_markdown(const ExperimentReport& r) {
  std::ostringstream md;
  md << "# " << r.config.value("name", std::string("experiment")) << "\n\n";
  md << "- dataset: " << r.config.value("dataset", std::string()) << " (" << r.dataset_rows << " rows)\n";
  md << "- protocol: " << r.protocol;
  if (!r.imputation_mode.empty()) md << " (imputation mode: " << r.imputation_mode << ")";
  md << "\n- repetitions: " << r.repetitions_completed << " completed, " << r.discarded.size() << " discarded\n";
  md << "- significance: pairwise Welch t-tests, Holm-adjusted\n\n";

  md << "## Dataset audit (SPD)\n\n| group | all rows | with ⊙ | w/o ⊙ |\n|---|---|---|---|\n";
  for (const auto& g : r.groups) {
    const std::array<std::optional<double>, 3> v{g.audit.all_rows, g.audit.with_miss, g.audit.without_miss};
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < 3; ++i) {
      if (v[i] && (!best || std::fabs(*v[i]) < std::fabs(*v[*best]))) best = i;
    }
    md << "| " << g.id;
    for (std::size_t i = 0; i < 3; ++i) {
      md << " | ";
      if (!v[i]) {
        md << "n/a";
      } else if (best == i) {
        md << "**" << detail::fixed4(*v[i]) << "**";
      } else {
        md << detail::fixed4(*v[i]);
      }
    }
    md << " |\n";
  }

  if (!r.groups.empty()) {
    std::vector<std::string> regimes;
    for (const auto& res : r.groups.front().results) {
      if (std::find(regimes.begin(), regimes.end(), res.regime) == regimes.end()) regimes.push_back(res.regime);
    }
    md << "\n## Results (mean ± std over repetitions)\n\n| group | model |";
    for (const auto& rg : regimes) md << " Acc (" << rg << ") | SPD (" << rg << ") |";
    md << "\n|---|---|";
    for (std::size_t i = 0; i < regimes.size(); ++i) md << "---|---|";
    md << "\n";
    for (const auto& g : r.groups) {
      std::vector<std::string> model_order;
      for (const auto& res : g.results) {
        if (std::find(model_order.begin(), model_order.end(), res.model) == model_order.end()) {
          model_order.push_back(res.model);
        }
      }
      for (const auto& model : model_order) {
        md << "| " << g.id << " | " << model << " |";
        for (const auto& res : g.results) {
          if (res.model != model) continue;
          std::string spd_cell = detail::fixed4(res.spd_mean) + " ± " + detail::fixed4(res.spd_std);
          if (res.significant.value_or(false)) spd_cell += "*";
          if (res.fairest) spd_cell = "**" + spd_cell + "**";
          if (res.amplification) spd_cell = (*res.amplification == "amplified" ? "▲" : "▽") + spd_cell;
          md << " " << detail::fixed4(res.accuracy_mean) << " ± " << detail::fixed4(res.accuracy_std) << " | "
             << spd_cell << " |";
        }
        md << "\n";
      }
    }
    md << "\n## Baselines and Pareto front\n\n| group | Majority (acc, SPD) | Perfect (acc, SPD) | Pareto front |\n"
          "|---|---|---|---|\n";
    for (const auto& g : r.groups) {
      md << "| " << g.id;
      for (const auto& b : g.baselines) {
        md << " | (" << detail::fixed4(b.accuracy_mean) << ", " << detail::fixed4(b.spd_mean) << ")";
      }
      md << " |";
      for (std::size_t i = 0; i < g.pareto.size(); ++i) md << (i ? ", " : " ") << g.pareto[i];
      md << " |\n";
    }
  }
  if (!r.warnings.empty()) {
    md << "\n## Warnings\n\n";
    for (const auto& w : r.warnings) md << "- " << w << "\n";
  }
  return md.str();
}

/// Plot payload: one row per (group, model, regime) mean plus the baselines.
inline std::string report_points_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "group,model,regime,accuracy,spd\n";
  for (const auto& g : r.groups) {
    for (const auto& res : g.results) {
      os << csv_escape(g.id) << ',' << csv_escape(res.model) << ',' << res.regime << ',' << res.accuracy_mean << ','
         << res.spd_mean << '\n';
    }
    for (const auto& b : g.baselines) {
      os << csv_escape(g.id) << ',' << b.name << ",baseline," << b.accuracy_mean << ',' << b.spd_mean << '\n';
    }
  }
  return os.str();
}

inline std::string report_octagon_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "group,vertex,accuracy,spd\n";
  for (const auto& g : r.groups) {
    for (const auto& v : g.octagon) os << csv_escape(g.id) << ',' << v.label << ',' << v.accuracy << ',' << v.spd << '\n';
  }
  return os.str();
}

inline std::string report_json_text(const ExperimentReport& r) { return nlohmann::json(r).dump(2) + "\n"; }

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

/// Writes report.json, report.md, points.csv and octagon.csv into `dir`.
inline void write_report_files(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "report.json", report_json_text(r));
  write_text_file(dir / "report.md", report_markdown(r));
  write_text_file(dir / "points.csv", report_points_csv(r));
  write_text_file(dir / "octagon.csv", report_octagon_csv(r));
}

}  // namespace fairmiss

#endif  // FAIRMISS_EXPERIMENTS_HPP
