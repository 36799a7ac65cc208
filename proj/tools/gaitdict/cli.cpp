#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaitdict/dictattack.hpp"
#include "gaitdict/eda.hpp"
#include "gaitdict/error.hpp"
#include "gaitdict/parallel.hpp"
#include "gaitdict/recording_io.hpp"
#include "gaitdict/render.hpp"
#include "gaitdict/seeding.hpp"
#include "gaitdict/synthgait.hpp"

namespace gaitdict::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// configuration

void RunConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(window)) throw ConfigError("--window must be positive");
  if (!positive(slide)) throw ConfigError("--slide must be positive");
  if (per_impostor < 1) throw ConfigError("--per-impostor must be >= 1");
  if (top_k < 1) throw ConfigError("--top-k must be >= 1");
  if (combos.empty()) throw ConfigError("--combos selects no sensor combination");
  if (kinds.empty()) throw ConfigError("--classifiers selects no classifier");
  if (!(severe_threshold > 0.0 && severe_threshold <= 1.0)) throw ConfigError("--severe-threshold must be in (0, 1]");
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (format != "csv" && format != "svg") throw ConfigError("--format must be csv or svg");
  if (synth.scale != "desk" && synth.scale != "full") throw ConfigError("synth.scale must be desk or full");
  if (!(synth.noise_scale >= 0.0)) throw ConfigError("synth.noise_scale must be >= 0");
}

std::string RunConfig::to_json() const {
  ojson j;
  j["seed"] = seed;
  j["window"] = window;
  j["slide"] = slide;
  j["per_impostor"] = per_impostor;
  j["top_k"] = top_k;
  j["combos"] = ojson::array();
  for (const auto& c : combos) j["combos"].push_back(c.name());
  j["classifiers"] = ojson::array();
  for (auto k : kinds) j["classifiers"].push_back(std::string(to_string(k)));
  j["severe_threshold"] = severe_threshold;
  j["format"] = format;
  auto opt = [](const std::optional<std::size_t>& v) { return v ? ojson(*v) : ojson(nullptr); };
  j["synth"] = {{"scale", synth.scale},
                {"subjects", opt(synth.subjects)},
                {"imitators", opt(synth.imitators)},
                {"settings", opt(synth.settings)},
                {"noise_scale", synth.noise_scale}};
  j["eda_features"] = eda_features;
  return j.dump();
}

std::vector<SensorCombo> parse_combo_list(const std::vector<std::string>& items) {
  std::set<SensorCombo> out;
  for (const auto& item : items) {
    if (item == "all") {
      for (const auto& c : all_combos()) out.insert(c);
      continue;
    }
    try {
      out.insert(SensorCombo::parse(item));
    } catch (const std::exception& e) {
      throw ConfigError("bad sensor combination '" + item + "': " + e.what());
    }
  }
  return {out.begin(), out.end()};
}

std::vector<ClassifierKind> parse_kind_list(const std::vector<std::string>& items) {
  std::set<ClassifierKind> out;
  for (const auto& item : items) {
    if (item == "all") {
      out.insert(kAllKinds.begin(), kAllKinds.end());
      continue;
    }
    const auto k = parse_kind(item);
    if (!k) throw ConfigError("unknown classifier '" + item + "'");
    out.insert(*k);
  }
  return {out.begin(), out.end()};
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) {
    std::vector<std::string> out;
    std::stringstream ss(v.get<std::string>());
    for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
    return out;
  }
  if (!v.is_array()) throw ConfigError("config: " + key + " must be a string or an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError("config: " + key + " must contain strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

template <typename T>
T number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config: " + key + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
      throw ConfigError("config: " + key + " must be a non-negative integer");
  }
  return v.get<T>();
}

}  // namespace

RunConfig apply_config_json(RunConfig c, std::string_view text, const fs::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  auto path = [&](const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("config: " + key + " must be a string");
    fs::path p(v.get<std::string>());
    return p.is_absolute() ? p : dir / p;
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "data") c.data = path(v, key);
    else if (key == "out") c.out = path(v, key);
    else if (key == "seed") c.seed = number<std::uint64_t>(v, key);
    else if (key == "jobs") c.jobs = number<std::size_t>(v, key);
    else if (key == "window") c.window = number<double>(v, key);
    else if (key == "slide") c.slide = number<double>(v, key);
    else if (key == "per_impostor") c.per_impostor = number<std::size_t>(v, key);
    else if (key == "top_k") c.top_k = number<std::size_t>(v, key);
    else if (key == "combos") c.combos = parse_combo_list(string_list(v, key));
    else if (key == "classifiers") c.kinds = parse_kind_list(string_list(v, key));
    else if (key == "severe_threshold") c.severe_threshold = number<double>(v, key);
    else if (key == "format") {
      if (!v.is_string()) throw ConfigError("config: format must be a string");
      c.format = v.get<std::string>();
    } else if (key == "eda_features") c.eda_features = string_list(v, key);
    else if (key == "synth") {
      if (!v.is_object()) throw ConfigError("config: synth must be an object");
      for (const auto& [sk, sv] : v.items()) {
        const auto name = "synth." + sk;
        if (sk == "scale") {
          if (!sv.is_string()) throw ConfigError("config: synth.scale must be a string");
          c.synth.scale = sv.get<std::string>();
        } else if (sk == "subjects") c.synth.subjects = number<std::size_t>(sv, name);
        else if (sk == "imitators") c.synth.imitators = number<std::size_t>(sv, name);
        else if (sk == "settings") c.synth.settings = number<std::size_t>(sv, name);
        else if (sk == "noise_scale") c.synth.noise_scale = number<double>(sv, name);
        else throw ConfigError("config: unknown key " + name);
      }
    } else {
      throw ConfigError("config: unknown key " + key);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// artifacts and manifests

namespace {

struct Digest {
  std::string path;
  std::string digest;
};

// Records what a stage reads and writes so the run manifest can list both.
class Artifacts {
 public:
  Artifacts(std::string stage, fs::path out) : stage_(std::move(stage)), out_(std::move(out)) {}

  void text(const fs::path& rel, const std::string& content) {
    write_text(out_ / rel, content);
    outputs_.push_back({rel.generic_string(), hex_digest(content)});
  }
  // A file some library call already wrote under out/.
  void written(const fs::path& rel) { outputs_.push_back({rel.generic_string(), hex_digest(read_text(out_ / rel))}); }
  void input(const fs::path& file, const std::string& shown) { inputs_.push_back({shown, hex_digest(read_text(file))}); }

  void finish(const RunConfig& config, const ojson& extra = ojson::object()) {
    auto by_path = [](const Digest& a, const Digest& b) { return a.path < b.path; };
    std::sort(inputs_.begin(), inputs_.end(), by_path);
    std::sort(outputs_.begin(), outputs_.end(), by_path);
    ojson j;
    j["format"] = "gaitdict-run";
    j["version"] = 1;
    j["command"] = stage_;
    j["config"] = ojson::parse(config.to_json());
    j["seeds"] = {{"master", config.seed}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    auto list = [](const std::vector<Digest>& items) {
      ojson a = ojson::array();
      for (const auto& d : items) a.push_back({{"path", d.path}, {"digest", d.digest}});
      return a;
    };
    j["inputs"] = list(inputs_);
    j["outputs"] = list(outputs_);
    write_text(out_ / "manifests" / (stage_ + ".json"), j.dump(1) + "\n");
  }

 private:
  std::string stage_;
  fs::path out_;
  std::vector<Digest> inputs_;
  std::vector<Digest> outputs_;
};

// Stages own their output directories; stale files from earlier runs would be orphans.
void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (ec) throw DataError("cannot clear " + dir.string() + ": " + ec.message());
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

void require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw ConfigError(std::string(flag) + " is required for this command");
}

std::string rel_to(const fs::path& p, const fs::path& root) { return p.lexically_relative(root).generic_string(); }

std::vector<Sensor> all_sensors() { return {kAllSensors.begin(), kAllSensors.end()}; }

// Rows of a full-schema matrix split by subject, preserving row order.
SessionStore split_by_subject(const FeatureMatrix& m) {
  std::map<std::string, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) rows[m.provenance()[i].subject].push_back(i);
  SessionStore out;
  for (const auto& [subject, idx] : rows) out.emplace(subject, m.select_rows(idx));
  return out;
}

FeatureMatrix concat(const std::vector<FeatureMatrix>& parts) {
  FeatureMatrix out(feature_names(all_sensors()));
  for (const auto& p : parts) out.append_rows(p);
  return out;
}

std::vector<EntryFeatures> split_dictionary_features(const FeatureMatrix& m) {
  std::map<EntryKey, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto key = EntryKey::parse(m.provenance()[i].session);
    if (!key || key->imitator_id != m.provenance()[i].subject)
      throw DataError("dictionary features: row " + std::to_string(i + 1) + " has malformed entry key '" +
                      m.provenance()[i].session + "'");
    rows[*key].push_back(i);
  }
  std::vector<EntryFeatures> out;
  for (const auto& [key, idx] : rows) out.push_back(EntryFeatures{key, m.select_rows(idx)});
  return out;
}

// ---------------------------------------------------------------------------
// ingest

struct SessionDir {
  std::string subject;
  std::string session;
  fs::path dir;
};

std::vector<SessionDir> discover_genuine(const fs::path& data) {
  const auto root = data / "genuine";
  if (!fs::is_directory(root)) throw DataError("no genuine data directory at " + root.string());
  std::vector<std::string> subjects;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) subjects.push_back(e.path().filename().string());
  }
  std::sort(subjects.begin(), subjects.end());
  if (subjects.size() < 2) throw DataError("need at least two subjects under " + root.string());
  std::vector<SessionDir> out;
  for (const auto& s : subjects) {
    for (const char* session : {"1", "2"}) {
      const auto dir = root / s / (std::string("session") + session);
      if (!fs::is_directory(dir))
        throw DataError("subject " + s + ": missing session " + session + " data (expected " + dir.string() + ")");
      out.push_back({s, session, dir});
    }
  }
  return out;
}

}  // namespace

int run_ingest(const RunConfig& config, std::ostream& log) {
  config.validate();
  require_path(config.data, "--data");
  require_path(config.out, "--out");
  Artifacts art("ingest", config.out);
  const auto sessions = discover_genuine(config.data);

  std::vector<std::optional<FeatureMatrix>> features(sessions.size());
  const auto sensors = all_sensors();
  parallel_for(sessions.size(), config.jobs, [&](std::size_t i) {
    const auto& s = sessions[i];
    try {
      const auto rec = load_recording(s.dir, s.subject, s.session);
      for (Sensor sensor : kAllSensors) {
        if (!rec.has_sensor(sensor))
          throw DataError("missing " + std::string(to_string(sensor)) + ".csv");
      }
      auto m = featurize_recording(preprocess(rec), sensors, config.window, config.slide);
      if (m.empty()) throw DataError("recording is shorter than one window");
      features[i] = std::move(m);
    } catch (const std::exception& e) {
      throw DataError("subject " + s.subject + " session " + s.session + ": " + e.what());
    }
  });

  for (const auto& s : sessions) {
    for (const auto& e : fs::directory_iterator(s.dir)) {
      if (e.path().extension() == ".csv") art.input(e.path(), rel_to(e.path(), config.data));
    }
  }

  reset_dir(config.out / "features");
  std::vector<FeatureMatrix> s1, s2;
  std::string summary = "subject,session,windows\n";
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    (sessions[i].session == "1" ? s1 : s2).push_back(*features[i]);
    summary += sessions[i].subject + "," + sessions[i].session + "," + std::to_string(features[i]->rows()) + "\n";
  }
  write_feature_csv(config.out / "features" / "session1.csv", concat(s1));
  art.written("features/session1.csv");
  write_feature_csv(config.out / "features" / "session2.csv", concat(s2));
  art.written("features/session2.csv");
  art.text("features/sessions.csv", summary);

  const auto manifest = config.data / "dictionary" / "manifest.json";
  std::size_t entries = 0;
  if (fs::exists(manifest)) {
    art.input(manifest, rel_to(manifest, config.data));
    Dictionary dict;
    try {
      dict = build_dictionary(manifest);
    } catch (const InvalidInput& e) {
      throw DataError(std::string("dictionary: ") + e.what());
    }
    for (const auto& m : parse_dictionary_manifest(read_text(manifest))) {
      for (const auto& [sensor, rel] : m.files) art.input(manifest.parent_path() / rel, rel_to(manifest.parent_path() / rel, config.data));
    }
    const auto ef = featurize_dictionary(dict, config.window, config.slide, config.jobs);
    std::vector<FeatureMatrix> parts;
    std::string entry_summary = "entry,windows,short\n";
    for (std::size_t i = 0; i < ef.size(); ++i) {
      parts.push_back(ef[i].features);
      entry_summary += ef[i].key.str() + "," + std::to_string(ef[i].features.rows()) + "," +
                       (dict.entries()[i].short_recording ? "1" : "0") + "\n";
    }
    write_feature_csv(config.out / "features" / "dictionary.csv", concat(parts));
    art.written("features/dictionary.csv");
    art.text("features/entries.csv", entry_summary);
    entries = ef.size();
  } else {
    log << "ingest: no dictionary manifest at " << manifest.string() << "; skipping dictionary features\n";
  }

  ojson params{{"window", config.window}, {"slide", config.slide}};
  art.text("features/params.json", params.dump(1) + "\n");
  art.finish(config);
  log << "ingest: " << sessions.size() / 2 << " subjects, " << entries << " dictionary entries\n";
  return kOk;
}

namespace {

void check_feature_params(const RunConfig& config) {
  const auto p = config.out / "features" / "params.json";
  if (!fs::exists(p)) throw DataError("missing " + p.string() + "; run ingest first");
  const auto j = nlohmann::json::parse(read_text(p));
  if (j.at("window").get<double>() != config.window || j.at("slide").get<double>() != config.slide)
    throw ConfigError("stored features were extracted with window " + j.at("window").dump() + " s / slide " +
                      j.at("slide").dump() + " s; rerun ingest with the current settings");
}

// Uses stored features when present, otherwise runs ingest first.
int ensure_features(const RunConfig& config, std::ostream& log) {
  if (fs::exists(config.out / "features" / "session1.csv")) return kOk;
  if (config.data.empty()) throw ConfigError("--data is required (no stored features under --out)");
  return run_ingest(config, log);
}

LabeledMatrix reorder_rows(const LabeledMatrix& m, const std::vector<std::string>& order) {
  LabeledMatrix out(m.corner, order, m.col_labels);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto it = std::find(m.row_labels.begin(), m.row_labels.end(), order[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) out.at(r, c) = m.at(static_cast<std::size_t>(it - m.row_labels.begin()), c);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// train

int run_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  require_path(config.out, "--out");
  if (int rc = ensure_features(config, log); rc != kOk) return rc;
  check_feature_params(config);
  Artifacts art("train", config.out);

  const auto f1 = config.out / "features" / "session1.csv";
  const auto f2 = config.out / "features" / "session2.csv";
  art.input(f1, "features/session1.csv");
  art.input(f2, "features/session2.csv");
  const auto s1 = split_by_subject(read_feature_csv(f1));
  const auto s2 = split_by_subject(read_feature_csv(f2));
  std::vector<std::string> users;
  for (const auto& [u, m] : s1) {
    if (!s2.contains(u)) throw DataError("subject " + u + ": missing session 2 data");
    users.push_back(u);
  }
  for (const auto& [u, m] : s2) {
    if (!s1.contains(u)) throw DataError("subject " + u + ": missing session 1 data");
  }

  BenchConfig bench;
  bench.per_impostor = config.per_impostor;
  bench.top_k = config.top_k;
  const auto grid = sweep(s1, s2, users, config.combos, config.kinds, config.seed, bench, config.jobs);

  reset_dir(config.out / "models");
  reset_dir(config.out / "baseline");
  for (const auto& cell : grid.cells) {
    if (!cell.ok()) continue;
    art.text(fs::path("models") / model_filename(cell.key.user, cell.key.combo, cell.key.kind),
             auth_model_to_json(*cell.model));
  }
  art.text("baseline/cells.csv", cells_csv(grid));

  const auto hter = sort_rows_by_mean(mean_rate_table(grid, "hter"));
  const auto far = reorder_rows(mean_rate_table(grid, "far"), hter.row_labels);
  const auto frr = reorder_rows(mean_rate_table(grid, "frr"), hter.row_labels);
  for (const auto& [name, m] : {std::pair{"hter", &hter}, std::pair{"far", &far}, std::pair{"frr", &frr}}) {
    art.text(std::string("baseline/") + name + ".csv", to_csv(*m));
    art.text(std::string("baseline/") + name + "_pct.csv", to_percent_csv(*m));
  }

  const auto failures = grid.failures();
  if (!failures.empty()) {
    std::string listing = "user,combo,kind,error\n";
    for (const auto* f : failures) {
      std::string msg = f->error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      listing += f->key.user + "," + f->key.combo.name() + "," + std::string(to_string(f->key.kind)) + "," + msg + "\n";
    }
    art.text("baseline/failures.csv", listing);
  }
  art.finish(config, {{"cells", grid.cells.size()}, {"failed_cells", failures.size()}});
  log << "train: " << grid.cells.size() - failures.size() << " of " << grid.cells.size() << " cells trained\n";
  if (!failures.empty()) {
    log << "train: " << failures.size() << " cell(s) failed:\n";
    for (const auto* f : failures)
      log << "  " << f->key.user << " " << f->key.combo.name() << " " << to_string(f->key.kind) << ": " << f->error
          << "\n";
    return kPartialFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// attack

int run_attack(const RunConfig& config, std::ostream& log) {
  config.validate();
  require_path(config.out, "--out");
  Artifacts art("attack", config.out);

  const auto cells_path = config.out / "baseline" / "cells.csv";
  if (!fs::exists(cells_path)) throw DataError("missing " + cells_path.string() + "; run train first");
  art.input(cells_path, "baseline/cells.csv");
  const auto reports = read_cells_csv(read_text(cells_path));

  const std::set<SensorCombo> combos(config.combos.begin(), config.combos.end());
  const std::set<ClassifierKind> kinds(config.kinds.begin(), config.kinds.end());
  BaselineGrid grid;
  for (const auto& [key, report] : reports) {
    if (!combos.contains(key.combo) || !kinds.contains(key.kind)) continue;
    const auto rel = fs::path("models") / model_filename(key.user, key.combo, key.kind);
    if (!fs::exists(config.out / rel)) throw DataError("missing model " + (config.out / rel).string());
    art.input(config.out / rel, rel.generic_string());
    GridCell cell;
    cell.key = key;
    cell.model = auth_model_from_json(read_text(config.out / rel));
    cell.report = report;
    grid.cells.push_back(std::move(cell));
  }
  if (grid.cells.empty()) throw DataError("no trained cells match the selected combos and classifiers");

  if (!fs::exists(config.out / "features" / "dictionary.csv")) {
    if (config.data.empty() || !fs::exists(config.data / "dictionary" / "manifest.json"))
      throw DataError("no dictionary features under --out and no dictionary manifest under --data");
    if (int rc = run_ingest(config, log); rc != kOk) return rc;
  }
  check_feature_params(config);
  const auto dict_path = config.out / "features" / "dictionary.csv";
  art.input(dict_path, "features/dictionary.csv");
  const auto entries = split_dictionary_features(read_feature_csv(dict_path));
  if (entries.empty()) throw DataError("dictionary has no entries");

  const auto report = attack_matrix(grid, entries, config.jobs);

  reset_dir(config.out / "attack");
  art.text("attack/long.csv", attack_long_csv(report));
  art.text("attack/summary.csv", attack_summary_csv(report));
  const auto dict_hter = sort_rows_by_mean(mean_attack_table(report, "dict_hter"));
  const auto dict_far = reorder_rows(mean_attack_table(report, "dict_far"), dict_hter.row_labels);
  art.text("attack/dict_hter.csv", to_csv(dict_hter));
  art.text("attack/dict_far.csv", to_csv(dict_far));
  art.text("attack/dict_hter_pct.csv", to_percent_csv(dict_hter));
  art.text("attack/dict_far_pct.csv", to_percent_csv(dict_far));

  std::string menagerie = "user,combo,kind,zero_far,dict_far,label\n";
  for (const auto& cell : report.cells) {
    const auto label = classify_user(cell.zero.far, cell.dict_far, config.severe_threshold);
    menagerie += cell.key.user + "," + cell.key.combo.name() + "," + std::string(to_string(cell.key.kind)) + "," +
                 format_fixed(cell.zero.far, 4) + "," + format_fixed(cell.dict_far, 4) + "," +
                 std::string(to_string(label)) + "\n";
  }
  art.text("attack/menagerie.csv", menagerie);

  std::set<std::pair<SensorCombo, ClassifierKind>> views;
  for (const auto& cell : report.cells) views.emplace(cell.key.combo, cell.key.kind);
  for (const auto& [combo, kind] : views) {
    const auto m = per_user_matrix(report, combo, kind);
    art.text(fs::path("attack") / "users" / (combo.name() + "__" + std::string(to_string(kind)) + ".csv"), to_csv(m));
  }
  if (!report.skipped.empty()) {
    std::string skipped = "cell\n";
    for (const auto& s : report.skipped) skipped += s + "\n";
    art.text("attack/skipped.csv", skipped);
  }
  art.finish(config, {{"entries", entries.size()}, {"cells", report.cells.size()}});
  log << "attack: " << report.cells.size() << " cells against " << entries.size() << " entries\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eda

int run_eda(const RunConfig& config, std::ostream& log) {
  config.validate();
  require_path(config.data, "--data");
  require_path(config.out, "--out");
  Artifacts art("eda", config.out);
  const auto manifest = config.data / "dictionary" / "manifest.json";
  if (!fs::exists(manifest)) throw DataError("no dictionary manifest at " + manifest.string());
  art.input(manifest, rel_to(manifest, config.data));
  Dictionary dict;
  try {
    dict = build_dictionary(manifest);
  } catch (const InvalidInput& e) {
    throw DataError(std::string("dictionary: ") + e.what());
  }
  const auto entries = featurize_dictionary(dict, config.window, config.slide, config.jobs);

  auto features = config.eda_features;
  if (features.empty()) {
    const std::vector<Sensor> la{Sensor::la};
    features = feature_names(la);
  }
  const auto imitators = dict.imitators();

  std::vector<std::vector<CorrelationCell>> corr(imitators.size());
  std::vector<std::optional<OverlapGrid>> overlap(imitators.size() * kAllFactors.size());
  parallel_for(imitators.size() * (1 + kAllFactors.size()), config.jobs, [&](std::size_t t) {
    if (t < imitators.size()) {
      corr[t] = factor_feature_correlations(entries, imitators[t], features);
      return;
    }
    const auto i = (t - imitators.size()) / kAllFactors.size();
    const auto f = kAllFactors[(t - imitators.size()) % kAllFactors.size()];
    overlap[t - imitators.size()] = dictionary_overlap(dict, imitators[i], f, kDefaultOverlapChannel, 8.0);
  });

  reset_dir(config.out / "eda");
  std::vector<CorrelationCell> all;
  for (auto& c : corr) all.insert(all.end(), c.begin(), c.end());
  art.text("eda/correlations.csv", correlations_csv(all));

  std::string corr_summary = "imitator,factor,defined,significant,significant_fraction\n";
  for (const auto& imitator : imitators) {
    for (Factor f : kAllFactors) {
      std::size_t defined = 0, significant = 0;
      for (const auto& c : all) {
        if (c.imitator != imitator || c.factor != f) continue;
        defined += c.defined;
        significant += c.significant;
      }
      corr_summary += imitator + "," + std::string(to_string(f)) + "," + std::to_string(defined) + "," +
                      std::to_string(significant) + "," +
                      (defined ? format_fixed(static_cast<double>(significant) / static_cast<double>(defined), 4)
                               : std::string("NA")) +
                      "\n";
    }
  }
  art.text("eda/correlation_summary.csv", corr_summary);

  std::string summary = "imitator,factor,levels,diagonal_mean,off_diagonal_mean,same_exceeds_cross\n";
  for (std::size_t i = 0; i < imitators.size(); ++i) {
    for (std::size_t k = 0; k < kAllFactors.size(); ++k) {
      const auto& g = *overlap[i * kAllFactors.size() + k];
      const auto name = imitators[i] + "__" + std::string(to_string(kAllFactors[k]));
      auto m = g.values;
      m.corner = std::string(to_string(kAllFactors[k]));
      art.text(fs::path("eda") / "overlap" / (name + ".csv"), to_csv(m));
      const double d = g.diagonal_mean(), o = g.off_diagonal_mean();
      const bool exceeds = !std::isnan(d) && !std::isnan(o) && d > o;
      summary += imitators[i] + "," + std::string(to_string(kAllFactors[k])) + "," + std::to_string(g.values.rows()) +
                 "," + format_fixed(d, 4) + "," + format_fixed(o, 4) + "," + (exceeds ? "1" : "0") + "\n";
    }
  }
  art.text("eda/overlap_summary.csv", summary);
  art.finish(config, {{"imitators", imitators.size()}, {"features", features.size()}});
  log << "eda: " << imitators.size() << " imitators, " << features.size() << " features\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// report

int run_report(const RunConfig& config, std::ostream& log) {
  config.validate();
  require_path(config.out, "--out");
  Artifacts art("report", config.out);
  const bool svg = config.format == "svg";

  struct Table {
    std::string source;  // under out/
    std::string name;    // under out/report/
    std::string title;
    double lo = 0.0, hi = 1.0;
  };
  std::vector<Table> tables{
      {"baseline/hter.csv", "baseline_hter", "Zero-effort HTER (mean over users)"},
      {"baseline/far.csv", "baseline_far", "Zero-effort FAR (mean over users)"},
      {"baseline/frr.csv", "baseline_frr", "FRR (mean over users)"},
      {"attack/dict_hter.csv", "attack_dict_hter", "Dictionary HTER (mean over users)"},
      {"attack/dict_far.csv", "attack_dict_far", "Dictionary FAR (mean over users)"},
  };
  if (fs::is_directory(config.out / "eda" / "overlap")) {
    std::vector<fs::path> grids;
    for (const auto& e : fs::directory_iterator(config.out / "eda" / "overlap")) grids.push_back(e.path());
    std::sort(grids.begin(), grids.end());
    for (const auto& g : grids) {
      const auto stem = g.stem().string();
      tables.push_back({"eda/overlap/" + g.filename().string(), "overlap_" + stem,
                        "Histogram overlap " + stem + " (row = reference level)"});
    }
  }

  std::vector<std::pair<Table, LabeledMatrix>> loaded;
  for (const auto& t : tables) {
    const auto p = config.out / t.source;
    if (!fs::exists(p)) continue;
    art.input(p, t.source);
    loaded.emplace_back(t, from_csv(read_text(p)));
  }
  const auto menagerie_path = config.out / "attack" / "menagerie.csv";
  if (loaded.empty() && !fs::exists(menagerie_path))
    throw DataError("nothing to report under " + config.out.string() + "; run train, attack or eda first");

  reset_dir(config.out / "report");
  std::string index = "artifact,source\n";
  for (auto& [t, m] : loaded) {
    // Rate grids are presented sorted by their row average.
    const bool rate_grid = t.source.rfind("eda/", 0) != 0;
    const auto shown = rate_grid ? sort_rows_by_mean(m) : m;
    art.text("report/" + t.name + ".csv", to_csv(shown));
    index += t.name + ".csv," + t.source + "\n";
    if (svg) {
      art.text("report/" + t.name + ".svg", to_svg(shown, t.title, t.lo, t.hi));
      index += t.name + ".svg," + t.source + "\n";
    }
  }

  if (fs::exists(menagerie_path)) {
    art.input(menagerie_path, "attack/menagerie.csv");
    std::map<std::string, std::array<double, 3>> counts;
    std::vector<std::string> order;
    std::istringstream in(read_text(menagerie_path));
    std::string line;
    std::getline(in, line);
    std::size_t users_max = 0;
    std::map<std::string, std::size_t> users;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string field; std::getline(ls, field, ',');) f.push_back(field);
      if (f.size() != 6) throw DataError("attack/menagerie.csv: malformed row '" + line + "'");
      const auto view = f[1] + "/" + f[2];
      if (!counts.contains(view)) {
        counts[view] = {0, 0, 0};
        order.push_back(view);
      }
      const int slot = f[5] == "unaffected" ? 0 : f[5] == "impacted" ? 1 : 2;
      counts[view][static_cast<std::size_t>(slot)] += 1;
      users_max = std::max(users_max, ++users[view]);
    }
    LabeledMatrix m("combo/kind", order, {"unaffected", "impacted", "severely_impacted"});
    for (std::size_t r = 0; r < order.size(); ++r)
      for (std::size_t c = 0; c < 3; ++c) m.at(r, c) = counts[order[r]][c];
    art.text("report/menagerie_counts.csv", to_csv(m, 0));
    index += "menagerie_counts.csv,attack/menagerie.csv\n";
    if (svg) {
      art.text("report/menagerie_counts.svg",
               to_svg(m, "Users per menagerie label", 0.0, static_cast<double>(std::max<std::size_t>(users_max, 1)), 0));
      index += "menagerie_counts.svg,attack/menagerie.csv\n";
    }
  }
  art.text("report/index.csv", index);
  art.finish(config);
  log << "report: " << loaded.size() << " tables rendered\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// synth

int run_synth(const RunConfig& config, std::ostream& log) {
  config.validate();
  require_path(config.out, "--out");
  auto sc = config.synth.scale == "full" ? SynthConfig::full_scale(config.seed) : SynthConfig::desk_scale(config.seed);
  sc.noise_scale = config.synth.noise_scale;
  if (config.synth.subjects) sc.subjects = *config.synth.subjects;
  if (config.synth.imitators || config.synth.settings) {
    const std::size_t n = config.synth.imitators.value_or(sc.imitators());
    const std::size_t per = config.synth.settings.value_or(sc.imitator_settings.empty() ? 16 : sc.imitator_settings.front());
    sc.imitator_settings.assign(n, per);
  }
  if (config.synth.subjects || config.synth.imitators) {
    // One planted clone per three targets, as far as imitators allow.
    sc.planted_clones.clear();
    if (config.synth.scale == "desk") {
      for (std::size_t i = 0; i < std::min(sc.imitators(), sc.subjects / 3); ++i) sc.planted_clones.emplace_back(i, 3 * i);
    }
  }
  sc.validate();

  for (const char* owned : {"genuine", "dictionary"}) {
    std::error_code ec;
    fs::remove_all(config.out / owned, ec);
  }
  const auto corpus = generate_corpus(sc, config.out, config.jobs);

  Artifacts art("synth", config.out);
  for (const auto& e : fs::recursive_directory_iterator(config.out)) {
    if (!e.is_regular_file()) continue;
    const auto rel = e.path().lexically_relative(config.out);
    if (rel.begin()->string() == "manifests") continue;
    const auto top = rel.begin()->string();
    if (top != "genuine" && top != "dictionary" && rel != fs::path("corpus.json")) continue;
    art.written(rel);
  }
  art.finish(config, {{"subjects", sc.subjects},
                      {"imitators", sc.imitators()},
                      {"planted_clones", sc.planted_clones.size()}});
  log << "synth: wrote " << corpus.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// command line

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gaitdict: gait dictionary-attack benchmark"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every command");

  std::string config_path, data, out_dir, format, scale;
  std::uint64_t seed = 0;
  std::size_t jobs = 0, top_k = 0, per_impostor = 0, subjects = 0, imitators = 0, settings = 0;
  double window = 0, slide = 0, severe = 0, noise_scale = 0;
  std::vector<std::string> combos, classifiers, features;

  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--jobs", jobs, "Worker threads (never changes output bytes)");
  app.add_option("--data", data, "Data root (genuine/, dictionary/manifest.json)");
  app.add_option("--out", out_dir, "Output root");
  app.add_option("--combos", combos, "Sensor combinations, e.g. a,a+g,all")->delimiter(',');
  app.add_option("--classifiers", classifiers, "knn,svm,logistic,mlp,random_forest or all")->delimiter(',');
  app.add_option("--window", window, "Window length, seconds");
  app.add_option("--slide", slide, "Window slide, seconds");
  app.add_option("--top-k", top_k, "Features kept per sensor");
  app.add_option("--per-impostor", per_impostor, "Training vectors drawn per impostor");
  app.add_option("--severe-threshold", severe, "Dictionary FAR at which a user is severely impacted");
  app.add_option("--format", format, "csv, or svg to also render heatmaps");
  app.add_option("--scale", scale, "synth: desk or full");
  app.add_option("--subjects", subjects, "synth: genuine subjects");
  app.add_option("--imitators", imitators, "synth: imitators");
  app.add_option("--settings", settings, "synth: settings per imitator");
  app.add_option("--noise-scale", noise_scale, "synth: noise multiplier");
  app.add_option("--features", features, "eda: feature names to correlate")->delimiter(',');

  const std::vector<std::pair<std::string, std::string>> commands{
      {"synth", "Generate a synthetic corpus into --out"},
      {"ingest", "Validate --data and extract features into --out/features"},
      {"train", "Train and evaluate every (user, combo, classifier) cell"},
      {"attack", "Run the dictionary attack against trained models"},
      {"eda", "Factor/feature correlations and histogram overlap grids"},
      {"report", "Render CSV/SVG summaries of stored results"},
  };
  for (const auto& [name, desc] : commands) app.add_subcommand(name, desc)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      const fs::path p(config_path);
      if (!fs::exists(p)) throw ConfigError("config file not found: " + config_path);
      config = apply_config_json(config, read_text(p), p.parent_path());
    }
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--seed")) config.seed = seed;
    if (given("--jobs")) config.jobs = jobs;
    if (given("--data")) config.data = data;
    if (given("--out")) config.out = out_dir;
    if (given("--combos")) config.combos = parse_combo_list(combos);
    if (given("--classifiers")) config.kinds = parse_kind_list(classifiers);
    if (given("--window")) config.window = window;
    if (given("--slide")) config.slide = slide;
    if (given("--top-k")) config.top_k = top_k;
    if (given("--per-impostor")) config.per_impostor = per_impostor;
    if (given("--severe-threshold")) config.severe_threshold = severe;
    if (given("--format")) config.format = format;
    if (given("--scale")) config.synth.scale = scale;
    if (given("--subjects")) config.synth.subjects = subjects;
    if (given("--imitators")) config.synth.imitators = imitators;
    if (given("--settings")) config.synth.settings = settings;
    if (given("--noise-scale")) config.synth.noise_scale = noise_scale;
    if (given("--features")) config.eda_features = features;
    config.validate();

    const auto command = app.get_subcommands().front()->get_name();
    if (command == "synth") return run_synth(config, out);
    if (command == "ingest") return run_ingest(config, out);
    if (command == "train") return run_train(config, out);
    if (command == "attack") return run_attack(config, out);
    if (command == "eda") return run_eda(config, out);
    return run_report(config, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidInput& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace gaitdict::cli
