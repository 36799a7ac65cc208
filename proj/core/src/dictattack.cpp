#include "gaitdict/dictattack.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <set>

#include "gaitdict/error.hpp"
#include "gaitdict/parallel.hpp"
#include "gaitdict/recording_io.hpp"
#include "gaitdict/render.hpp"

namespace gaitdict {

namespace {

constexpr std::array<std::array<std::string_view, 4>, 3> kLevelNames{{
    {"short", "normal", "long", "longer"},
    {"close", "normal", "wide", "wider"},
    {"back", "normal", "front", "up"},
}};

}  // namespace

std::string_view to_string(Factor f) {
  switch (f) {
    case Factor::speed: return "speed";
    case Factor::step_length: return "step_length";
    case Factor::step_width: return "step_width";
    case Factor::thigh_lift: return "thigh_lift";
  }
  return "?";
}

std::string_view level_name(Factor f, int rank) {
  if (f == Factor::speed || rank < 1 || rank > 4) throw InvalidInput("no level name for this factor/rank");
  return kLevelNames[static_cast<std::size_t>(f) - 1][static_cast<std::size_t>(rank - 1)];
}

std::optional<int> parse_level(Factor f, std::string_view name) {
  if (f == Factor::speed) return std::nullopt;
  const auto& names = kLevelNames[static_cast<std::size_t>(f) - 1];
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

std::vector<double> speed_grid() {
  std::vector<double> out;
  for (int i = 0; i <= 8; ++i) out.push_back(std::round((kMinSpeedMph + kSpeedStepMph * i) * 10.0) / 10.0);
  return out;
}

bool FactorSetting::grid_conformant() const {
  const auto grid = speed_grid();
  const bool on_grid = std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(g - speed_mph) < 1e-9; });
  auto ok = [](int r) { return r >= 1 && r <= 4; };
  return on_grid && ok(step_length) && ok(step_width) && ok(thigh_lift);
}

void FactorSetting::validate() const {
  if (!(speed_mph > 0.0) || !std::isfinite(speed_mph)) throw InvalidInput("speed must be positive");
  for (int r : {step_length, step_width, thigh_lift}) {
    if (r < 1 || r > 4) throw InvalidInput("factor level rank " + std::to_string(r) + " outside 1..4");
  }
}

double FactorSetting::level(Factor f) const {
  switch (f) {
    case Factor::speed: return speed_mph;
    case Factor::step_length: return step_length;
    case Factor::step_width: return step_width;
    case Factor::thigh_lift: return thigh_lift;
  }
  return 0.0;
}

FactorSetting FactorSetting::with(Factor f, double value) const {
  FactorSetting out = *this;
  switch (f) {
    case Factor::speed: out.speed_mph = value; break;
    case Factor::step_length: out.step_length = static_cast<int>(value); break;
    case Factor::step_width: out.step_width = static_cast<int>(value); break;
    case Factor::thigh_lift: out.thigh_lift = static_cast<int>(value); break;
  }
  return out;
}

std::string EntryKey::str() const {
  return imitator_id + "@" + format_fixed(factors.speed_mph, 1) + "/" +
         std::string(level_name(Factor::step_length, factors.step_length)) + "/" +
         std::string(level_name(Factor::step_width, factors.step_width)) + "/" +
         std::string(level_name(Factor::thigh_lift, factors.thigh_lift));
}

std::optional<EntryKey> EntryKey::parse(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos || at == 0) return std::nullopt;
  std::vector<std::string_view> parts;
  std::string_view rest = text.substr(at + 1);
  for (std::size_t slash; (slash = rest.find('/')) != std::string_view::npos; rest.remove_prefix(slash + 1))
    parts.push_back(rest.substr(0, slash));
  parts.push_back(rest);
  if (parts.size() != 4) return std::nullopt;
  EntryKey key;
  key.imitator_id = std::string(text.substr(0, at));
  const auto [end, ec] = std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), key.factors.speed_mph);
  if (ec != std::errc() || end != parts[0].data() + parts[0].size() || !(key.factors.speed_mph > 0.0))
    return std::nullopt;
  const auto sl = parse_level(Factor::step_length, parts[1]);
  const auto sw = parse_level(Factor::step_width, parts[2]);
  const auto tl = parse_level(Factor::thigh_lift, parts[3]);
  if (!sl || !sw || !tl) return std::nullopt;
  key.factors.step_length = *sl;
  key.factors.step_width = *sw;
  key.factors.thigh_lift = *tl;
  return key;
}

void Dictionary::add(EntryKey key, IMURecording recording) {
  key.factors.validate();
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const DictionaryEntry& e, const EntryKey& k) { return e.key < k; });
  if (it != entries_.end() && it->key == key) throw InvalidInput("duplicate dictionary key " + key.str());
  const bool too_short = recording.duration() < options_.min_duration_s;
  entries_.insert(it, DictionaryEntry{std::move(key), std::move(recording), too_short});
}

std::vector<std::string> Dictionary::imitators() const {
  std::set<std::string> ids;
  for (const auto& e : entries_) ids.insert(e.key.imitator_id);
  return {ids.begin(), ids.end()};
}

std::vector<ManifestEntry> parse_dictionary_manifest(std::string_view json_text) {
  std::vector<ManifestEntry> out;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& e : j.at("entries")) {
      ManifestEntry m;
      m.key.imitator_id = e.at("imitator_id").get<std::string>();
      if (m.key.imitator_id.empty()) throw DataError("dictionary manifest: empty imitator_id");
      m.key.factors.speed_mph = e.at("speed_mph").get<double>();
      auto level = [&](Factor f, const char* field) {
        const auto name = e.at(field).get<std::string>();
        const auto rank = parse_level(f, name);
        if (!rank) throw DataError("dictionary manifest: unknown " + std::string(field) + " level '" + name + "'");
        return *rank;
      };
      m.key.factors.step_length = level(Factor::step_length, "step_length");
      m.key.factors.step_width = level(Factor::step_width, "step_width");
      m.key.factors.thigh_lift = level(Factor::thigh_lift, "thigh_lift");
      for (const auto& [name, path] : e.at("files").items()) {
        const auto sensor = parse_sensor(name);
        if (!sensor) throw DataError("dictionary manifest: unknown sensor '" + name + "'");
        m.files.emplace(*sensor, path.get<std::string>());
      }
      out.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed dictionary manifest: ") + e.what());
  }
  return out;
}

std::string dictionary_manifest_json(const std::vector<ManifestEntry>& entries) {
  nlohmann::ordered_json j;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& m : entries) {
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    for (const auto& [sensor, path] : m.files) files[std::string(to_string(sensor))] = path;
    nlohmann::ordered_json e;
    e["imitator_id"] = m.key.imitator_id;
    e["speed_mph"] = m.key.factors.speed_mph;
    e["step_length"] = level_name(Factor::step_length, m.key.factors.step_length);
    e["step_width"] = level_name(Factor::step_width, m.key.factors.step_width);
    e["thigh_lift"] = level_name(Factor::thigh_lift, m.key.factors.thigh_lift);
    e["files"] = files;
    j["entries"].push_back(std::move(e));
  }
  return j.dump(1) + "\n";
}

Dictionary build_dictionary(const std::filesystem::path& manifest_path, DictionaryOptions options) {
  const auto manifest = parse_dictionary_manifest(read_text(manifest_path));
  const auto base = manifest_path.parent_path();
  std::vector<std::string> problems;
  std::set<EntryKey> seen;
  for (const auto& m : manifest) {
    if (!seen.insert(m.key).second) problems.push_back("duplicate key " + m.key.str());
    if (m.files.empty()) problems.push_back(m.key.str() + ": no sensor files listed");
    for (const auto& [sensor, rel] : m.files) {
      if (!std::filesystem::exists(base / rel)) problems.push_back(m.key.str() + ": missing file " + (base / rel).string());
    }
  }
  if (!problems.empty()) {
    std::string msg = "dictionary manifest " + manifest_path.string() + " has " + std::to_string(problems.size()) +
                      " problem(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  Dictionary dict(options);
  for (const auto& m : manifest) {
    std::map<Sensor, std::filesystem::path> files;
    for (const auto& [sensor, rel] : m.files) files.emplace(sensor, base / rel);
    dict.add(m.key, load_recording(files, m.key.imitator_id, m.key.str()));
  }
  return dict;
}

std::vector<EntryFeatures> featurize_dictionary(const Dictionary& dictionary, double window, double slide,
                                                std::size_t jobs) {
  std::vector<EntryFeatures> out(dictionary.size());
  parallel_for(dictionary.size(), jobs, [&](std::size_t i) {
    const auto& entry = dictionary.entries()[i];
    out[i] = EntryFeatures{entry.key, featurize_recording(preprocess(entry.recording), kAllSensors, window, slide)};
  });
  return out;
}

double attack_entry(const AuthModel& model, const FeatureMatrix& entry_features) {
  if (entry_features.empty()) throw InvalidInput("dictionary entry yields zero windows");
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < entry_features.rows(); ++i) {
    accepted += model.predict(entry_features.row(i)) == Label::genuine;
  }
  return static_cast<double>(accepted) / static_cast<double>(entry_features.rows());
}

UserAttack attack_user(const AuthModel& model, std::span<const EntryFeatures> entries) {
  if (entries.empty()) throw InvalidInput("attack_user: empty dictionary");
  UserAttack out;
  out.entry_fars.reserve(entries.size());
  for (const auto& e : entries) out.entry_fars.push_back(attack_entry(model, e.features));
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const double cur = out.entry_fars[i], best = out.entry_fars[out.best];
    if (cur > best || (cur == best && entries[i].key < entries[out.best].key)) out.best = i;
  }
  out.best_far = out.entry_fars[out.best];
  return out;
}

const AttackCell* AttackReport::find(const CellKey& key) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), key,
                             [](const AttackCell& c, const CellKey& k) { return c.key < k; });
  return it != cells.end() && it->key == key ? &*it : nullptr;
}

AttackReport attack_matrix(const BaselineGrid& grid, std::span<const EntryFeatures> entries, std::size_t jobs) {
  if (grid.cells.empty()) throw InvalidInput("attack_matrix: empty baseline grid");
  AttackReport report;
  for (const auto& e : entries) report.entries.push_back(e.key);
  std::vector<const GridCell*> live;
  for (const auto& cell : grid.cells) {
    if (cell.ok()) {
      live.push_back(&cell);
    } else {
      report.skipped.push_back(cell.key.user + "/" + cell.key.combo.name() + "/" +
                               std::string(to_string(cell.key.kind)) + ": " + cell.error);
    }
  }
  report.cells.resize(live.size());
  parallel_for(live.size(), jobs, [&](std::size_t i) {
    const GridCell& cell = *live[i];
    const auto attack = attack_user(*cell.model, entries);
    AttackCell& out = report.cells[i];
    out.key = cell.key;
    out.zero = *cell.report;
    out.entry_fars = attack.entry_fars;
    out.best = attack.best;
    out.dict_far = attack.best_far;
    out.dict_hter = (out.dict_far + out.zero.frr) / 2.0;
  });
  return report;
}

std::string_view to_string(Menagerie m) {
  switch (m) {
    case Menagerie::unaffected: return "unaffected";
    case Menagerie::impacted: return "impacted";
    case Menagerie::severely_impacted: return "severely_impacted";
  }
  return "?";
}

Menagerie classify_user(double zero_far, double best_dict_far, double severe_threshold) {
  if (best_dict_far <= zero_far) return Menagerie::unaffected;
  if (best_dict_far >= severe_threshold) return Menagerie::severely_impacted;
  return Menagerie::impacted;
}

std::map<std::string, Menagerie> classify_menagerie(const AttackReport& report, const SensorCombo& combo,
                                                    ClassifierKind kind, double severe_threshold) {
  std::map<std::string, Menagerie> out;
  for (const auto& cell : report.cells) {
    if (cell.key.combo == combo && cell.key.kind == kind) {
      out.emplace(cell.key.user, classify_user(cell.zero.far, cell.dict_far, severe_threshold));
    }
  }
  return out;
}

std::string attack_long_csv(const AttackReport& report) {
  std::string out = "user,combo,kind,entry_key,entry_far\n";
  for (const auto& cell : report.cells) {
    const std::string prefix =
        cell.key.user + "," + cell.key.combo.name() + "," + std::string(to_string(cell.key.kind)) + ",";
    for (std::size_t e = 0; e < cell.entry_fars.size(); ++e) {
      out += prefix + report.entries[e].str() + "," + format_fixed(cell.entry_fars[e], 4) + "\n";
    }
  }
  return out;
}

std::string attack_summary_csv(const AttackReport& report) {
  std::string out = "user,combo,kind,zero_far,zero_frr,zero_hter,dict_far,dict_hter,best_entry\n";
  for (const auto& c : report.cells) {
    out += c.key.user + "," + c.key.combo.name() + "," + std::string(to_string(c.key.kind)) + "," +
           format_fixed(c.zero.far, 4) + "," + format_fixed(c.zero.frr, 4) + "," + format_fixed(c.zero.hter, 4) +
           "," + format_fixed(c.dict_far, 4) + "," + format_fixed(c.dict_hter, 4) + "," +
           report.entries.at(c.best).str() + "\n";
  }
  return out;
}

LabeledMatrix per_user_matrix(const AttackReport& report, const SensorCombo& combo, ClassifierKind kind) {
  std::vector<const AttackCell*> rows;
  for (const auto& c : report.cells) {
    if (c.key.combo == combo && c.key.kind == kind) rows.push_back(&c);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const AttackCell* a, const AttackCell* b) { return a->dict_far < b->dict_far; });
  LabeledMatrix m("user", {}, {"zero_far", "dict_far", "zero_hter", "dict_hter"});
  for (const auto* c : rows) {
    m.row_labels.push_back(c->key.user);
    m.values.insert(m.values.end(), {c->zero.far, c->dict_far, c->zero.hter, c->dict_hter});
  }
  return m;
}

LabeledMatrix mean_attack_table(const AttackReport& report, std::string_view metric) {
  std::vector<SensorCombo> combos;
  std::vector<ClassifierKind> kinds;
  for (const auto& c : report.cells) {
    if (std::find(combos.begin(), combos.end(), c.key.combo) == combos.end()) combos.push_back(c.key.combo);
    if (std::find(kinds.begin(), kinds.end(), c.key.kind) == kinds.end()) kinds.push_back(c.key.kind);
  }
  std::sort(combos.begin(), combos.end());
  std::sort(kinds.begin(), kinds.end());
  std::vector<std::string> rows, cols;
  for (const auto& c : combos) rows.push_back(c.name());
  for (auto k : kinds) cols.emplace_back(to_string(k));
  LabeledMatrix m("combo", rows, cols);
  for (std::size_t r = 0; r < combos.size(); ++r) {
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& c : report.cells) {
        if (!(c.key.combo == combos[r]) || c.key.kind != kinds[k]) continue;
        sum += metric == "dict_hter" ? c.dict_hter : metric == "zero_far" ? c.zero.far
               : metric == "zero_hter"                  ? c.zero.hter
                                                        : c.dict_far;
        ++n;
      }
      if (n) m.at(r, k) = sum / static_cast<double>(n);
    }
  }
  return m;
}

}  // namespace gaitdict
