#include "gaitdict/authbench.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "gaitdict/error.hpp"
#include "gaitdict/parallel.hpp"
#include "gaitdict/recording_io.hpp"
#include "gaitdict/seeding.hpp"
#include "json_internal.hpp"

namespace gaitdict {

SensorCombo::SensorCombo(std::vector<Sensor> sensors) : sensors_(std::move(sensors)) {
  std::sort(sensors_.begin(), sensors_.end());
  sensors_.erase(std::unique(sensors_.begin(), sensors_.end()), sensors_.end());
  if (sensors_.empty()) throw InvalidInput("sensor combination must not be empty");
}

SensorCombo SensorCombo::parse(std::string_view text) {
  std::vector<Sensor> sensors;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find_first_of("+,", pos);
    const auto token = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    const auto sensor = parse_sensor(token);
    if (!sensor) throw InvalidInput("unknown sensor '" + std::string(token) + "' in combination '" + std::string(text) + "'");
    sensors.push_back(*sensor);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return SensorCombo(std::move(sensors));
}

std::string SensorCombo::name() const {
  std::string out;
  for (Sensor s : sensors_) {
    if (!out.empty()) out += '+';
    out += sensor_letter(s);
  }
  return out;
}

std::strong_ordering SensorCombo::operator<=>(const SensorCombo& other) const {
  if (auto c = sensors_.size() <=> other.sensors_.size(); c != 0) return c;
  return sensors_ <=> other.sensors_;
}

std::vector<SensorCombo> all_combos() {
  std::vector<SensorCombo> out;
  for (unsigned mask = 1; mask < 16; ++mask) {
    std::vector<Sensor> s;
    for (unsigned b = 0; b < 4; ++b) {
      if (mask & (1u << b)) s.push_back(kAllSensors[b]);
    }
    out.emplace_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

FeatureMatrix draw_training_rows(const std::string& target, const SessionStore& session1, std::size_t per_impostor,
                                 std::uint64_t seed) {
  if (per_impostor == 0) throw InvalidInput("per_impostor must be at least 1");
  const auto it = session1.find(target);
  if (it == session1.end() || it->second.empty()) {
    throw InvalidInput("subject " + target + " has no session-1 feature vectors");
  }
  if (session1.size() < 2) throw InvalidInput("no impostor subjects available for " + target);

  FeatureMatrix out = it->second;
  out.set_all_labels(Label::genuine);
  for (const auto& [subject, rows] : session1) {
    if (subject == target) continue;
    if (rows.names() != out.names()) throw InvalidInput("subject " + subject + " has a different feature schema");
    std::vector<std::size_t> idx(rows.rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, {"impostor", subject}));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(per_impostor, idx.size()));
    std::sort(idx.begin(), idx.end());
    FeatureMatrix picked = rows.select_rows(idx);
    picked.set_all_labels(Label::impostor);
    out.append_rows(picked);
  }
  if (out.count(Label::impostor) == 0) throw InvalidInput("impostor subjects of " + target + " have no rows");
  return out;
}

namespace {

FeatureMatrix by_label(const FeatureMatrix& m, Label label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m.labels()[i] == label) idx.push_back(i);
  }
  return m.select_rows(idx);
}

// Oversamples whichever class is smaller up to the larger class's count.
FeatureMatrix balance(const FeatureMatrix& rows, std::uint64_t seed, std::size_t neighbors) {
  FeatureMatrix gen = by_label(rows, Label::genuine);
  FeatureMatrix imp = by_label(rows, Label::impostor);
  if (gen.rows() < imp.rows()) gen = smote(gen, imp.rows(), neighbors, seed);
  else if (imp.rows() < gen.rows()) imp = smote(imp, gen.rows(), neighbors, seed);
  gen.append_rows(imp);
  return gen;
}

std::string context(const std::string& user, const SensorCombo& combo, ClassifierKind kind) {
  return "user " + user + ", combo " + combo.name() + ", " + std::string(to_string(kind)) + ": ";
}

}  // namespace

FeatureMatrix assemble_training_set(const std::string& target, const SessionStore& session1,
                                    std::size_t per_impostor, std::uint64_t seed,
                                    std::span<const std::size_t> columns, std::size_t smote_neighbors) {
  FeatureMatrix rows = draw_training_rows(target, session1, per_impostor, derive_seed(seed, {"draw"}));
  if (!columns.empty()) rows = rows.select_columns(columns);
  return balance(rows, derive_seed(seed, {"smote"}), smote_neighbors);
}

Label AuthModel::predict(std::span<const double> full_row) const {
  std::vector<double> picked(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i] >= full_row.size()) throw InvalidInput("feature row is narrower than the model's selection");
    picked[i] = full_row[selected[i]];
  }
  return model.predict(picked);
}

std::vector<Label> AuthModel::predict(const FeatureMatrix& full) const {
  std::vector<Label> out(full.rows());
  for (std::size_t i = 0; i < full.rows(); ++i) out[i] = predict(full.row(i));
  return out;
}

AuthModel train_user_model(const std::string& user, const SensorCombo& combo, const ClassifierSpec& spec,
                           const SessionStore& session1, const BenchConfig& config) {
  try {
    FeatureMatrix rows = draw_training_rows(user, session1, config.per_impostor, derive_seed(spec.seed, {"draw"}));
    auto selected = select_per_sensor(rows, combo.sensors(), config.top_k);
    FeatureMatrix training =
        balance(rows.select_columns(selected), derive_seed(spec.seed, {"smote"}), config.smote_neighbors);
    TrainedModel model = train(spec, training);
    return AuthModel{user, combo, std::move(selected), training.names(), std::move(model)};
  } catch (const InvalidInput& e) {
    throw InvalidInput(context(user, combo, spec.kind) + e.what());
  }
}

std::string auth_model_to_json(const AuthModel& model) {
  nlohmann::json j{{"format", "gaitdict-auth-model"},
                   {"version", 1},
                   {"user", model.user},
                   {"combo", model.combo.name()},
                   {"selected", model.selected},
                   {"selected_names", model.selected_names},
                   {"model", detail::model_to_json_value(model.model)}};
  return j.dump(1) + "\n";
}

AuthModel auth_model_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "gaitdict-auth-model" || j.at("version") != 1) {
      throw DataError("not a version-1 gaitdict auth model");
    }
    AuthModel m{j.at("user").get<std::string>(), SensorCombo::parse(j.at("combo").get<std::string>()),
                j.at("selected").get<std::vector<std::size_t>>(),
                j.at("selected_names").get<std::vector<std::string>>(),
                detail::model_from_json_value(j.at("model"))};
    if (m.selected.size() != m.model.dims()) throw DataError("selection width does not match model dimensions");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed auth model: ") + e.what());
  } catch (const InvalidInput& e) {
    throw DataError(std::string("invalid auth model: ") + e.what());
  }
}

std::string model_filename(const std::string& user, const SensorCombo& combo, ClassifierKind kind) {
  return user + "__" + combo.name() + "__" + std::string(to_string(kind)) + ".json";
}

EvalReport EvalReport::from_counts(const EvalCounts& c) {
  EvalReport r;
  r.counts = c;
  const std::size_t gen = c.genuine_accepted + c.genuine_rejected;
  const std::size_t imp = c.impostor_accepted + c.impostor_rejected;
  if (gen == 0 || imp == 0) throw InvalidInput("evaluation needs both genuine and impostor probes");
  r.frr = static_cast<double>(c.genuine_rejected) / static_cast<double>(gen);
  r.far = static_cast<double>(c.impostor_accepted) / static_cast<double>(imp);
  r.hter = (r.far + r.frr) / 2.0;
  return r;
}

EvalReport evaluate_zero_effort(const AuthModel& model, const SessionStore& session2) {
  EvalCounts c;
  const auto own = session2.find(model.user);
  if (own == session2.end() || own->second.empty()) {
    throw InvalidInput("subject " + model.user + " has no session-2 probes");
  }
  for (Label l : model.predict(own->second)) (l == Label::genuine ? c.genuine_accepted : c.genuine_rejected)++;
  for (const auto& [subject, rows] : session2) {
    if (subject == model.user) continue;
    for (Label l : model.predict(rows)) (l == Label::genuine ? c.impostor_accepted : c.impostor_rejected)++;
  }
  if (c.impostor_accepted + c.impostor_rejected == 0) {
    throw InvalidInput("no impostor session-2 probes for " + model.user);
  }
  return EvalReport::from_counts(c);
}

const GridCell* BaselineGrid::find(const CellKey& key) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), key,
                             [](const GridCell& c, const CellKey& k) { return c.key < k; });
  return it != cells.end() && it->key == key ? &*it : nullptr;
}

std::vector<const GridCell*> BaselineGrid::failures() const {
  std::vector<const GridCell*> out;
  for (const auto& c : cells) {
    if (!c.ok()) out.push_back(&c);
  }
  return out;
}

std::vector<std::string> BaselineGrid::users() const {
  std::vector<std::string> out;
  for (const auto& c : cells) {
    if (out.empty() || out.back() != c.key.user) out.push_back(c.key.user);
  }
  return out;
}

std::vector<SensorCombo> BaselineGrid::combos() const {
  std::vector<SensorCombo> out;
  for (const auto& c : cells) {
    if (std::find(out.begin(), out.end(), c.key.combo) == out.end()) out.push_back(c.key.combo);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ClassifierKind> BaselineGrid::kinds() const {
  std::vector<ClassifierKind> out;
  for (const auto& c : cells) {
    if (std::find(out.begin(), out.end(), c.key.kind) == out.end()) out.push_back(c.key.kind);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t cell_seed(std::uint64_t master, const CellKey& key) {
  return derive_seed(master, {"cell", key.user, key.combo.name(), to_string(key.kind)});
}

BaselineGrid sweep(const SessionStore& session1, const SessionStore& session2, const std::vector<std::string>& users,
                   const std::vector<SensorCombo>& combos, const std::vector<ClassifierKind>& kinds,
                   std::uint64_t master_seed, const BenchConfig& config, std::size_t jobs) {
  BaselineGrid grid;
  for (const auto& u : users) {
    for (const auto& c : combos) {
      for (auto k : kinds) grid.cells.push_back(GridCell{CellKey{u, c, k}, std::nullopt, std::nullopt, {}});
    }
  }
  std::sort(grid.cells.begin(), grid.cells.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  grid.cells.erase(std::unique(grid.cells.begin(), grid.cells.end(),
                               [](const auto& a, const auto& b) { return a.key == b.key; }),
                   grid.cells.end());

  parallel_for(grid.cells.size(), jobs, [&](std::size_t i) {
    GridCell& cell = grid.cells[i];
    try {
      const auto spec = ClassifierSpec::defaults(cell.key.kind, cell_seed(master_seed, cell.key));
      cell.model = train_user_model(cell.key.user, cell.key.combo, spec, session1, config);
      cell.report = evaluate_zero_effort(*cell.model, session2);
    } catch (const std::exception& e) {
      cell.model.reset();
      cell.report.reset();
      cell.error = e.what();
      if (cell.error.empty()) cell.error = "unknown failure";
    }
  });
  return grid;
}

LabeledMatrix mean_rate_table(const BaselineGrid& grid, std::string_view metric) {
  const auto combos = grid.combos();
  const auto kinds = grid.kinds();
  std::vector<std::string> rows, cols;
  for (const auto& c : combos) rows.push_back(c.name());
  for (auto k : kinds) cols.emplace_back(to_string(k));
  LabeledMatrix m("combo", rows, cols);
  for (std::size_t r = 0; r < combos.size(); ++r) {
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& cell : grid.cells) {
        if (!cell.ok() || !(cell.key.combo == combos[r]) || cell.key.kind != kinds[k]) continue;
        const auto& rep = *cell.report;
        sum += metric == "far" ? rep.far : metric == "frr" ? rep.frr : rep.hter;
        ++n;
      }
      if (n) m.at(r, k) = sum / static_cast<double>(n);
    }
  }
  return m;
}

namespace {

constexpr std::string_view kCellsHeader =
    "user,combo,kind,far,frr,hter,genuine_accepted,genuine_rejected,impostor_accepted,impostor_rejected,status";

}  // namespace

std::string cells_csv(const BaselineGrid& grid) {
  std::string out(kCellsHeader);
  out += '\n';
  for (const auto& cell : grid.cells) {
    out += cell.key.user + "," + cell.key.combo.name() + "," + std::string(to_string(cell.key.kind)) + ",";
    if (cell.ok()) {
      const auto& r = *cell.report;
      out += format_double(r.far) + "," + format_double(r.frr) + "," + format_double(r.hter) + "," +
             std::to_string(r.counts.genuine_accepted) + "," + std::to_string(r.counts.genuine_rejected) + "," +
             std::to_string(r.counts.impostor_accepted) + "," + std::to_string(r.counts.impostor_rejected) + ",ok\n";
    } else {
      std::string msg = cell.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out += ",,,,,,,error: " + msg + "\n";
    }
  }
  return out;
}

std::map<CellKey, EvalReport> read_cells_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCellsHeader) throw DataError("cells CSV has an unexpected header");
  std::map<CellKey, EvalReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string field; std::getline(ls, field, ',');) f.push_back(field);
    if (f.size() < 11) throw DataError("cells CSV row has too few fields: " + line);
    if (f[10] != "ok") continue;
    const auto kind = parse_kind(f[2]);
    if (!kind) throw DataError("cells CSV: unknown classifier " + f[2]);
    EvalCounts c{std::stoull(f[6]), std::stoull(f[7]), std::stoull(f[8]), std::stoull(f[9])};
    out.emplace(CellKey{f[0], SensorCombo::parse(f[1]), *kind}, EvalReport::from_counts(c));
  }
  return out;
}

}  // namespace gaitdict
