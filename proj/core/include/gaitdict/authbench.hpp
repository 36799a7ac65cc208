#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaitdict/features.hpp"
#include "gaitdict/learners.hpp"
#include "gaitdict/render.hpp"

namespace gaitdict {

// Non-empty sensor subset, stored in canonical a, g, m, r order.
class SensorCombo {
 public:
  explicit SensorCombo(std::vector<Sensor> sensors);
  // "a+g", "la+gy" or "la,gy" style names.
  static SensorCombo parse(std::string_view text);

  const std::vector<Sensor>& sensors() const { return sensors_; }
  std::size_t size() const { return sensors_.size(); }
  std::string name() const;  // "a+g+m+r"

  // Canonical order: by size, then lexicographic over a < g < m < r.
  std::strong_ordering operator<=>(const SensorCombo& other) const;
  bool operator==(const SensorCombo& other) const { return sensors_ == other.sensors_; }

 private:
  std::vector<Sensor> sensors_;
};

// The 15 non-empty subsets of the four sensors, canonically ordered.
std::vector<SensorCombo> all_combos();

// subject id -> full-schema (all four sensors) feature rows for one session.
using SessionStore = std::map<std::string, FeatureMatrix>;

struct BenchConfig {
  std::size_t per_impostor = 5;
  std::size_t top_k = kDefaultTopK;
  std::size_t smote_neighbors = kDefaultSmoteNeighbors;
};

// Unbalanced training rows: all of the target's session-1 rows (gen) plus
// per_impostor rows drawn without replacement from every other subject (imp).
FeatureMatrix draw_training_rows(const std::string& target, const SessionStore& session1, std::size_t per_impostor,
                                 std::uint64_t seed);

// draw_training_rows, optionally projected onto `columns`, then SMOTE on the
// minority class until both classes have the majority count.
FeatureMatrix assemble_training_set(const std::string& target, const SessionStore& session1,
                                    std::size_t per_impostor, std::uint64_t seed,
                                    std::span<const std::size_t> columns = {},
                                    std::size_t smote_neighbors = kDefaultSmoteNeighbors);

// A per-user authenticator: frozen feature selection (indices into the full
// schema) plus a trained classifier over the selected columns.
struct AuthModel {
  std::string user;
  SensorCombo combo{{Sensor::la}};
  std::vector<std::size_t> selected;
  std::vector<std::string> selected_names;
  TrainedModel model;

  Label predict(std::span<const double> full_row) const;
  std::vector<Label> predict(const FeatureMatrix& full) const;
};

// Selection, assembly, SMOTE and training, all on session-1 data only.
AuthModel train_user_model(const std::string& user, const SensorCombo& combo, const ClassifierSpec& spec,
                           const SessionStore& session1, const BenchConfig& config = {});

std::string auth_model_to_json(const AuthModel& model);
AuthModel auth_model_from_json(std::string_view text);
// `<user>__<combo>__<kind>.json`
std::string model_filename(const std::string& user, const SensorCombo& combo, ClassifierKind kind);

struct EvalCounts {
  std::size_t genuine_accepted = 0;
  std::size_t genuine_rejected = 0;
  std::size_t impostor_accepted = 0;
  std::size_t impostor_rejected = 0;
  bool operator==(const EvalCounts&) const = default;
};

struct EvalReport {
  double far = 0.0;
  double frr = 0.0;
  double hter = 0.0;
  EvalCounts counts;

  static EvalReport from_counts(const EvalCounts& counts);
  bool operator==(const EvalReport&) const = default;
};

// FRR on the user's session-2 rows, FAR on every other subject's session-2 rows.
EvalReport evaluate_zero_effort(const AuthModel& model, const SessionStore& session2);

struct CellKey {
  std::string user;
  SensorCombo combo{{Sensor::la}};
  ClassifierKind kind = ClassifierKind::knn;
  auto operator<=>(const CellKey&) const = default;
  bool operator==(const CellKey&) const = default;
};

struct GridCell {
  CellKey key;
  std::optional<AuthModel> model;
  std::optional<EvalReport> report;
  std::string error;  // non-empty when the cell failed
  bool ok() const { return error.empty() && model && report; }
};

// Cells in canonical (user, combo, kind) order.
struct BaselineGrid {
  std::vector<GridCell> cells;

  const GridCell* find(const CellKey& key) const;
  std::vector<const GridCell*> failures() const;
  std::vector<std::string> users() const;
  std::vector<SensorCombo> combos() const;
  std::vector<ClassifierKind> kinds() const;
};

// Stable per-cell seed from the master seed and the cell identity.
std::uint64_t cell_seed(std::uint64_t master, const CellKey& key);

// Trains and evaluates one model per cell. Per-cell failures are recorded and
// the sweep continues.
BaselineGrid sweep(const SessionStore& session1, const SessionStore& session2, const std::vector<std::string>& users,
                   const std::vector<SensorCombo>& combos, const std::vector<ClassifierKind>& kinds,
                   std::uint64_t master_seed, const BenchConfig& config = {}, std::size_t jobs = 1);

// Mean over users of a rate, rows = combos, cols = kinds. Metric: "far", "frr" or "hter".
LabeledMatrix mean_rate_table(const BaselineGrid& grid, std::string_view metric);

// Per-cell CSV: user,combo,kind,far,frr,hter,<counts>,status
std::string cells_csv(const BaselineGrid& grid);
// Parses cells_csv() output back into reports keyed by cell (models are not included).
std::map<CellKey, EvalReport> read_cells_csv(const std::string& text);

}  // namespace gaitdict
