#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaitdict/authbench.hpp"
#include "gaitdict/signal.hpp"

namespace gaitdict {

enum class Factor { speed, step_length, step_width, thigh_lift };
inline constexpr std::array<Factor, 4> kAllFactors{Factor::speed, Factor::step_length, Factor::step_width,
                                                   Factor::thigh_lift};
std::string_view to_string(Factor f);

// Ordinal levels are ranks 1..4; rank 2 is "normal".
//   step length: short, normal, long, longer
//   step width:  close, normal, wide, wider
//   thigh lift:  back, normal, front, up
inline constexpr int kNormalLevel = 2;
std::string_view level_name(Factor f, int rank);
std::optional<int> parse_level(Factor f, std::string_view name);

// 1.4, 1.6, ..., 3.0 mph.
inline constexpr double kMinSpeedMph = 1.4;
inline constexpr double kMaxSpeedMph = 3.0;
inline constexpr double kSpeedStepMph = 0.2;
std::vector<double> speed_grid();

struct FactorSetting {
  double speed_mph = 2.2;
  int step_length = kNormalLevel;
  int step_width = kNormalLevel;
  int thigh_lift = kNormalLevel;

  // Speed on the 9-point grid and ordinal ranks within 1..4.
  bool grid_conformant() const;
  // Throws InvalidInput for ranks outside 1..4 or a non-positive speed.
  void validate() const;
  // Speed in mph, or the rank of an ordinal factor.
  double level(Factor f) const;
  FactorSetting with(Factor f, double value) const;

  auto operator<=>(const FactorSetting&) const = default;
};

struct EntryKey {
  std::string imitator_id;
  FactorSetting factors;

  // "I1@2.2/normal/normal/normal" (speed, step length, step width, thigh lift).
  std::string str() const;
  // Inverse of str(); nullopt on malformed text.
  static std::optional<EntryKey> parse(std::string_view text);
  auto operator<=>(const EntryKey&) const = default;
};

struct DictionaryEntry {
  EntryKey key;
  IMURecording recording;
  bool short_recording = false;  // below the dictionary's minimum duration
};

struct DictionaryOptions {
  double min_duration_s = 60.0;
};

// Entries in canonical key order; keys are unique.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(DictionaryOptions options) : options_(options) {}

  void add(EntryKey key, IMURecording recording);
  const std::vector<DictionaryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<std::string> imitators() const;

 private:
  DictionaryOptions options_;
  std::vector<DictionaryEntry> entries_;
};

struct ManifestEntry {
  EntryKey key;
  std::map<Sensor, std::string> files;  // relative to the manifest's directory
};

// {entries: [{imitator_id, speed_mph, step_length, step_width, thigh_lift, files: {la, gy, ma, rv}}]}
std::vector<ManifestEntry> parse_dictionary_manifest(std::string_view json_text);
std::string dictionary_manifest_json(const std::vector<ManifestEntry>& entries);

// Validates keys and files, loads recordings. Duplicate keys and missing
// files are reported together in one DataError.
Dictionary build_dictionary(const std::filesystem::path& manifest_path, DictionaryOptions options = {});

// Full-schema feature rows of one dictionary entry's windows.
struct EntryFeatures {
  EntryKey key;
  FeatureMatrix features;
};

std::vector<EntryFeatures> featurize_dictionary(const Dictionary& dictionary, double window = kDefaultWindowSeconds,
                                                double slide = kDefaultSlideSeconds, std::size_t jobs = 1);

// Fraction of the entry's windows the model accepts as genuine.
double attack_entry(const AuthModel& model, const FeatureMatrix& entry_features);

struct UserAttack {
  std::vector<double> entry_fars;  // aligned with the entries passed in
  std::size_t best = 0;            // argmax; lowest canonical key on ties
  double best_far = 0.0;
};

UserAttack attack_user(const AuthModel& model, std::span<const EntryFeatures> entries);

struct AttackCell {
  CellKey key;
  EvalReport zero;
  std::vector<double> entry_fars;
  std::size_t best = 0;
  double dict_far = 0.0;
  double dict_hter = 0.0;  // (dict_far + zero.frr) / 2
};

struct AttackReport {
  std::vector<EntryKey> entries;
  std::vector<AttackCell> cells;  // canonical cell order
  std::vector<std::string> skipped;

  const AttackCell* find(const CellKey& key) const;
};

AttackReport attack_matrix(const BaselineGrid& grid, std::span<const EntryFeatures> entries, std::size_t jobs = 1);

enum class Menagerie { unaffected, impacted, severely_impacted };
std::string_view to_string(Menagerie m);

inline constexpr double kDefaultSevereThreshold = 0.5;

Menagerie classify_user(double zero_far, double best_dict_far, double severe_threshold = kDefaultSevereThreshold);

// Per-user label for one (combo, kind) view of the report.
std::map<std::string, Menagerie> classify_menagerie(const AttackReport& report, const SensorCombo& combo,
                                                    ClassifierKind kind,
                                                    double severe_threshold = kDefaultSevereThreshold);

// user,combo,kind,entry_key,entry_far
std::string attack_long_csv(const AttackReport& report);
// user,combo,kind,zero_far,zero_frr,zero_hter,dict_far,dict_hter,best_entry
std::string attack_summary_csv(const AttackReport& report);
// Per-user rows for one (combo, kind), sorted by dictionary FAR:
// zero_far, dict_far, zero_hter, dict_hter (+ menagerie label in a separate CSV column).
LabeledMatrix per_user_matrix(const AttackReport& report, const SensorCombo& combo, ClassifierKind kind);
// Mean over users, rows = combos, cols = kinds. Metric: "dict_far" or "dict_hter".
LabeledMatrix mean_attack_table(const AttackReport& report, std::string_view metric);

}  // namespace gaitdict
