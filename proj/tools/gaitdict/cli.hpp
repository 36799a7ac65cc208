#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaitdict/authbench.hpp"
#include "gaitdict/learners.hpp"

namespace gaitdict::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kInternalError = 4,
  kPartialFailure = 5,
};

struct SynthOptions {
  std::string scale = "desk";  // desk | full
  // Overrides of the scale preset.
  std::optional<std::size_t> subjects;
  std::optional<std::size_t> imitators;
  std::optional<std::size_t> settings;
  double noise_scale = 1.0;
};

// Precedence: built-in defaults, then the --config JSON file, then flags.
struct RunConfig {
  std::filesystem::path data;
  std::filesystem::path out;
  std::uint64_t seed = 7;
  double window = 8.0;
  double slide = 4.0;
  std::size_t per_impostor = 5;
  std::size_t top_k = 30;
  std::vector<SensorCombo> combos = all_combos();
  std::vector<ClassifierKind> kinds{kAllKinds.begin(), kAllKinds.end()};
  double severe_threshold = 0.5;
  std::size_t jobs = 1;
  std::string format = "csv";  // csv | svg (svg also writes the csv)
  SynthOptions synth;
  std::vector<std::string> eda_features;  // empty: every la_* feature

  void validate() const;
  // Everything that can change output bytes. Paths and jobs are left out.
  std::string to_json() const;
};

// Applies a JSON config document on top of `base`. Relative paths resolve
// against `dir`. Unknown keys are a ConfigError.
RunConfig apply_config_json(RunConfig base, std::string_view text, const std::filesystem::path& dir);

std::vector<SensorCombo> parse_combo_list(const std::vector<std::string>& items);
std::vector<ClassifierKind> parse_kind_list(const std::vector<std::string>& items);

// Individual stages. Each writes <out>/manifests/<stage>.json and returns an exit code.
int run_synth(const RunConfig& config, std::ostream& log);
int run_ingest(const RunConfig& config, std::ostream& log);
int run_train(const RunConfig& config, std::ostream& log);
int run_attack(const RunConfig& config, std::ostream& log);
int run_eda(const RunConfig& config, std::ostream& log);
int run_report(const RunConfig& config, std::ostream& log);

// Full command line, argv[0] excluded. Errors are reported on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gaitdict::cli
