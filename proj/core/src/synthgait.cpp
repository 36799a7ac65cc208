#include "gaitdict/synthgait.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>

#include "gaitdict/error.hpp"
#include "gaitdict/parallel.hpp"
#include "gaitdict/recording_io.hpp"
#include "gaitdict/render.hpp"
#include "gaitdict/seeding.hpp"

namespace gaitdict {

namespace {

constexpr std::array<Sensor, 4> kSensorOrder{Sensor::la, Sensor::gy, Sensor::ma, Sensor::rv};
constexpr std::array<Axis, 3> kRawAxes{Axis::x, Axis::y, Axis::z};

// Typical oscillation size per sensor (m/s^2, rad/s, uT, unit quaternion part).
constexpr std::array<double, 4> kSensorScale{1.5, 1.0, 4.0, 0.05};
// Spread of the DC level across subjects.
constexpr std::array<double, 4> kOffsetSpread{0.05, 0.03, 0.5, 0.01};
constexpr double kNoiseFraction = 0.5;
// Subjects sit at a random distance d from the template: amplitudes are
// log-normal with sigma d and phases shift by kPhasePerSpread * d radians.
// d = lo + (hi - lo) u^2 keeps most subjects near the template, a few far out.
constexpr double kSpreadLo = 0.04;
constexpr double kSpreadHi = 0.35;
constexpr double kPhasePerSpread = 2.5;
constexpr std::uint64_t kTemplateSeed = 0x6a17d1c7ULL;

std::size_t sensor_index(std::size_t channel) { return channel / 3; }

// Shared gait shape every subject deviates from.
struct Template {
  std::array<std::array<double, kHarmonics>, kSynthChannels> amplitude{};
  std::array<std::array<double, kHarmonics>, kSynthChannels> phase{};
};

const Template& population_template() {
  static const Template t = [] {
    Template out;
    std::mt19937_64 rng(kTemplateSeed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 0; c < kSynthChannels; ++c) {
      for (std::size_t h = 0; h < kHarmonics; ++h) {
        out.amplitude[c][h] = kSensorScale[sensor_index(c)] * (0.3 + 0.7 * unit(rng)) / static_cast<double>(h + 1);
        out.phase[c][h] = 2.0 * std::numbers::pi * unit(rng);
      }
    }
    return out;
  }();
  return t;
}

}  // namespace

ChannelId synth_channel(std::size_t index) {
  if (index >= kSynthChannels) throw InvalidInput("synthetic channel index out of range");
  return ChannelId{kSensorOrder[index / 3], kRawAxes[index % 3]};
}

SubjectProfile make_subject_profile(std::uint64_t seed, std::string subject_id) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const auto& base = population_template();

  const double u = unit(rng);
  const double spread = kSpreadLo + (kSpreadHi - kSpreadLo) * u * u;

  SubjectProfile p;
  p.subject_id = std::move(subject_id);
  for (std::size_t c = 0; c < kSynthChannels; ++c) {
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      p.amplitude[c][h] = base.amplitude[c][h] * std::exp(spread * gauss(rng));
      p.phase[c][h] = base.phase[c][h] + kPhasePerSpread * spread * gauss(rng);
    }
    const double dc = kOffsetSpread[sensor_index(c)];
    p.offset[c] = between(-dc, dc);
    p.noise[c] = kNoiseFraction * kSensorScale[sensor_index(c)];
  }
  for (auto& row : p.sensitivity) {
    for (auto& s : row) {
      const double magnitude = between(0.3, 1.0);
      s = unit(rng) < 0.5 ? -magnitude : magnitude;
    }
  }
  p.cadence_gain = between(0.78, 0.86);
  const auto grid = speed_grid();
  p.natural.speed_mph = grid[3 + static_cast<std::size_t>(unit(rng) * 3.0) % 3];  // 2.0, 2.2 or 2.4
  return p;
}

SubjectProfile make_clone_profile(const SubjectProfile& target, std::uint64_t seed, std::string subject_id,
                                  double perturbation) {
  if (!(perturbation >= 0.0) || !std::isfinite(perturbation)) throw InvalidInput("clone perturbation must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SubjectProfile p = target;
  p.subject_id = std::move(subject_id);
  for (auto& channel : p.amplitude)
    for (auto& a : channel) a *= 1.0 + perturbation * gauss(rng);
  return p;
}

double step_length_scale(int rank) {
  switch (rank) {
    case 1: return 0.8;
    case 2: return 1.0;
    case 3: return 1.2;
    case 4: return 1.35;
    default: throw InvalidInput("step length rank must be in 1..4");
  }
}

double cadence_hz(const SubjectProfile& profile, const FactorSetting& factors) {
  factors.validate();
  return profile.cadence_gain * factors.speed_mph / step_length_scale(factors.step_length);
}

double coded_level(Factor f, const FactorSetting& factors) {
  if (f == Factor::speed) return (factors.speed_mph - 2.2) / 0.8;
  return (factors.level(f) - kNormalLevel) / 2.0;
}

IMURecording generate_recording(const SubjectProfile& profile, const FactorSetting& factors, double duration_s,
                                double rate_hz, std::uint64_t seed, const std::string& session) {
  factors.validate();
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw InvalidInput("duration must be positive");
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw InvalidInput("sampling rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  if (n == 0) throw InvalidInput("duration shorter than one sample");

  const double f0 = cadence_hz(profile, factors);
  std::array<double, 4> coded{};
  for (std::size_t f = 0; f < 4; ++f) coded[f] = coded_level(kAllFactors[f], factors);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::array<std::array<double, kHarmonics>, kSynthChannels> amp{};
  for (std::size_t c = 0; c < kSynthChannels; ++c) {
    double exponent = 0.0;
    for (std::size_t f = 0; f < 4; ++f) exponent += profile.sensitivity[f][c] * coded[f];
    const double drift = 1.0 + profile.session_drift * gauss(rng);
    for (std::size_t h = 0; h < kHarmonics; ++h)
      amp[c][h] = profile.amplitude[c][h] * drift * std::exp(kModulationDepth * exponent);
  }
  // Recordings start at an arbitrary point of the gait cycle.
  const double start_phase = 2.0 * std::numbers::pi * unit(rng);
  const double dt = 1.0 / rate_hz;

  // Stationary unit-variance AR(1) processes sampled at the recording rate.
  auto wander = [&](double tau, double scale) {
    std::vector<double> w(n, 0.0);
    if (scale == 0.0) return w;
    const double a = std::exp(-dt / tau);
    const double b = std::sqrt(1.0 - a * a);
    double state = gauss(rng);
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = scale * state;
      state = a * state + b * gauss(rng);
    }
    return w;
  };
  const auto cadence = wander(kCadenceWanderTau, profile.cadence_jitter);
  std::vector<double> theta(n);
  double acc = start_phase;
  for (std::size_t k = 0; k < n; ++k) {
    theta[k] = acc;
    acc += 2.0 * std::numbers::pi * f0 * (1.0 + cadence[k]) * dt;
  }

  std::map<ChannelId, SignalChannel> channels;
  for (std::size_t c = 0; c < kSynthChannels; ++c) {
    const auto envelope = wander(kEnvelopeWanderTau, profile.amplitude_jitter);
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
      double v = 0.0;
      for (std::size_t h = 0; h < kHarmonics; ++h) {
        if (amp[c][h] == 0.0) continue;
        v += amp[c][h] * std::sin(static_cast<double>(h + 1) * theta[k] + profile.phase[c][h]);
      }
      v = profile.offset[c] + v * (1.0 + envelope[k]);
      if (profile.noise[c] > 0.0) v += profile.noise[c] * gauss(rng);
      x[k] = v;
    }
    channels.emplace(synth_channel(c), SignalChannel(std::move(x), rate_hz));
  }
  return IMURecording(profile.subject_id, session, std::move(channels));
}

std::vector<FactorSetting> imitator_settings(const FactorSetting& natural, std::size_t count) {
  std::vector<FactorSetting> out;
  for (double v : speed_grid()) out.push_back(FactorSetting{v, kNormalLevel, kNormalLevel, kNormalLevel});
  const FactorSetting base{natural.speed_mph, kNormalLevel, kNormalLevel, kNormalLevel};
  for (int rank : {1, 3, 4}) {
    for (Factor f : {Factor::step_length, Factor::step_width, Factor::thigh_lift})
      out.push_back(base.with(f, rank));
  }
  for (int sl : {1, 3, 4})
    for (int sw : {1, 3, 4}) out.push_back(base.with(Factor::step_length, sl).with(Factor::step_width, sw));
  if (count > out.size())
    throw InvalidInput("at most " + std::to_string(out.size()) + " settings per imitator are supported");
  out.resize(count);
  return out;
}

SynthConfig SynthConfig::desk_scale(std::uint64_t seed) {
  SynthConfig c;
  c.master_seed = seed;
  return c;
}

SynthConfig SynthConfig::full_scale(std::uint64_t seed) {
  SynthConfig c;
  c.master_seed = seed;
  c.subjects = 55;
  // 178 entries over 9 imitators.
  c.imitator_settings = {21, 21, 21, 21, 21, 21, 20, 16, 16};
  c.planted_clones.clear();
  return c;
}

void SynthConfig::validate() const {
  if (subjects < 1) throw ConfigError("synth: subjects must be >= 1");
  if (sessions < 1) throw ConfigError("synth: sessions must be >= 1");
  if (!(session_duration_s > 0.0)) throw ConfigError("synth: session duration must be positive");
  if (!(entry_duration_s > 0.0)) throw ConfigError("synth: entry duration must be positive");
  if (!(sampling_rate > 0.0) || !std::isfinite(sampling_rate)) throw ConfigError("synth: sampling rate must be positive");
  if (!(noise_scale >= 0.0)) throw ConfigError("synth: noise scale must be >= 0");
  if (!(clone_perturbation >= 0.0)) throw ConfigError("synth: clone perturbation must be >= 0");
  for (auto n : imitator_settings) {
    if (n < 1 || n > 27) throw ConfigError("synth: settings per imitator must be in 1..27");
  }
  std::vector<bool> taken(imitators(), false);
  for (auto [imitator, subject] : planted_clones) {
    if (imitator >= imitators() || subject >= subjects)
      throw ConfigError("synth: planted clone pair out of range");
    if (taken[imitator]) throw ConfigError("synth: imitator " + imitator_name(imitator) + " cloned twice");
    taken[imitator] = true;
  }
}

std::string subject_name(const SynthConfig& config, std::size_t index) {
  const int width = config.subjects >= 100 ? 3 : 2;
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%0*zu", width, index + 1);
  return buf;
}

std::string imitator_name(std::size_t index) { return "I" + std::to_string(index + 1); }

namespace {

struct Plan {
  std::vector<SubjectProfile> subjects;
  std::vector<SubjectProfile> imitators;
  std::vector<std::optional<std::size_t>> clone_of;
  std::vector<EntryKey> entry_keys;
  std::vector<std::size_t> entry_imitator;
};

Plan make_plan(const SynthConfig& config) {
  config.validate();
  Plan plan;
  for (std::size_t i = 0; i < config.subjects; ++i) {
    const auto id = subject_name(config, i);
    auto p = make_subject_profile(derive_seed(config.master_seed, {"subject", id}), id);
    for (auto& s : p.noise) s *= config.noise_scale;
    plan.subjects.push_back(std::move(p));
  }
  plan.clone_of.assign(config.imitators(), std::nullopt);
  for (auto [imitator, subject] : config.planted_clones) plan.clone_of[imitator] = subject;
  for (std::size_t i = 0; i < config.imitators(); ++i) {
    const auto id = imitator_name(i);
    SubjectProfile p;
    if (plan.clone_of[i]) {
      p = make_clone_profile(plan.subjects[*plan.clone_of[i]], derive_seed(config.master_seed, {"clone", id}), id,
                             config.clone_perturbation);
    } else {
      p = make_subject_profile(derive_seed(config.master_seed, {"imitator", id}), id);
      for (auto& s : p.noise) s *= config.noise_scale;
    }
    for (const auto& setting : imitator_settings(p.natural, config.imitator_settings[i])) {
      plan.entry_keys.push_back(EntryKey{id, setting});
      plan.entry_imitator.push_back(i);
    }
    plan.imitators.push_back(std::move(p));
  }
  return plan;
}

std::string session_name(std::size_t k) { return std::to_string(k + 1); }

IMURecording genuine_recording(const SynthConfig& config, const Plan& plan, std::size_t task) {
  const auto& profile = plan.subjects[task / config.sessions];
  const auto session = session_name(task % config.sessions);
  return generate_recording(profile, profile.natural, config.session_duration_s, config.sampling_rate,
                            derive_seed(config.master_seed, {"genuine", profile.subject_id, session}), session);
}

IMURecording entry_recording(const SynthConfig& config, const Plan& plan, std::size_t e) {
  const auto& key = plan.entry_keys[e];
  const auto& profile = plan.imitators[plan.entry_imitator[e]];
  return generate_recording(profile, key.factors, config.entry_duration_s, config.sampling_rate,
                            derive_seed(config.master_seed, {"entry", key.str()}), key.str());
}

std::string entry_dir(const EntryKey& key) {
  char speed[16];
  std::snprintf(speed, sizeof speed, "%.1f", key.factors.speed_mph);
  std::string dir = key.imitator_id + "/s" + speed;
  for (Factor f : {Factor::step_length, Factor::step_width, Factor::thigh_lift})
    dir += "_" + std::string(level_name(f, static_cast<int>(key.factors.level(f))));
  return dir;
}

nlohmann::ordered_json profile_summary(const SubjectProfile& p) {
  nlohmann::ordered_json j;
  j["natural_speed_mph"] = p.natural.speed_mph;
  j["cadence_gain"] = p.cadence_gain;
  nlohmann::ordered_json sens = nlohmann::ordered_json::object();
  for (std::size_t f = 0; f < 4; ++f) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < kSynthChannels; ++c) row[to_string(synth_channel(c))] = p.sensitivity[f][c];
    sens[std::string(to_string(kAllFactors[f]))] = row;
  }
  j["sensitivity"] = sens;
  return j;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SynthConfig& config, std::size_t jobs) {
  const Plan plan = make_plan(config);
  const std::size_t genuine_tasks = config.subjects * config.sessions;
  std::vector<std::optional<IMURecording>> genuine(genuine_tasks);
  std::vector<std::optional<IMURecording>> entries(plan.entry_keys.size());
  parallel_for(genuine_tasks + entries.size(), jobs, [&](std::size_t i) {
    if (i < genuine_tasks)
      genuine[i] = genuine_recording(config, plan, i);
    else
      entries[i - genuine_tasks] = entry_recording(config, plan, i - genuine_tasks);
  });

  SyntheticCorpus out;
  out.subjects = plan.subjects;
  out.imitators = plan.imitators;
  out.clone_of = plan.clone_of;
  for (auto& r : genuine) out.genuine.push_back(std::move(*r));
  for (std::size_t e = 0; e < entries.size(); ++e) out.dictionary.add(plan.entry_keys[e], std::move(*entries[e]));
  return out;
}

std::filesystem::path generate_corpus(const SynthConfig& config, const std::filesystem::path& out_dir,
                                      std::size_t jobs) {
  namespace fs = std::filesystem;
  const Plan plan = make_plan(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::size_t genuine_tasks = config.subjects * config.sessions;
  auto genuine_dir = [&](std::size_t task) {
    return fs::path("genuine") / plan.subjects[task / config.sessions].subject_id /
           ("session" + session_name(task % config.sessions));
  };
  // Recordings are generated and written one per task, so memory stays flat at full scale.
  parallel_for(genuine_tasks + plan.entry_keys.size(), jobs, [&](std::size_t i) {
    if (i < genuine_tasks) {
      write_recording(out_dir / genuine_dir(i), genuine_recording(config, plan, i));
    } else {
      const auto e = i - genuine_tasks;
      write_recording(out_dir / "dictionary" / entry_dir(plan.entry_keys[e]), entry_recording(config, plan, e));
    }
  });

  std::vector<ManifestEntry> manifest;
  for (const auto& key : plan.entry_keys) {
    ManifestEntry m{key, {}};
    for (Sensor s : kSensorOrder) m.files[s] = entry_dir(key) + "/" + std::string(to_string(s)) + ".csv";
    manifest.push_back(std::move(m));
  }
  std::sort(manifest.begin(), manifest.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  write_text(out_dir / "dictionary" / "manifest.json", dictionary_manifest_json(manifest));

  nlohmann::ordered_json j;
  j["format"] = "gaitdict-corpus";
  j["version"] = 1;
  j["generator"] = "synthgait";
  j["master_seed"] = config.master_seed;
  j["sampling_rate"] = config.sampling_rate;
  j["session_duration_s"] = config.session_duration_s;
  j["entry_duration_s"] = config.entry_duration_s;
  j["noise_scale"] = config.noise_scale;
  j["clone_perturbation"] = config.clone_perturbation;
  j["subjects"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < config.subjects; ++i) {
    const auto& p = plan.subjects[i];
    nlohmann::ordered_json s;
    s["id"] = p.subject_id;
    s["seed"] = derive_seed(config.master_seed, {"subject", p.subject_id});
    nlohmann::ordered_json sessions = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < config.sessions; ++k) {
      const auto task = i * config.sessions + k;
      sessions.push_back({{"session", session_name(k)},
                          {"path", genuine_dir(task).generic_string()},
                          {"seed", derive_seed(config.master_seed, {"genuine", p.subject_id, session_name(k)})}});
    }
    s["sessions"] = sessions;
    s["profile"] = profile_summary(p);
    j["subjects"].push_back(std::move(s));
  }
  j["imitators"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < plan.imitators.size(); ++i) {
    const auto& p = plan.imitators[i];
    nlohmann::ordered_json s;
    s["id"] = p.subject_id;
    s["clone_of"] = plan.clone_of[i] ? nlohmann::ordered_json(plan.subjects[*plan.clone_of[i]].subject_id)
                                     : nlohmann::ordered_json(nullptr);
    s["settings"] = config.imitator_settings[i];
    s["profile"] = profile_summary(p);
    j["imitators"].push_back(std::move(s));
  }
  j["dictionary_manifest"] = "dictionary/manifest.json";
  const auto path = out_dir / "corpus.json";
  write_text(path, j.dump(1) + "\n");
  return path;
}

}  // namespace gaitdict
