#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaitdict/dictattack.hpp"
#include "gaitdict/signal.hpp"

namespace gaitdict {

// Raw generated channels: x, y, z of la, gy, ma, rv (magnitudes are derived later).
inline constexpr std::size_t kSynthChannels = 12;
inline constexpr std::size_t kHarmonics = 4;

ChannelId synth_channel(std::size_t index);

// Per-subject gait idiosyncrasy. Everything here is a stand-in signal model,
// not a biomechanical one.
struct SubjectProfile {
  std::string subject_id;
  std::array<std::array<double, kHarmonics>, kSynthChannels> amplitude{};  // sensor units
  std::array<std::array<double, kHarmonics>, kSynthChannels> phase{};      // radians
  std::array<double, kSynthChannels> offset{};                            // DC level, sensor units
  // Signed log-amplitude response of each channel to each factor, in [-1, 1].
  std::array<std::array<double, kSynthChannels>, 4> sensitivity{};
  double cadence_gain = 0.82;  // steps/s per mph at normal step length
  std::array<double, kSynthChannels> noise{};  // Gaussian std, sensor units
  double session_drift = 0.03;                  // per-recording multiplicative amplitude std
  // Stride-to-stride variability: relative std of slow AR(1) wander of the
  // cadence and of each channel's amplitude envelope. Zero gives a strictly
  // periodic signal.
  double cadence_jitter = 0.05;
  double amplitude_jitter = 0.15;
  FactorSetting natural;                        // the subject's own walking setting

  bool operator==(const SubjectProfile&) const = default;
};

SubjectProfile make_subject_profile(std::uint64_t seed, std::string subject_id = "S");

// Copy of `target` with amplitudes perturbed by a relative Gaussian of the
// given std; phases, offsets, sensitivities and cadence are kept.
SubjectProfile make_clone_profile(const SubjectProfile& target, std::uint64_t seed, std::string subject_id,
                                  double perturbation = 0.05);

// Step-length scales: short 0.8, normal 1.0, long 1.2, longer 1.35.
double step_length_scale(int rank);
// Steps per second; also the fundamental of every generated channel.
double cadence_hz(const SubjectProfile& profile, const FactorSetting& factors);

// Depth of the log-amplitude modulation per unit of coded factor level.
inline constexpr double kModulationDepth = 0.2;
// Coded factor level: (speed - 2.2) / 0.8, or (rank - 2) / 2 for ordinal factors.
double coded_level(Factor f, const FactorSetting& factors);

// Time constants of the cadence and envelope wander, seconds.
inline constexpr double kCadenceWanderTau = 5.0;
inline constexpr double kEnvelopeWanderTau = 3.0;

// sum_h A_h e_c(t) sin(h theta(t) + phi_h) + offset + noise for each channel, where
// theta advances at 2 pi f0 (1 + cadence wander) and e_c is the channel envelope.
IMURecording generate_recording(const SubjectProfile& profile, const FactorSetting& factors, double duration_s,
                                double rate_hz, std::uint64_t seed, const std::string& session = "1");

// Canonical list of settings an imitator walks: the nine grid speeds at normal
// ordinal levels, then one-factor ordinal variants at the imitator's natural
// speed, then step-length x step-width pairs. Up to 27 settings.
std::vector<FactorSetting> imitator_settings(const FactorSetting& natural, std::size_t count);

struct SynthConfig {
  std::size_t subjects = 10;
  std::size_t sessions = 2;
  double session_duration_s = 93.0;  // ~22 frames of 8 s / 4 s
  std::vector<std::size_t> imitator_settings{16, 16, 16, 16, 16};
  double entry_duration_s = 77.0;  // ~18 frames
  double sampling_rate = 46.0;
  std::uint64_t master_seed = 7;
  // (imitator index, subject index) pairs; the imitator's profile is a clone of the subject's.
  std::vector<std::pair<std::size_t, std::size_t>> planted_clones{{0, 0}, {1, 3}, {2, 6}};
  double clone_perturbation = 0.05;
  double noise_scale = 1.0;

  static SynthConfig desk_scale(std::uint64_t seed = 7);
  static SynthConfig full_scale(std::uint64_t seed = 7);
  void validate() const;

  std::size_t imitators() const { return imitator_settings.size(); }
};

std::string subject_name(const SynthConfig& config, std::size_t index);
std::string imitator_name(std::size_t index);

struct SyntheticCorpus {
  std::vector<SubjectProfile> subjects;
  std::vector<SubjectProfile> imitators;
  std::vector<std::optional<std::size_t>> clone_of;  // per imitator
  std::vector<IMURecording> genuine;                 // subject-major, then session
  Dictionary dictionary;
};

// Whole corpus in memory.
SyntheticCorpus generate_synthetic(const SynthConfig& config, std::size_t jobs = 1);

// Writes the on-disk corpus (genuine/<subject>/session<k>/*.csv,
// dictionary/<entry>/*.csv, dictionary/manifest.json, corpus.json) and
// returns the path of corpus.json.
std::filesystem::path generate_corpus(const SynthConfig& config, const std::filesystem::path& out_dir,
                                      std::size_t jobs = 1);

}  // namespace gaitdict
