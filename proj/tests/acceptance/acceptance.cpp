// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <thread>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fixtures.hpp"
#include "gaitdict/eda.hpp"
#include "gaitdict/render.hpp"
#include "gaitdict/synthgait.hpp"
#include "oracles.hpp"

using namespace gaitdict;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

Outcome finish(const Check& c, std::string summary) {
  if (c.failures.empty()) return {true, std::move(summary)};
  std::string d = std::to_string(c.failures.size()) + " violation(s); first: " + c.failures.front();
  return {false, d + " [" + summary + "]"};
}

std::string fmt(double v, int decimals = 3) { return format_fixed(v, decimals); }

SessionStore featurize_sessions(const SyntheticCorpus& corpus, const std::string& session) {
  SessionStore store;
  for (const auto& r : corpus.genuine)
    if (r.session() == session) store[r.subject_id()] = featurize_recording(preprocess(r), kAllSensors);
  return store;
}

std::vector<std::string> users_of(const SessionStore& s) {
  std::vector<std::string> u;
  for (const auto& [k, v] : s) u.push_back(k);
  return u;
}

// 1 -------------------------------------------------------------------------
Outcome feature_oracle() {
  Check c;
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<std::size_t> len(16, 600);
  double worst_time = 0, worst_freq = 0;
  for (int w = 0; w < 200; ++w) {
    const auto x = oracle::random_window(rng, len(rng));
    const auto got = extract_channel_features(x);
    const auto t = oracle::time_features(x);
    const auto f = oracle::freq_features(x);
    for (std::size_t i = 0; i < kFeaturesPerChannel; ++i) {
      const bool freq = i >= kTimeFeatureCount;
      const double want = freq ? f[i - kTimeFeatureCount] : t[i];
      const double err = oracle::rel_err(got[i], want);
      (freq ? worst_freq : worst_time) = std::max(freq ? worst_freq : worst_time, err);
      c.expect(err <= (freq ? 1e-6 : 1e-9), "window " + std::to_string(w) + " " + channel_feature_names()[i]);
    }
  }
  std::ostringstream s;
  s << "200 windows, max rel err time " << worst_time << ", dft " << worst_freq;
  return finish(c, s.str());
}

// 2 -------------------------------------------------------------------------
Outcome dimensions() {
  Check c;
  SynthConfig cfg;
  cfg.subjects = 3;
  cfg.imitator_settings.clear();
  cfg.planted_clones.clear();
  const auto corpus = generate_synthetic(cfg);
  const auto s1 = featurize_sessions(corpus, "1");
  c.expect(channel_feature_names().size() == 34, "34 features per channel");
  c.expect(feature_names(std::array{Sensor::la}).size() == 136, "136 features per sensor");
  c.expect(s1.begin()->second.cols() == 4 * 136, "full schema width");
  const auto combos = all_combos();
  c.expect(combos.size() == 15, "15 combos");
  std::size_t models = 0;
  for (const auto& combo : combos) {
    for (auto kind : kAllKinds) {
      const auto m = train_user_model("S01", combo, ClassifierSpec::defaults(kind, 1), s1);
      ++models;
      c.expect(m.selected.size() == 30 * combo.size(), combo.name() + " fused width");
      c.expect(m.model.dims() == 30 * combo.size(), combo.name() + " model input width");
      for (std::size_t b = 0; b < combo.size(); ++b) {
        const auto prefix = std::string(to_string(combo.sensors()[b])) + "_";
        for (std::size_t i = 0; i < 30; ++i)
          c.expect(m.selected_names[b * 30 + i].starts_with(prefix), combo.name() + " per-sensor block");
      }
      std::set<std::size_t> uniq(m.selected.begin(), m.selected.end());
      c.expect(uniq.size() == m.selected.size(), "distinct selected features");
    }
  }
  c.expect(models == 75, "75 models per user");
  return finish(c, std::to_string(models) + " models; widths 30x|combo| over 15 combos x 5 kinds");
}

// 3 -------------------------------------------------------------------------
Outcome imbalance() {
  Check c;
  const auto s1 = fixture::subject_store(55, 22, 3, "1");
  const auto raw = draw_training_rows("S1", s1, 5, 1);
  c.expect(raw.count(Label::genuine) == 22, "22 genuine");
  c.expect(raw.count(Label::impostor) == 270, "54 x 5 impostors");
  const auto m = assemble_training_set("S1", s1, 5, 1);
  c.expect(m.rows() == 540, "540 rows, got " + std::to_string(m.rows()));
  c.expect(m.count(Label::genuine) == 270 && m.count(Label::impostor) == 270, "balanced classes");
  return finish(c, "rows " + std::to_string(m.rows()) + " = " + std::to_string(m.count(Label::genuine)) + " gen + " +
                       std::to_string(m.count(Label::impostor)) + " imp");
}

// 4 -------------------------------------------------------------------------
// Every rate is a ratio of window counts, so the identities are checked in
// exact rational arithmetic on those counts, after confirming that each stored
// double is the correctly rounded quotient of its counts.
struct Ratio {
  __int128 num, den;
};
Ratio add(Ratio a, Ratio b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
Ratio sub(Ratio a, Ratio b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
Ratio half(Ratio a) { return {a.num, a.den * 2}; }
bool same(Ratio a, Ratio b) { return a.num * b.den == b.num * a.den; }
double to_double(Ratio a) { return static_cast<double>(static_cast<long long>(a.num)) / static_cast<double>(static_cast<long long>(a.den)); }

Outcome rate_algebra(const AttackReport& report, std::span<const EntryFeatures> entries) {
  Check c;
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (const auto& cell : report.cells) {
    const auto name = cell.key.user + "/" + cell.key.combo.name() + "/" + std::string(to_string(cell.key.kind));
    const auto& k = cell.zero.counts;
    const Ratio far{static_cast<__int128>(k.impostor_accepted), static_cast<__int128>(k.impostor_accepted + k.impostor_rejected)};
    const Ratio frr{static_cast<__int128>(k.genuine_rejected), static_cast<__int128>(k.genuine_accepted + k.genuine_rejected)};
    const auto windows = static_cast<long long>(entries[cell.best].features.rows());
    const auto accepted = std::llround(cell.dict_far * static_cast<double>(windows));
    const Ratio dfar{accepted, windows};
    c.expect(cell.dict_far == to_double(dfar), name + " dict FAR is not a window ratio");
    c.expect(cell.zero.far == to_double(far) && cell.zero.frr == to_double(frr), name + " rates disagree with counts");
    const Ratio hter = half(add(far, frr)), dhter = half(add(dfar, frr));
    c.expect(cell.zero.hter == (cell.zero.far + cell.zero.frr) / 2, name + " zero HTER");
    c.expect(cell.dict_hter == (cell.dict_far + cell.zero.frr) / 2, name + " dict HTER");
    c.expect(same(sub(dhter, hter), half(sub(dfar, far))), name + " HTER delta");
    c.expect(in01(cell.zero.far) && in01(cell.zero.frr) && in01(cell.dict_far) && in01(cell.dict_hter),
             name + " range");
  }
  return finish(c, std::to_string(report.cells.size()) + " cells");
}

// 5 -------------------------------------------------------------------------
Outcome monotonicity(const BaselineGrid& grid, const std::vector<EntryFeatures>& pool) {
  Check c;
  std::mt19937_64 rng(5150);
  std::vector<const GridCell*> cells;
  for (const auto& g : grid.cells)
    if (g.ok()) cells.push_back(&g);
  std::size_t checks = 0;
  for (int d = 0; d < 100; ++d) {
    const auto& model = *cells[rng() % cells.size()]->model;
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(2 + rng() % 12);
    std::sort(order.begin(), order.end());
    std::vector<EntryFeatures> dict;
    double prev = 0;
    for (std::size_t i : order) {
      dict.push_back(pool[i]);
      const auto r = attack_user(model, dict);
      c.expect(r.best_far >= prev, "dictionary " + std::to_string(d) + " best FAR dropped");
      c.expect(r.best_far == *std::max_element(r.entry_fars.begin(), r.entry_fars.end()),
               "dictionary " + std::to_string(d) + " best is not the max");
      prev = r.best_far;
      ++checks;
    }
  }
  return finish(c, "100 dictionaries, " + std::to_string(checks) + " incremental checks");
}

// 6 -------------------------------------------------------------------------
Outcome desk_attack(const AttackReport& report, const std::vector<std::string>& users) {
  Check c;
  double best_hter = INFINITY;
  SensorCombo best_combo{{Sensor::la}};
  ClassifierKind best_kind = ClassifierKind::knn;
  for (const auto& combo : all_combos()) {
    for (auto kind : kAllKinds) {
      double h = 0;
      for (const auto& u : users) h += report.find({u, combo, kind})->zero.hter;
      h /= static_cast<double>(users.size());
      if (h < best_hter) best_hter = h, best_combo = combo, best_kind = kind;
    }
  }
  double zfar = 0, dfar = 0;
  for (const auto& u : users) {
    const auto* cell = report.find({u, best_combo, best_kind});
    zfar += cell->zero.far;
    dfar += cell->dict_far;
  }
  zfar /= static_cast<double>(users.size());
  dfar /= static_cast<double>(users.size());
  const auto labels = classify_menagerie(report, best_combo, best_kind);
  std::size_t severe = 0, unaffected = 0;
  for (const auto& [u, m] : labels) {
    severe += m == Menagerie::severely_impacted;
    unaffected += m == Menagerie::unaffected;
  }
  c.expect(zfar <= 0.15, "zero-effort FAR " + fmt(zfar) + " > 0.15");
  c.expect(dfar - zfar >= 0.20, "dictionary gain " + fmt(dfar - zfar) + " < 0.20");
  c.expect(severe >= 1, "no severely impacted user");
  c.expect(unaffected >= 1, "no unaffected user");
  return finish(c, "best cell " + best_combo.name() + "/" + std::string(to_string(best_kind)) + ": zero FAR " +
                       fmt(zfar) + ", zero HTER " + fmt(best_hter) + ", dict FAR " + fmt(dfar) + ", severe " +
                       std::to_string(severe) + ", unaffected " + std::to_string(unaffected));
}

// 7 -------------------------------------------------------------------------
Outcome eda_phenomena(const SyntheticCorpus& corpus, const std::vector<EntryFeatures>& entries) {
  Check c;
  // Planted sensitivities are indexed by generated channel; channel 0 is la_x.
  if (synth_channel(0) != ChannelId{Sensor::la, Axis::x}) return {false, "channel 0 is not la_x"};
  std::size_t overlap_ok = 0, overlap_total = 0, sign_ok = 0, sign_total = 0;
  for (const auto& imitator : corpus.imitators) {
    const auto cells = factor_feature_correlations(entries, imitator.subject_id, {"la_x_std"});
    for (Factor f : kAllFactors) {
      const auto grid = dictionary_overlap(corpus.dictionary, imitator.subject_id, f);
      if (grid.values.rows() >= 2) {
        ++overlap_total;
        overlap_ok += grid.diagonal_mean() > grid.off_diagonal_mean();
      }
      for (const auto& cell : cells) {
        if (cell.factor != f || cell.n < 3) continue;
        ++sign_total;
        const double planted = imitator.sensitivity[static_cast<std::size_t>(f)][0];
        sign_ok += cell.defined && (cell.r > 0) == (planted > 0);
      }
    }
  }
  const double overlap_share = static_cast<double>(overlap_ok) / static_cast<double>(overlap_total);
  const double sign_share = static_cast<double>(sign_ok) / static_cast<double>(sign_total);
  c.expect(overlap_total > 0 && overlap_share >= 0.8, "overlap share " + fmt(overlap_share));
  c.expect(sign_total > 0 && sign_share >= 0.9, "sign recovery " + fmt(sign_share));
  return finish(c, "overlap " + std::to_string(overlap_ok) + "/" + std::to_string(overlap_total) + ", signs " +
                       std::to_string(sign_ok) + "/" + std::to_string(sign_total));
}

// 8 -------------------------------------------------------------------------
std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).generic_string()] = read_text(e.path());
  return out;
}

Outcome determinism() {
  Check c;
  oracle::TempDir tmp("acceptance_det");
  auto pipeline = [&](const std::string& tag, const std::string& jobs) {
    const auto data = tmp.path / ("data_" + tag), out = tmp.path / ("out_" + tag);
    std::ostringstream log, err;
    const std::vector<std::string> common{"--seed", "31", "--jobs", jobs};
    auto step = [&](std::vector<std::string> args) {
      args.insert(args.end(), common.begin(), common.end());
      const int code = cli::run(args, log, err);
      c.expect(code == 0, tag + ": " + args.front() + " exited " + std::to_string(code) + " " + err.str());
    };
    step({"synth", "--out", data.string(), "--subjects", "4", "--imitators", "2", "--settings", "9"});
    const std::vector<std::string> io{"--data", data.string(), "--out", out.string(), "--combos", "a,a+g,all",
                                      "--classifiers", "knn,logistic,random_forest", "--format", "svg"};
    for (const char* cmd : {"ingest", "train", "attack", "eda", "report"}) {
      std::vector<std::string> args{cmd};
      args.insert(args.end(), io.begin(), io.end());
      step(args);
    }
    auto tree = tree_bytes(out);
    for (auto& [k, v] : tree_bytes(data)) tree["data/" + k] = v;
    return tree;
  };
  const auto a = pipeline("a", "1");
  const auto b = pipeline("b", "4");
  c.expect(!a.empty(), "empty output tree");
  c.expect(a.size() == b.size(), "file counts differ");
  std::size_t differing = 0;
  for (const auto& [k, v] : a) {
    const auto it = b.find(k);
    if (it == b.end() || it->second != v) {
      ++differing;
      c.expect(false, "differs: " + k);
    }
  }
  c.expect(a.count("report/index.csv") == 1, "report/index.csv missing");
  return finish(c, std::to_string(a.size()) + " files compared (--jobs 1 vs 4), " + std::to_string(differing) +
                       " differ");
}

// 9 -------------------------------------------------------------------------
Outcome blobs() {
  Check c;
  std::string summary;
  for (auto kind : kAllKinds) {
    auto train_set = fixture::blobs(150, 2, 901, 4.0);
    auto test_set = fixture::blobs(150, 2, 902, 4.0);
    const auto model = train(ClassifierSpec::defaults(kind, 3), train_set);
    const auto pred = model.predict(test_set);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == test_set.labels()[i];
    const double acc = static_cast<double>(ok) / static_cast<double>(pred.size());
    c.expect(acc >= 0.95, std::string(to_string(kind)) + " accuracy " + fmt(acc));
    summary += std::string(summary.empty() ? "" : ", ") + std::string(to_string(kind)) + " " + fmt(acc);
  }
  return finish(c, summary);
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs > limit_s) {
      o.pass = false;
      o.detail += "; runtime " + fmt(secs, 1) + " s over " + fmt(limit_s, 0) + " s";
    }
    failed += !o.pass;
    std::printf("%s  criterion %d  %-28s %6.1fs  %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "feature-oracle equivalence", 10, feature_oracle);
  report(2, "dimensional fidelity", 120, dimensions);
  report(3, "imbalance pipeline", 0, imbalance);

  // Criteria 4-7 share the default desk-scale scenario.
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<SyntheticCorpus> corpus;
  BaselineGrid grid;
  std::vector<EntryFeatures> entries;
  AttackReport attack;
  std::vector<std::string> users;
  std::string setup_error;
  try {
    const auto cfg = SynthConfig::desk_scale();
    const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    corpus = generate_synthetic(cfg, jobs);
    const auto s1 = featurize_sessions(*corpus, "1"), s2 = featurize_sessions(*corpus, "2");
    users = users_of(s1);
    const std::vector<ClassifierKind> kinds(kAllKinds.begin(), kAllKinds.end());
    grid = sweep(s1, s2, users, all_combos(), kinds, cfg.master_seed, {}, jobs);
    entries = featurize_dictionary(corpus->dictionary, kDefaultWindowSeconds, kDefaultSlideSeconds, jobs);
    attack = attack_matrix(grid, entries, jobs);
    if (!grid.failures().empty()) setup_error = std::to_string(grid.failures().size()) + " sweep cells failed";
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  const double setup_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("      desk-scale scenario built in %.1fs (%zu cells, %zu entries)\n", setup_s, grid.cells.size(),
              entries.size());
  auto shared = [&](auto fn) {
    return [&, fn]() -> Outcome {
      if (!setup_error.empty()) return {false, "scenario setup failed: " + setup_error};
      return fn();
    };
  };
  report(4, "rate algebra", 0, shared([&] { return rate_algebra(attack, entries); }));
  report(5, "attack max-monotonicity", 0, shared([&] { return monotonicity(grid, entries); }));
  report(6, "desk-scale attack", 600 - setup_s, shared([&] { return desk_attack(attack, users); }));
  report(7, "EDA phenomena", 120, shared([&] { return eda_phenomena(*corpus, entries); }));
  report(8, "determinism", 0, determinism);
  report(9, "classifier sanity", 30, blobs);

  std::printf("%s: %d of 9 criteria failed\n", failed ? "FAILED" : "OK", failed);
  return failed ? 1 : 0;
}
