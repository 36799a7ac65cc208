#include "gaitdict/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "classifiers_internal.hpp"
#include "gaitdict/error.hpp"

namespace gaitdict {

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::logistic: return "logistic";
    case ClassifierKind::mlp: return "mlp";
    case ClassifierKind::random_forest: return "random_forest";
  }
  return "?";
}

std::optional<ClassifierKind> parse_kind(std::string_view name) {
  for (auto kind : kAllKinds) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

ClassifierSpec ClassifierSpec::defaults(ClassifierKind kind, std::uint64_t seed) {
  ClassifierSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  switch (kind) {
    case ClassifierKind::knn: spec.hyper = KnnParams{}; break;
    case ClassifierKind::svm: spec.hyper = SvmParams{}; break;
    case ClassifierKind::logistic: spec.hyper = LogisticParams{}; break;
    case ClassifierKind::mlp: spec.hyper = MlpParams{}; break;
    case ClassifierKind::random_forest: spec.hyper = ForestParams{}; break;
  }
  return spec;
}

void ClassifierSpec::validate() const {
  if (hyper.index() != static_cast<std::size_t>(kind)) {
    throw InvalidInput("hyperparameters do not match classifier kind " + std::string(to_string(kind)));
  }
  auto fail = [this](const std::string& what) {
    throw InvalidInput(std::string(to_string(kind)) + ": " + what);
  };
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) {
          if (p.k == 0) fail("k must be >= 1");
        } else if constexpr (std::is_same_v<P, LogisticParams>) {
          if (!(p.l2 >= 0.0)) fail("l2 must be >= 0");
          if (p.max_iter == 0) fail("max_iter must be >= 1");
        } else if constexpr (std::is_same_v<P, SvmParams>) {
          if (!(p.c > 0.0)) fail("C must be > 0");
          if (p.gamma && !(*p.gamma > 0.0)) fail("gamma must be > 0");
          if (!(p.tol > 0.0)) fail("tol must be > 0");
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          if (p.hidden == 0) fail("hidden units must be >= 1");
          if (!(p.learning_rate > 0.0)) fail("learning rate must be > 0");
          if (p.epochs == 0) fail("epochs must be >= 1");
        } else {
          if (p.trees == 0) fail("trees must be >= 1");
          if (p.max_features && *p.max_features == 0) fail("max_features must be >= 1");
          if (p.min_samples_split < 2) fail("min_samples_split must be >= 2");
        }
      },
      hyper);
}

Scaler Scaler::fit(const FeatureMatrix& x) {
  if (x.empty()) throw InvalidInput("cannot fit a scaler on an empty matrix");
  Scaler s;
  const std::size_t d = x.cols();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  const double n = static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  for (double& m : s.mean) m /= n;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) s.scale[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(s.scale[j] / n);
    // Relative floor: a column that is constant up to round-off is constant.
    s.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 0.0;
  }
  return s;
}

void Scaler::transform(std::span<const double> in, std::span<double> out) const {
  if (in.size() != dims() || out.size() != dims()) {
    throw InvalidInput("scaler expects " + std::to_string(dims()) + " features, got " + std::to_string(in.size()));
  }
  for (std::size_t j = 0; j < dims(); ++j) out[j] = scale[j] > 0.0 ? (in[j] - mean[j]) / scale[j] : 0.0;
}

std::vector<double> Scaler::transform(std::span<const double> in) const {
  std::vector<double> out(in.size());
  transform(in, out);
  return out;
}

TrainedModel::TrainedModel(ClassifierSpec spec, Scaler scaler, ModelParams params)
    : spec_(std::move(spec)), scaler_(std::move(scaler)), params_(std::move(params)) {
  if (params_.index() != static_cast<std::size_t>(spec_.kind)) {
    throw InvalidInput("model parameters do not match classifier kind");
  }
}

Label TrainedModel::predict(std::span<const double> row) const {
  const auto z = scaler_.transform(row);
  return std::visit([&](const auto& m) { return m.predict(z); }, params_);
}

std::vector<Label> TrainedModel::predict(const FeatureMatrix& x) const {
  if (x.cols() != dims()) {
    throw InvalidInput("model expects " + std::to_string(dims()) + " features, matrix has " +
                       std::to_string(x.cols()));
  }
  std::vector<Label> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
  return out;
}

std::vector<Label> predict(const TrainedModel& model, const FeatureMatrix& x) { return model.predict(x); }

TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& x, std::span<const Label> y) {
  spec.validate();
  if (y.size() != x.rows()) throw InvalidInput("train: label count does not match row count");
  if (x.cols() == 0) throw InvalidInput("train: matrix has no features");
  std::size_t gen = 0, imp = 0;
  for (Label l : y) {
    if (l == Label::genuine) ++gen;
    else if (l == Label::impostor) ++imp;
    else throw InvalidInput("train: unlabeled row");
  }
  if (gen == 0 || imp == 0) throw InvalidInput("train: both gen and imp rows are required");

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a), rb = x.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return y[a] < y[b];
  });
  FeatureMatrix sorted = x.select_rows(order);
  std::vector<Label> labels(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) labels[i] = y[order[i]];

  Scaler scaler = Scaler::fit(sorted);
  std::vector<double> z(sorted.rows() * sorted.cols());
  for (std::size_t i = 0; i < sorted.rows(); ++i) {
    scaler.transform(sorted.row(i), std::span<double>(z).subspan(i * sorted.cols(), sorted.cols()));
  }
  const detail::TrainingData data{sorted.rows(), sorted.cols(), z, labels};

  ModelParams params = std::visit(
      [&](const auto& p) -> ModelParams {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) return detail::fit_knn(data, p);
        else if constexpr (std::is_same_v<P, SvmParams>) return detail::fit_svm(data, p);
        else if constexpr (std::is_same_v<P, LogisticParams>) return detail::fit_logistic(data, p);
        else if constexpr (std::is_same_v<P, MlpParams>) return detail::fit_mlp(data, p, spec.seed);
        else return detail::fit_forest(data, p, spec.seed);
      },
      spec.hyper);
  return TrainedModel(spec, std::move(scaler), std::move(params));
}

TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& x) { return train(spec, x, x.labels()); }

FeatureMatrix smote(const FeatureMatrix& minority, std::size_t target_count, std::size_t k_neighbors,
                    std::uint64_t seed) {
  const std::size_t n = minority.rows();
  if (n < 2) throw InvalidInput("smote: need at least 2 minority rows, got " + std::to_string(n));
  if (target_count < n) throw InvalidInput("smote: target count is below the current row count");
  if (k_neighbors == 0) throw InvalidInput("smote: k_neighbors must be >= 1");
  const std::size_t k = std::min(k_neighbors, n - 1);
  const std::size_t d = minority.cols();

  std::vector<std::vector<std::size_t>> neighbours(n);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    const auto ri = minority.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto rj = minority.row(j);
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += (ri[c] - rj[c]) * (ri[c] - rj[c]);
      dist.emplace_back(acc, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t m = 0; m < k; ++m) neighbours[i].push_back(dist[m].second);
  }

  FeatureMatrix out = minority;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_row(0, n - 1);
  std::uniform_int_distribution<std::size_t> pick_nn(0, k - 1);
  std::uniform_real_distribution<double> gap(0.0, 1.0);
  std::vector<double> synth(d);
  for (std::size_t s = n; s < target_count; ++s) {
    const std::size_t base = pick_row(rng);
    const std::size_t nn = neighbours[base][pick_nn(rng)];
    const double lambda = gap(rng);
    const auto x = minority.row(base), xn = minority.row(nn);
    for (std::size_t c = 0; c < d; ++c) synth[c] = x[c] + lambda * (xn[c] - x[c]);
    out.append(synth, minority.labels()[base], Provenance{minority.provenance()[base].subject, "smote", -1});
  }
  return out;
}

}  // namespace gaitdict
