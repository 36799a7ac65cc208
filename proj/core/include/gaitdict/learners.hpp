#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gaitdict/features.hpp"

namespace gaitdict {

enum class ClassifierKind { knn, svm, logistic, mlp, random_forest };

inline constexpr std::array<ClassifierKind, 5> kAllKinds{ClassifierKind::knn, ClassifierKind::svm,
                                                         ClassifierKind::logistic, ClassifierKind::mlp,
                                                         ClassifierKind::random_forest};

std::string_view to_string(ClassifierKind kind);
std::optional<ClassifierKind> parse_kind(std::string_view name);

struct KnnParams {
  std::size_t k = 5;
};

struct LogisticParams {
  double l2 = 1e-2;
  std::size_t max_iter = 500;
  double tol = 1e-6;
};

// RBF kernel; gamma unset means 1 / (d * variance of the standardized training matrix).
struct SvmParams {
  double c = 1.0;
  std::optional<double> gamma;
  double tol = 1e-3;
  std::size_t max_iter = 10'000'000;
};

// One hidden ReLU layer, sigmoid output, per-sample SGD on cross-entropy.
struct MlpParams {
  std::size_t hidden = 50;
  double learning_rate = 1e-3;
  std::size_t epochs = 500;
};

// max_features unset means floor(sqrt(d)).
struct ForestParams {
  std::size_t trees = 100;
  std::optional<std::size_t> max_features;
  std::size_t min_samples_split = 2;
};

using Hyperparameters = std::variant<KnnParams, SvmParams, LogisticParams, MlpParams, ForestParams>;

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::knn;
  Hyperparameters hyper = KnnParams{};
  std::uint64_t seed = 0;

  static ClassifierSpec defaults(ClassifierKind kind, std::uint64_t seed = 0);
  // Throws InvalidInput when hyperparameters do not belong to `kind` or are out of range.
  void validate() const;
};

// Per-feature z-score. Dimensions that are constant in training map to 0.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 marks a constant dimension

  static Scaler fit(const FeatureMatrix& x);
  std::size_t dims() const { return mean.size(); }
  void transform(std::span<const double> in, std::span<double> out) const;
  std::vector<double> transform(std::span<const double> in) const;
};

struct KnnModel {
  std::size_t k = 5;
  std::size_t dims = 0;
  std::vector<double> points;  // standardized training rows, row-major
  std::vector<Label> labels;
  Label predict(std::span<const double> z) const;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double decision(std::span<const double> z) const;
  Label predict(std::span<const double> z) const;
};

struct SvmModel {
  double gamma = 1.0;
  std::size_t dims = 0;
  std::vector<double> support;  // support vectors, row-major
  std::vector<double> coef;     // alpha_i * y_i (gen = +1)
  double bias = 0.0;
  double decision(std::span<const double> z) const;
  Label predict(std::span<const double> z) const;
};

struct MlpModel {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs
  std::vector<double> b1;
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
  double probability(std::span<const double> z) const;
  Label predict(std::span<const double> z) const;
};

struct DecisionTree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // go left when z[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    Label label = Label::impostor;
  };
  std::vector<Node> nodes;
  Label predict(std::span<const double> z) const;
};

// Strict majority of trees voting gen is required to accept.
struct ForestModel {
  std::vector<DecisionTree> trees;
  Label predict(std::span<const double> z) const;
};

using ModelParams = std::variant<KnnModel, SvmModel, LogisticModel, MlpModel, ForestModel>;

class TrainedModel {
 public:
  TrainedModel(ClassifierSpec spec, Scaler scaler, ModelParams params);

  const ClassifierSpec& spec() const { return spec_; }
  const Scaler& scaler() const { return scaler_; }
  const ModelParams& params() const { return params_; }
  std::size_t dims() const { return scaler_.dims(); }

  Label predict(std::span<const double> row) const;
  std::vector<Label> predict(const FeatureMatrix& x) const;

 private:
  ClassifierSpec spec_;
  Scaler scaler_;
  ModelParams params_;
};

// Fits the scaler, standardizes and trains. Rows are put in canonical
// (lexicographic) order first, so the result depends only on the multiset of
// (row, label) pairs and the seed.
TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& x, std::span<const Label> y);
TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& x);

std::vector<Label> predict(const TrainedModel& model, const FeatureMatrix& x);

inline constexpr std::size_t kDefaultSmoteNeighbors = 5;

// Grows `minority` to target_count rows. Originals come first, unchanged;
// each synthetic row is x + u (x_nn - x) for a random minority row x, one of
// its k nearest minority neighbours x_nn and u ~ U[0, 1].
FeatureMatrix smote(const FeatureMatrix& minority, std::size_t target_count,
                    std::size_t k_neighbors = kDefaultSmoteNeighbors, std::uint64_t seed = 0);

// Versioned JSON for spec, scaler and learned parameters.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);

}  // namespace gaitdict
