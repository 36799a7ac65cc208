#pragma once

#include <cstdint>
#include <span>

#include "gaitdict/learners.hpp"

namespace gaitdict::detail {

// Standardized training data handed to the per-kind fitters.
struct TrainingData {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::span<const double> z;  // row-major
  std::span<const Label> y;

  std::span<const double> row(std::size_t i) const { return z.subspan(i * dims, dims); }
};

KnnModel fit_knn(const TrainingData& data, const KnnParams& params);
LogisticModel fit_logistic(const TrainingData& data, const LogisticParams& params);
SvmModel fit_svm(const TrainingData& data, const SvmParams& params);
MlpModel fit_mlp(const TrainingData& data, const MlpParams& params, std::uint64_t seed);
ForestModel fit_forest(const TrainingData& data, const ForestParams& params, std::uint64_t seed);

}  // namespace gaitdict::detail
