#pragma once

#include <random>
#include <string>
#include <vector>

#include "gaitdict/authbench.hpp"
#include "gaitdict/features.hpp"

namespace fixture {

// Two well-separated Gaussian blobs in `dims` dimensions.
inline gaitdict::FeatureMatrix blobs(std::size_t per_class, std::size_t dims, std::uint64_t seed,
                                     double separation = 6.0) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < dims; ++j) names.push_back("f" + std::to_string(j));
  gaitdict::FeatureMatrix m(names);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> row(dims);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool gen = i % 2 == 0;
    for (std::size_t j = 0; j < dims; ++j) row[j] = g(rng) + (gen && j < 2 ? separation : 0.0);
    m.append(row, gen ? gaitdict::Label::genuine : gaitdict::Label::impostor,
             {gen ? "G" : "I", "1", static_cast<std::int64_t>(i)});
  }
  return m;
}

// Session stores over the full schema where subject s has mean offset s
// on a subject-specific block of columns.
inline gaitdict::SessionStore subject_store(std::size_t subjects, std::size_t rows, std::uint64_t seed,
                                            const std::string& session) {
  const auto names = gaitdict::feature_names(gaitdict::kAllSensors);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  gaitdict::SessionStore store;
  for (std::size_t s = 0; s < subjects; ++s) {
    const std::string id = "S" + std::to_string(s + 1);
    gaitdict::FeatureMatrix m(names);
    std::vector<double> row(names.size());
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = g(rng) + ((j * 7 + s * 13) % 11 == 0 ? 4.0 : 0.0);
      m.append(row, gaitdict::Label::unlabeled, {id, session, static_cast<std::int64_t>(r)});
    }
    store.emplace(id, std::move(m));
  }
  return store;
}

}  // namespace fixture
