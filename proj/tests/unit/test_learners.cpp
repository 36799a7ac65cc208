#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "gaitdict/error.hpp"
#include "gaitdict/learners.hpp"

using namespace gaitdict;

namespace {

double accuracy(const TrainedModel& model, const FeatureMatrix& test) {
  const auto pred = model.predict(test);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == test.labels()[i];
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

FeatureMatrix rows_of(std::size_t n, std::size_t d, std::uint64_t seed) {
  auto m = fixture::blobs((n + 1) / 2, d, seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto out = m.select_rows(idx);
  out.set_all_labels(Label::genuine);
  return out;
}

}  // namespace

TEST_CASE("smote grows 22 rows to 270") {
  const auto minority = rows_of(22, 6, 1);
  const auto grown = smote(minority, 270, 5, 99);
  REQUIRE(grown.rows() == 270);
  for (std::size_t i = 0; i < 22; ++i) {
    const auto a = grown.row(i), b = minority.row(i);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
  for (std::size_t j = 0; j < minority.cols(); ++j) {
    const auto col = minority.column(j);
    const double lo = *std::min_element(col.begin(), col.end());
    const double hi = *std::max_element(col.begin(), col.end());
    for (std::size_t i = 22; i < 270; ++i) {
      CHECK(grown.at(i, j) >= lo - 1e-12);
      CHECK(grown.at(i, j) <= hi + 1e-12);
    }
  }
  CHECK(grown.count(Label::genuine) == 270);
  CHECK(smote(minority, 270, 5, 99) == grown);
}

TEST_CASE("smote at the current count is the identity") {
  const auto minority = rows_of(10, 3, 2);
  CHECK(smote(minority, 10, 5, 1) == minority);
  CHECK_THROWS_AS(smote(minority, 9, 5, 1), InvalidInput);
  CHECK_THROWS_AS(smote(rows_of(1, 3, 2), 5, 5, 1), InvalidInput);
}

TEST_CASE("smote synthetic rows lie on a segment between two minority rows") {
  const auto minority = rows_of(8, 2, 3);
  const auto grown = smote(minority, 40, 3, 4);
  for (std::size_t i = 8; i < 40; ++i) {
    bool found = false;
    for (std::size_t a = 0; a < 8 && !found; ++a) {
      for (std::size_t b = 0; b < 8 && !found; ++b) {
        if (a == b) continue;
        const double dx = minority.at(b, 0) - minority.at(a, 0), dy = minority.at(b, 1) - minority.at(a, 1);
        const double u = std::fabs(dx) > std::fabs(dy) ? (grown.at(i, 0) - minority.at(a, 0)) / dx
                                                       : (grown.at(i, 1) - minority.at(a, 1)) / dy;
        if (u < -1e-9 || u > 1 + 1e-9) continue;
        found = std::fabs(minority.at(a, 0) + u * dx - grown.at(i, 0)) < 1e-9 &&
                std::fabs(minority.at(a, 1) + u * dy - grown.at(i, 1)) < 1e-9;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("every classifier separates blobs") {
  const auto train_set = fixture::blobs(100, 5, 10);
  const auto test_set = fixture::blobs(100, 5, 11);
  for (auto kind : kAllKinds) {
    INFO(to_string(kind));
    const auto model = train(ClassifierSpec::defaults(kind, 5), train_set);
    CHECK(accuracy(model, test_set) >= 0.95);
  }
}

TEST_CASE("training is deterministic and row-order independent") {
  const auto x = fixture::blobs(40, 4, 12, 1.5);
  std::vector<std::size_t> rev(x.rows());
  std::iota(rev.rbegin(), rev.rend(), 0);
  const auto shuffled = x.select_rows(rev);
  const auto probe = fixture::blobs(50, 4, 13, 1.5);
  for (auto kind : kAllKinds) {
    INFO(to_string(kind));
    const auto spec = ClassifierSpec::defaults(kind, 77);
    const auto a = train(spec, x), b = train(spec, x), c = train(spec, shuffled);
    CHECK(model_to_json(a) == model_to_json(b));
    CHECK(model_to_json(a) == model_to_json(c));
    CHECK(a.predict(probe) == c.predict(probe));
  }
}

TEST_CASE("model json round trip preserves predictions") {
  const auto x = fixture::blobs(30, 3, 14, 2.0);
  const auto probe = fixture::blobs(40, 3, 15, 2.0);
  for (auto kind : kAllKinds) {
    const auto m = train(ClassifierSpec::defaults(kind, 3), x);
    const auto back = model_from_json(model_to_json(m));
    CHECK(back.predict(probe) == m.predict(probe));
    CHECK(model_to_json(back) == model_to_json(m));
  }
  CHECK_THROWS_AS(model_from_json("{\"format\": \"something else\"}"), DataError);
}

TEST_CASE("1-NN reproduces its training labels") {
  const auto x = fixture::blobs(25, 3, 16, 0.5);
  ClassifierSpec spec{ClassifierKind::knn, KnnParams{1}, 0};
  const auto m = train(spec, x);
  CHECK(m.predict(x) == x.labels());
}

TEST_CASE("logistic with zero weights uses the bias sign") {
  LogisticModel m{{0.0, 0.0}, 0.3};
  const std::array<double, 2> z{5, -5};
  CHECK(m.predict(z) == Label::genuine);
  m.bias = -0.3;
  CHECK(m.predict(z) == Label::impostor);
}

TEST_CASE("forest needs a strict majority of gen votes") {
  auto leaf = [](Label l) {
    DecisionTree t;
    t.nodes.push_back({-1, 0.0, -1, -1, l});
    return t;
  };
  const std::array<double, 1> z{0};
  ForestModel f{{leaf(Label::genuine), leaf(Label::impostor)}};
  CHECK(f.predict(z) == Label::impostor);
  f.trees.push_back(leaf(Label::genuine));
  CHECK(f.predict(z) == Label::genuine);
}

TEST_CASE("scaler maps constant dimensions to zero") {
  FeatureMatrix x({"c", "v"});
  for (int i = 0; i < 5; ++i) {
    const std::array<double, 2> r{3.0, static_cast<double>(i)};
    x.append(r, Label::genuine, {});
  }
  const auto s = Scaler::fit(x);
  const std::array<double, 2> probe{100.0, 2.0};
  const auto z = s.transform(probe);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == doctest::Approx(0.0));
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS((ClassifierSpec{ClassifierKind::svm, KnnParams{}, 0}.validate()), InvalidInput);
  CHECK_THROWS_AS((ClassifierSpec{ClassifierKind::knn, KnnParams{0}, 0}.validate()), InvalidInput);
  CHECK_THROWS_AS((ClassifierSpec{ClassifierKind::svm, SvmParams{-1.0}, 0}.validate()), InvalidInput);
  for (auto kind : kAllKinds) CHECK_NOTHROW(ClassifierSpec::defaults(kind).validate());
  CHECK(parse_kind("random_forest") == ClassifierKind::random_forest);
  CHECK_FALSE(parse_kind("tree"));
  const auto one_class = rows_of(6, 2, 1);
  CHECK_THROWS_AS(train(ClassifierSpec::defaults(ClassifierKind::knn), one_class), InvalidInput);
}
