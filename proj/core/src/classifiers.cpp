#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "classifiers_internal.hpp"
#include "gaitdict/error.hpp"

namespace gaitdict {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

double sign_of(Label l) { return l == Label::genuine ? 1.0 : -1.0; }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void check_dims(std::span<const double> z, std::size_t dims) {
  if (z.size() != dims) throw InvalidInput("expected " + std::to_string(dims) + " features, got " + std::to_string(z.size()));
}

}  // namespace

// ---------------------------------------------------------------- kNN

Label KnnModel::predict(std::span<const double> z) const {
  check_dims(z, dims);
  const std::size_t n = labels.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = {sq_dist(z, std::span<const double>(points).subspan(i * dims, dims)), i};
  }
  const std::size_t kk = std::min(k, n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  std::size_t gen = 0;
  for (std::size_t m = 0; m < kk; ++m) gen += labels[dist[m].second] == Label::genuine;
  if (2 * gen == kk) return labels[dist[0].second];
  return 2 * gen > kk ? Label::genuine : Label::impostor;
}

// ---------------------------------------------------------------- logistic

double LogisticModel::decision(std::span<const double> z) const {
  check_dims(z, weights.size());
  return std::inner_product(weights.begin(), weights.end(), z.begin(), bias);
}

Label LogisticModel::predict(std::span<const double> z) const {
  return decision(z) > 0.0 ? Label::genuine : Label::impostor;
}

// ---------------------------------------------------------------- SVM

double SvmModel::decision(std::span<const double> z) const {
  check_dims(z, dims);
  double f = bias;
  for (std::size_t i = 0; i < coef.size(); ++i) {
    f += coef[i] * std::exp(-gamma * sq_dist(z, std::span<const double>(support).subspan(i * dims, dims)));
  }
  return f;
}

Label SvmModel::predict(std::span<const double> z) const {
  return decision(z) > 0.0 ? Label::genuine : Label::impostor;
}

// ---------------------------------------------------------------- MLP

double MlpModel::probability(std::span<const double> z) const {
  check_dims(z, inputs);
  double out = b2;
  for (std::size_t h = 0; h < hidden; ++h) {
    double a = b1[h];
    const double* w = w1.data() + h * inputs;
    for (std::size_t j = 0; j < inputs; ++j) a += w[j] * z[j];
    if (a > 0.0) out += w2[h] * a;
  }
  return sigmoid(out);
}

Label MlpModel::predict(std::span<const double> z) const {
  return probability(z) > 0.5 ? Label::genuine : Label::impostor;
}

// ---------------------------------------------------------------- forest

Label DecisionTree::predict(std::span<const double> z) const {
  std::size_t node = 0;
  while (nodes[node].feature >= 0) {
    const auto& nd = nodes[node];
    node = static_cast<std::size_t>(z[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
  }
  return nodes[node].label;
}

Label ForestModel::predict(std::span<const double> z) const {
  std::size_t gen = 0;
  for (const auto& t : trees) gen += t.predict(z) == Label::genuine;
  return 2 * gen > trees.size() ? Label::genuine : Label::impostor;
}

namespace detail {

KnnModel fit_knn(const TrainingData& data, const KnnParams& params) {
  KnnModel m;
  m.k = params.k;
  m.dims = data.dims;
  m.points.assign(data.z.begin(), data.z.end());
  m.labels.assign(data.y.begin(), data.y.end());
  return m;
}

// Full-batch gradient descent on mean log-loss + (l2/2)|w|^2 with step 1/L,
// L an upper bound on the gradient's Lipschitz constant.
LogisticModel fit_logistic(const TrainingData& data, const LogisticParams& params) {
  const std::size_t n = data.rows, d = data.dims;
  const double nd = static_cast<double>(n);
  double mean_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = data.row(i);
    mean_sq += std::inner_product(r.begin(), r.end(), r.begin(), 1.0);
  }
  mean_sq /= nd;
  const double step = 1.0 / (0.25 * mean_sq + params.l2);

  LogisticModel m;
  m.weights.assign(d, 0.0);
  std::vector<double> grad(d);
  for (std::size_t it = 0; it < params.max_iter; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = data.row(i);
      const double target = data.y[i] == Label::genuine ? 1.0 : 0.0;
      const double err = sigmoid(std::inner_product(r.begin(), r.end(), m.weights.begin(), m.bias)) - target;
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * r[j];
      grad_b += err;
    }
    double worst = std::abs(grad_b / nd);
    for (std::size_t j = 0; j < d; ++j) {
      grad[j] = grad[j] / nd + params.l2 * m.weights[j];
      worst = std::max(worst, std::abs(grad[j]));
    }
    if (worst < params.tol) break;
    for (std::size_t j = 0; j < d; ++j) m.weights[j] -= step * grad[j];
    m.bias -= step * grad_b / nd;
  }
  return m;
}

// C-SVC dual solved by SMO with second-order working-set selection.
SvmModel fit_svm(const TrainingData& data, const SvmParams& params) {
  const std::size_t n = data.rows, d = data.dims;
  double gamma = 0.0;
  if (params.gamma) {
    gamma = *params.gamma;
  } else {
    double mean = 0.0;
    for (double v : data.z) mean += v;
    mean /= static_cast<double>(data.z.size());
    double var = 0.0;
    for (double v : data.z) var += (v - mean) * (v - mean);
    var /= static_cast<double>(data.z.size());
    gamma = var > 0.0 ? 1.0 / (static_cast<double>(d) * var) : 1.0 / static_cast<double>(d);
  }

  std::vector<double> y(n), kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) y[i] = sign_of(data.y[i]);
  for (std::size_t i = 0; i < n; ++i) {
    kernel[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = std::exp(-gamma * sq_dist(data.row(i), data.row(j)));
      kernel[i * n + j] = kernel[j * n + i] = k;
    }
  }
  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * kernel[i * n + j]; };

  const double c = params.c;
  constexpr double tau = 1e-12;
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto at_upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = y[t] > 0 ? (!at_upper(t) ? -grad[t] : -HUGE_VAL) : (!at_lower(t) ? grad[t] : -HUGE_VAL);
      if (v >= gmax && v > -HUGE_VAL) {
        gmax = v;
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n && i < n; ++t) {
      if (y[t] > 0) {
        if (at_lower(t)) continue;
        const double diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (diff > 0.0) {
          const double quad = std::max(2.0 - 2.0 * y[i] * q(i, t), tau);
          const double obj = -(diff * diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      } else {
        if (at_upper(t)) continue;
        const double diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (diff > 0.0) {
          const double quad = std::max(2.0 + 2.0 * y[i] * q(i, t), tau);
          const double obj = -(diff * diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    if (i == n || j == n || gmax + gmax2 < params.tol) break;

    const double old_ai = alpha[i], old_aj = alpha[j];
    double& ai = alpha[i];
    double& aj = alpha[j];
    if (y[i] != y[j]) {
      const double quad = std::max(2.0 + 2.0 * q(i, j), tau);
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c) {
          ai = c;
          aj = c - diff;
        }
      } else if (aj > c) {
        aj = c;
        ai = c + diff;
      }
    } else {
      const double quad = std::max(2.0 - 2.0 * q(i, j), tau);
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c) {
        if (ai > c) {
          ai = c;
          aj = sum - c;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > c) {
        if (aj > c) {
          aj = c;
          ai = sum - c;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double dai = ai - old_ai, daj = aj - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * dai + q(j, t) * daj;
  }

  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);

  SvmModel m;
  m.gamma = gamma;
  m.dims = d;
  m.bias = -rho;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    m.coef.push_back(alpha[t] * y[t]);
    const auto r = data.row(t);
    m.support.insert(m.support.end(), r.begin(), r.end());
  }
  return m;
}

MlpModel fit_mlp(const TrainingData& data, const MlpParams& params, std::uint64_t seed) {
  const std::size_t n = data.rows, d = data.dims, h = params.hidden;
  std::mt19937_64 rng(seed);
  MlpModel m;
  m.inputs = d;
  m.hidden = h;
  m.w1.resize(h * d);
  m.b1.assign(h, 0.0);
  m.w2.resize(h);
  // Glorot-uniform initialization.
  std::uniform_real_distribution<double> init1(-std::sqrt(6.0 / static_cast<double>(d + h)),
                                               std::sqrt(6.0 / static_cast<double>(d + h)));
  std::uniform_real_distribution<double> init2(-std::sqrt(6.0 / static_cast<double>(h + 1)),
                                               std::sqrt(6.0 / static_cast<double>(h + 1)));
  for (double& w : m.w1) w = init1(rng);
  for (double& w : m.w2) w = init2(rng);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> act(h);
  const double lr = params.learning_rate;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const auto z = data.row(idx);
      double out = m.b2;
      for (std::size_t u = 0; u < h; ++u) {
        const double* w = m.w1.data() + u * d;
        double a = m.b1[u];
        for (std::size_t j = 0; j < d; ++j) a += w[j] * z[j];
        act[u] = a > 0.0 ? a : 0.0;
        out += m.w2[u] * act[u];
      }
      const double err = sigmoid(out) - (data.y[idx] == Label::genuine ? 1.0 : 0.0);
      for (std::size_t u = 0; u < h; ++u) {
        if (act[u] > 0.0) {
          const double g = err * m.w2[u];
          double* w = m.w1.data() + u * d;
          for (std::size_t j = 0; j < d; ++j) w[j] -= lr * g * z[j];
          m.b1[u] -= lr * g;
        }
        m.w2[u] -= lr * err * act[u];
      }
      m.b2 -= lr * err;
    }
  }
  return m;
}

namespace {

struct SplitChoice {
  double impurity = std::numeric_limits<double>::infinity();
  std::size_t feature = 0;
  double threshold = 0.0;
  bool found = false;
};

double gini(double gen, double total) {
  if (total <= 0.0) return 0.0;
  const double p = gen / total;
  return 2.0 * p * (1.0 - p);
}

DecisionTree grow_tree(const TrainingData& data, std::vector<std::size_t> sample, std::size_t max_features,
                       std::size_t min_split, std::mt19937_64& rng) {
  DecisionTree tree;
  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, std::move(sample)});
  std::vector<std::size_t> features(data.dims);
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::pair<double, Label>> column;

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const auto& rows = cur.rows;
    std::size_t gen = 0;
    for (auto r : rows) gen += data.y[r] == Label::genuine;
    const double total = static_cast<double>(rows.size());
    tree.nodes[cur.node].label = 2 * gen > rows.size() ? Label::genuine : Label::impostor;
    if (gen == 0 || gen == rows.size() || rows.size() < min_split) continue;

    SplitChoice best;
    std::shuffle(features.begin(), features.end(), rng);
    std::size_t evaluated = 0;
    for (std::size_t f : features) {
      if (evaluated >= max_features) break;
      column.clear();
      for (auto r : rows) column.emplace_back(data.z[r * data.dims + f], data.y[r]);
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (column.front().first == column.back().first) continue;  // constant here; draw another
      ++evaluated;
      double left_gen = 0.0;
      for (std::size_t s = 1; s < column.size(); ++s) {
        left_gen += column[s - 1].second == Label::genuine;
        if (column[s].first == column[s - 1].first) continue;
        const double nl = static_cast<double>(s), nr = total - nl;
        const double imp =
            (nl * gini(left_gen, nl) + nr * gini(static_cast<double>(gen) - left_gen, nr)) / total;
        if (imp < best.impurity) {
          double thr = 0.5 * (column[s - 1].first + column[s].first);
          if (!(thr < column[s].first)) thr = column[s - 1].first;
          best = {imp, f, thr, true};
        }
      }
    }
    if (!best.found) continue;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (data.z[r * data.dims + best.feature] <= best.threshold ? left : right).push_back(r);
    const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[cur.node];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = left_id + 1;
    stack.push_back({static_cast<std::size_t>(left_id + 1), std::move(right)});
    stack.push_back({static_cast<std::size_t>(left_id), std::move(left)});
  }
  return tree;
}

}  // namespace

ForestModel fit_forest(const TrainingData& data, const ForestParams& params, std::uint64_t seed) {
  const std::size_t max_features = std::min(
      data.dims, params.max_features.value_or(
                     std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(data.dims))))));
  ForestModel forest;
  forest.trees.reserve(params.trees);
  for (std::size_t t = 0; t < params.trees; ++t) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (t + 1)));
    std::uniform_int_distribution<std::size_t> draw(0, data.rows - 1);
    std::vector<std::size_t> sample(data.rows);
    for (auto& s : sample) s = draw(rng);
    forest.trees.push_back(grow_tree(data, std::move(sample), max_features, params.min_samples_split, rng));
  }
  return forest;
}

}  // namespace detail

}  // namespace gaitdict
