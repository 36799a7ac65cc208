#include "gaitdict/error.hpp"
#include "json_internal.hpp"

namespace gaitdict {

namespace detail {

namespace {

constexpr int kModelFormatVersion = 1;

Label label_from(const nlohmann::json& j) { return parse_label(j.get<std::string>()); }

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

nlohmann::json spec_to_json(const ClassifierSpec& spec) {
  nlohmann::json hyper = nlohmann::json::object();
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) {
          hyper["k"] = p.k;
        } else if constexpr (std::is_same_v<P, LogisticParams>) {
          hyper["l2"] = p.l2;
          hyper["max_iter"] = p.max_iter;
          hyper["tol"] = p.tol;
        } else if constexpr (std::is_same_v<P, SvmParams>) {
          hyper["c"] = p.c;
          hyper["gamma"] = p.gamma ? nlohmann::json(*p.gamma) : nlohmann::json("scale");
          hyper["tol"] = p.tol;
          hyper["max_iter"] = p.max_iter;
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          hyper["hidden"] = p.hidden;
          hyper["learning_rate"] = p.learning_rate;
          hyper["epochs"] = p.epochs;
        } else {
          hyper["trees"] = p.trees;
          hyper["max_features"] = p.max_features ? nlohmann::json(*p.max_features) : nlohmann::json("sqrt");
          hyper["min_samples_split"] = p.min_samples_split;
        }
      },
      spec.hyper);
  return {{"kind", to_string(spec.kind)}, {"seed", spec.seed}, {"hyperparameters", hyper}};
}

ClassifierSpec spec_from_json(const nlohmann::json& j) {
  const auto kind = parse_kind(j.at("kind").get<std::string>());
  if (!kind) throw DataError("unknown classifier kind " + j.at("kind").dump());
  ClassifierSpec spec = ClassifierSpec::defaults(*kind, j.at("seed").get<std::uint64_t>());
  const auto& h = j.contains("hyperparameters") ? j.at("hyperparameters") : nlohmann::json::object();
  switch (*kind) {
    case ClassifierKind::knn: spec.hyper = KnnParams{get_or<std::size_t>(h, "k", 5)}; break;
    case ClassifierKind::logistic: {
      LogisticParams p;
      p.l2 = get_or(h, "l2", p.l2);
      p.max_iter = get_or(h, "max_iter", p.max_iter);
      p.tol = get_or(h, "tol", p.tol);
      spec.hyper = p;
      break;
    }
    case ClassifierKind::svm: {
      SvmParams p;
      p.c = get_or(h, "c", p.c);
      if (h.contains("gamma") && h.at("gamma").is_number()) p.gamma = h.at("gamma").get<double>();
      p.tol = get_or(h, "tol", p.tol);
      p.max_iter = get_or(h, "max_iter", p.max_iter);
      spec.hyper = p;
      break;
    }
    case ClassifierKind::mlp: {
      MlpParams p;
      p.hidden = get_or(h, "hidden", p.hidden);
      p.learning_rate = get_or(h, "learning_rate", p.learning_rate);
      p.epochs = get_or(h, "epochs", p.epochs);
      spec.hyper = p;
      break;
    }
    case ClassifierKind::random_forest: {
      ForestParams p;
      p.trees = get_or(h, "trees", p.trees);
      if (h.contains("max_features") && h.at("max_features").is_number()) {
        p.max_features = h.at("max_features").get<std::size_t>();
      }
      p.min_samples_split = get_or(h, "min_samples_split", p.min_samples_split);
      spec.hyper = p;
      break;
    }
  }
  spec.validate();
  return spec;
}

nlohmann::json model_to_json_value(const TrainedModel& model) {
  nlohmann::json params = std::visit(
      [](const auto& m) -> nlohmann::json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, KnnModel>) {
          std::vector<std::string> labels;
          for (Label l : m.labels) labels.emplace_back(to_string(l));
          return {{"k", m.k}, {"dims", m.dims}, {"points", m.points}, {"labels", labels}};
        } else if constexpr (std::is_same_v<M, LogisticModel>) {
          return {{"weights", m.weights}, {"bias", m.bias}};
        } else if constexpr (std::is_same_v<M, SvmModel>) {
          return {{"gamma", m.gamma}, {"dims", m.dims}, {"support", m.support}, {"coef", m.coef}, {"bias", m.bias}};
        } else if constexpr (std::is_same_v<M, MlpModel>) {
          return {{"inputs", m.inputs}, {"hidden", m.hidden}, {"w1", m.w1},
                  {"b1", m.b1},         {"w2", m.w2},         {"b2", m.b2}};
        } else {
          nlohmann::json trees = nlohmann::json::array();
          for (const auto& t : m.trees) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& n : t.nodes) {
              nodes.push_back({n.feature, n.threshold, n.left, n.right, to_string(n.label)});
            }
            trees.push_back(std::move(nodes));
          }
          return {{"trees", trees}};
        }
      },
      model.params());
  return {{"format", "gaitdict-model"},
          {"version", kModelFormatVersion},
          {"spec", spec_to_json(model.spec())},
          {"scaler", {{"mean", model.scaler().mean}, {"scale", model.scaler().scale}}},
          {"params", params}};
}

TrainedModel model_from_json_value(const nlohmann::json& j) {
  try {
    if (j.at("format") != "gaitdict-model") throw DataError("not a gaitdict model document");
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw DataError("unsupported model format version " + j.at("version").dump());
    }
    ClassifierSpec spec = spec_from_json(j.at("spec"));
    Scaler scaler{j.at("scaler").at("mean").get<std::vector<double>>(),
                  j.at("scaler").at("scale").get<std::vector<double>>()};
    if (scaler.mean.size() != scaler.scale.size()) throw DataError("scaler dimensions disagree");
    const auto& p = j.at("params");
    ModelParams params;
    switch (spec.kind) {
      case ClassifierKind::knn: {
        KnnModel m;
        m.k = p.at("k").get<std::size_t>();
        m.dims = p.at("dims").get<std::size_t>();
        m.points = p.at("points").get<std::vector<double>>();
        for (const auto& l : p.at("labels")) m.labels.push_back(label_from(l));
        params = std::move(m);
        break;
      }
      case ClassifierKind::logistic:
        params = LogisticModel{p.at("weights").get<std::vector<double>>(), p.at("bias").get<double>()};
        break;
      case ClassifierKind::svm:
        params = SvmModel{p.at("gamma").get<double>(), p.at("dims").get<std::size_t>(),
                          p.at("support").get<std::vector<double>>(), p.at("coef").get<std::vector<double>>(),
                          p.at("bias").get<double>()};
        break;
      case ClassifierKind::mlp:
        params = MlpModel{p.at("inputs").get<std::size_t>(),       p.at("hidden").get<std::size_t>(),
                          p.at("w1").get<std::vector<double>>(),    p.at("b1").get<std::vector<double>>(),
                          p.at("w2").get<std::vector<double>>(),    p.at("b2").get<double>()};
        break;
      case ClassifierKind::random_forest: {
        ForestModel m;
        for (const auto& t : p.at("trees")) {
          DecisionTree tree;
          for (const auto& n : t) {
            tree.nodes.push_back({n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                                  n.at(3).get<std::int32_t>(), label_from(n.at(4))});
          }
          m.trees.push_back(std::move(tree));
        }
        params = std::move(m);
        break;
      }
    }
    return TrainedModel(std::move(spec), std::move(scaler), std::move(params));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  } catch (const InvalidInput& e) {
    throw DataError(std::string("invalid model document: ") + e.what());
  }
}

}  // namespace detail

std::string model_to_json(const TrainedModel& model) { return detail::model_to_json_value(model).dump(); }

TrainedModel model_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model JSON does not parse: ") + e.what());
  }
  return detail::model_from_json_value(j);
}

}  // namespace gaitdict
