#include "appwatch/learners/model.hpp"

#include "appwatch/error.hpp"
#include "appwatch/learners/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace appwatch::learners {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sigmoid(double z)
{
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
double softplus(double z)
{
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void require_both_classes(const LabeledDataset& data)
{
    if (data.rows() == 0) throw Error(Errc::EmptyDataset, "no training rows");
    if (!data.has_both_classes()) throw Error(Errc::SingleClass, "training labels contain one class");
}

std::vector<std::string> names_or_default(const LabeledDataset& data)
{
    if (!data.feature_names.empty()) return data.feature_names;
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < data.cols(); ++j) names.push_back("f" + std::to_string(j));
    return names;
}

json vec_to_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from_json(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<Eigen::Index> all_rows(Eigen::Index n)
{
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    return rows;
}

}  // namespace

std::string_view to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::LogisticRegression: return "lr";
    case ModelKind::LinearSvm: return "svm";
    case ModelKind::Knn: return "knn";
    case ModelKind::DecisionTree: return "tree";
    case ModelKind::RandomForest: return "rf";
    case ModelKind::Gbdt: return "gbdt";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name)
{
    for (auto k : {ModelKind::LogisticRegression, ModelKind::LinearSvm, ModelKind::Knn,
                   ModelKind::DecisionTree, ModelKind::RandomForest, ModelKind::Gbdt}) {
        if (to_string(k) == name) return k;
    }
    throw Error(Errc::ConfigInvalid, "unknown model '" + std::string(name) + "'");
}

ModelKind ModelSpec::kind() const
{
    return std::visit(Overloaded{
                          [](const LogisticParams&) { return ModelKind::LogisticRegression; },
                          [](const SvmParams&) { return ModelKind::LinearSvm; },
                          [](const KnnParams&) { return ModelKind::Knn; },
                          [](const TreeParams&) { return ModelKind::DecisionTree; },
                          [](const ForestParams&) { return ModelKind::RandomForest; },
                          [](const GbdtParams&) { return ModelKind::Gbdt; },
                      },
                      params);
}

ModelSpec ModelSpec::with_seed(std::uint64_t seed) const
{
    ModelSpec out = *this;
    std::visit(Overloaded{[](KnnParams&) {}, [&](auto& p) { p.seed = seed; }}, out.params);
    return out;
}

ModelSpec ModelSpec::defaults(std::string_view name)
{
    switch (parse_model_kind(name)) {
    case ModelKind::LogisticRegression: return {LogisticParams{}};
    case ModelKind::LinearSvm: return {SvmParams{}};
    case ModelKind::Knn: return {KnnParams{}};
    case ModelKind::DecisionTree: return {TreeParams{}};
    case ModelKind::RandomForest: return {ForestParams{}};
    case ModelKind::Gbdt: return {GbdtParams{}};
    }
    throw Error(Errc::ConfigInvalid, std::string(name));
}

json ModelSpec::to_json() const
{
    json j = std::visit(
        Overloaded{
            [](const LogisticParams& p) {
                return json{{"learning_rate", p.learning_rate}, {"l2", p.l2}, {"epochs", p.epochs}, {"seed", p.seed}};
            },
            [](const SvmParams& p) {
                return json{{"lambda", p.lambda}, {"epochs", p.epochs}, {"seed", p.seed}};
            },
            [](const KnnParams& p) { return json{{"k", p.k}}; },
            [](const TreeParams& p) {
                return json{{"max_depth", p.max_depth}, {"min_leaf", p.min_leaf}, {"seed", p.seed}};
            },
            [](const ForestParams& p) {
                return json{{"n_trees", p.n_trees},     {"max_depth", p.max_depth},
                            {"min_leaf", p.min_leaf},   {"max_features", p.max_features},
                            {"bootstrap", p.bootstrap}, {"seed", p.seed}};
            },
            [](const GbdtParams& p) {
                return json{{"n_rounds", p.n_rounds}, {"learning_rate", p.learning_rate},
                            {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf}, {"seed", p.seed}};
            },
        },
        params);
    j["kind"] = to_string(kind());
    return j;
}

ModelSpec ModelSpec::from_json(const json& j)
{
    ModelSpec spec = defaults(j.at("kind").get<std::string>());
    std::visit(Overloaded{
                   [&](LogisticParams& p) {
                       p.learning_rate = j.value("learning_rate", p.learning_rate);
                       p.l2 = j.value("l2", p.l2);
                       p.epochs = j.value("epochs", p.epochs);
                       p.seed = j.value("seed", p.seed);
                   },
                   [&](SvmParams& p) {
                       p.lambda = j.value("lambda", p.lambda);
                       p.epochs = j.value("epochs", p.epochs);
                       p.seed = j.value("seed", p.seed);
                   },
                   [&](KnnParams& p) { p.k = j.value("k", p.k); },
                   [&](TreeParams& p) {
                       p.max_depth = j.value("max_depth", p.max_depth);
                       p.min_leaf = j.value("min_leaf", p.min_leaf);
                       p.seed = j.value("seed", p.seed);
                   },
                   [&](ForestParams& p) {
                       p.n_trees = j.value("n_trees", p.n_trees);
                       p.max_depth = j.value("max_depth", p.max_depth);
                       p.min_leaf = j.value("min_leaf", p.min_leaf);
                       p.max_features = j.value("max_features", p.max_features);
                       p.bootstrap = j.value("bootstrap", p.bootstrap);
                       p.seed = j.value("seed", p.seed);
                   },
                   [&](GbdtParams& p) {
                       p.n_rounds = j.value("n_rounds", p.n_rounds);
                       p.learning_rate = j.value("learning_rate", p.learning_rate);
                       p.max_depth = j.value("max_depth", p.max_depth);
                       p.min_leaf = j.value("min_leaf", p.min_leaf);
                       p.seed = j.value("seed", p.seed);
                   },
               },
               spec.params);
    return spec;
}

Model::Model(ModelKind kind, StandardScaler scaler, Payload payload,
             std::vector<std::string> feature_names, ModelSpec spec)
    : kind_(kind),
      scaler_(std::move(scaler)),
      payload_(std::move(payload)),
      feature_names_(std::move(feature_names)),
      spec_(std::move(spec))
{
}

double Model::decision_value(const Eigen::VectorXd& z) const
{
    switch (kind_) {
    case ModelKind::LogisticRegression:
    case ModelKind::LinearSvm: {
        const auto& lw = std::get<LinearWeights>(payload_);
        return lw.weights.dot(z) + lw.bias;
    }
    case ModelKind::Gbdt: {
        const auto& e = std::get<TreeEnsemble>(payload_);
        double raw = e.base_score;
        for (const auto& t : e.trees) raw += e.learning_rate * t.predict(z);
        return raw;
    }
    default: return score_standardized(z);
    }
}

double Model::score_standardized(const Eigen::VectorXd& z) const
{
    switch (kind_) {
    case ModelKind::LogisticRegression:
    case ModelKind::LinearSvm:
    case ModelKind::Gbdt: return sigmoid(decision_value(z));
    case ModelKind::Knn: {
        const auto& mem = std::get<KnnMemory>(payload_);
        double pos = 0.0;
        for (auto i : nearest_neighbors(mem.points, z, mem.k)) pos += mem.labels(i);
        return pos / static_cast<double>(mem.k);
    }
    case ModelKind::DecisionTree: return std::get<Tree>(payload_).predict(z);
    case ModelKind::RandomForest: {
        const auto& e = std::get<TreeEnsemble>(payload_);
        double sum = 0.0;
        for (const auto& t : e.trees) sum += t.predict(z);
        return sum / static_cast<double>(e.trees.size());
    }
    }
    return 0.5;
}

double Model::predict_score(const Eigen::VectorXd& features) const
{
    if (features.size() != scaler_.dims()) {
        throw Error(Errc::DimensionMismatch, "expected " + std::to_string(scaler_.dims()) +
                                                 " features, got " + std::to_string(features.size()));
    }
    const Eigen::VectorXd z = (features - scaler_.mean).cwiseQuotient(scaler_.scale);
    return std::clamp(score_standardized(z), 0.0, 1.0);
}

Eigen::VectorXd Model::predict_scores(const Eigen::MatrixXd& features) const
{
    if (features.cols() != scaler_.dims()) {
        throw Error(Errc::DimensionMismatch, "expected " + std::to_string(scaler_.dims()) +
                                                 " columns, got " + std::to_string(features.cols()));
    }
    const Eigen::MatrixXd z = scaler_.transform(features);
    Eigen::VectorXd out(features.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        out(i) = std::clamp(score_standardized(z.row(i).transpose()), 0.0, 1.0);
    }
    return out;
}

Eigen::VectorXd Model::feature_importance() const
{
    const Eigen::Index d = scaler_.dims();
    Eigen::VectorXd imp = Eigen::VectorXd::Zero(d);
    std::visit(Overloaded{
                   [&](const LinearWeights& lw) { imp = lw.weights.cwiseAbs(); },
                   [&](const KnnMemory&) {},
                   [&](const Tree& t) { t.accumulate_importance(imp); },
                   [&](const TreeEnsemble& e) {
                       for (const auto& t : e.trees) t.accumulate_importance(imp);
                   },
               },
               payload_);
    const double total = imp.sum();
    if (!(total > 0.0)) return Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
    return imp / total;
}

json Model::to_json() const
{
    json payload = std::visit(
        Overloaded{
            [](const LinearWeights& lw) { return json{{"weights", vec_to_json(lw.weights)}, {"bias", lw.bias}}; },
            [](const KnnMemory& m) {
                json points = json::array();
                for (Eigen::Index i = 0; i < m.points.rows(); ++i) points.push_back(vec_to_json(m.points.row(i).transpose()));
                return json{{"k", m.k},
                            {"points", points},
                            {"labels", std::vector<int>(m.labels.data(), m.labels.data() + m.labels.size())}};
            },
            [](const Tree& t) { return json{{"tree", t.to_json()}}; },
            [](const TreeEnsemble& e) {
                json trees = json::array();
                for (const auto& t : e.trees) trees.push_back(t.to_json());
                return json{{"base_score", e.base_score}, {"learning_rate", e.learning_rate}, {"trees", trees}};
            },
        },
        payload_);
    return json{{"format", "appwatch-model"},
                {"version", kModelFormatVersion},
                {"kind", to_string(kind_)},
                {"feature_names", feature_names_},
                {"spec", spec_.to_json()},
                {"scaler", scaler_.to_json()},
                {"payload", payload}};
}

Model Model::from_json(const json& j)
{
    if (j.value("format", "") != "appwatch-model") throw Error(Errc::InvalidArgument, "not a model file");
    if (j.at("version").get<int>() != kModelFormatVersion) {
        throw Error(Errc::InvalidArgument, "unsupported model version");
    }
    const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
    const json& p = j.at("payload");
    Payload payload;
    switch (kind) {
    case ModelKind::LogisticRegression:
    case ModelKind::LinearSvm:
        payload = LinearWeights{vec_from_json(p.at("weights")), p.at("bias").get<double>()};
        break;
    case ModelKind::Knn: {
        KnnMemory m;
        m.k = p.at("k").get<int>();
        const auto& pts = p.at("points");
        const auto labels = p.at("labels").get<std::vector<int>>();
        const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
        const Eigen::Index d = n > 0 ? static_cast<Eigen::Index>(pts.at(0).size()) : 0;
        m.points.resize(n, d);
        for (Eigen::Index i = 0; i < n; ++i) m.points.row(i) = vec_from_json(pts.at(static_cast<std::size_t>(i))).transpose();
        m.labels = Eigen::Map<const Eigen::VectorXi>(labels.data(), static_cast<Eigen::Index>(labels.size()));
        payload = std::move(m);
        break;
    }
    case ModelKind::DecisionTree: payload = Tree::from_json(p.at("tree")); break;
    case ModelKind::RandomForest:
    case ModelKind::Gbdt: {
        TreeEnsemble e;
        e.base_score = p.at("base_score").get<double>();
        e.learning_rate = p.at("learning_rate").get<double>();
        for (const auto& t : p.at("trees")) e.trees.push_back(Tree::from_json(t));
        payload = std::move(e);
        break;
    }
    }
    return Model(kind, StandardScaler::from_json(j.at("scaler")), std::move(payload),
                 j.at("feature_names").get<std::vector<std::string>>(),
                 ModelSpec::from_json(j.at("spec")));
}

LossAndGradient logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                   const Eigen::VectorXd& w, double b, double l2)
{
    const double n = static_cast<double>(x.rows());
    const Eigen::VectorXd margin = (x * w).array() + b;
    Eigen::VectorXd residual(x.rows());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        // -log p(y|x) = softplus(z) - y z
        loss += softplus(margin(i)) - y(i) * margin(i);
        residual(i) = sigmoid(margin(i)) - y(i);
    }
    LossAndGradient out;
    out.loss = loss / n + 0.5 * l2 * w.squaredNorm();
    out.grad_weights = x.transpose() * residual / n + l2 * w;
    out.grad_bias = residual.sum() / n;
    return out;
}

LossAndGradient hinge_objective(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                const Eigen::VectorXd& w, double b, double lambda)
{
    const double n = static_cast<double>(x.rows());
    LossAndGradient out;
    out.grad_weights = lambda * w;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double s = y(i) == 1 ? 1.0 : -1.0;
        const double m = s * (x.row(i).dot(w) + b);
        if (m < 1.0) {
            loss += 1.0 - m;
            out.grad_weights -= s * x.row(i).transpose() / n;
            out.grad_bias -= s / n;
        }
    }
    out.loss = loss / n + 0.5 * lambda * w.squaredNorm();
    return out;
}

double logistic_loss(const Eigen::VectorXd& raw, const Eigen::VectorXi& y)
{
    double loss = 0.0;
    for (Eigen::Index i = 0; i < raw.size(); ++i) loss += softplus(raw(i)) - y(i) * raw(i);
    return loss / static_cast<double>(raw.size());
}

std::vector<Eigen::Index> nearest_neighbors(const Eigen::MatrixXd& points,
                                            const Eigen::VectorXd& query, int k)
{
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        dist[static_cast<std::size_t>(i)] = {(points.row(i).transpose() - query).squaredNorm(), i};
    }
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    std::vector<Eigen::Index> out;
    out.reserve(kk);
    for (std::size_t i = 0; i < kk; ++i) out.push_back(dist[i].second);
    return out;
}

Model train_logistic(const LabeledDataset& data, const LogisticParams& params, TrainingTrace* trace)
{
    data.validate();
    require_both_classes(data);
    StandardScaler scaler = StandardScaler::fit(data.features);
    const Eigen::MatrixXd z = scaler.transform(data.features);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(z.cols());
    double b = 0.0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const LossAndGradient g = logistic_objective(z, data.labels, w, b, params.l2);
        if (trace) trace->loss.push_back(g.loss);
        w -= params.learning_rate * g.grad_weights;
        b -= params.learning_rate * g.grad_bias;
    }
    if (trace) trace->loss.push_back(logistic_objective(z, data.labels, w, b, params.l2).loss);
    return Model(ModelKind::LogisticRegression, std::move(scaler), LinearWeights{w, b},
                 names_or_default(data), ModelSpec{params});
}

Model train_linear_svm(const LabeledDataset& data, const SvmParams& params, TrainingTrace* trace)
{
    data.validate();
    require_both_classes(data);
    if (!(params.lambda > 0.0)) throw Error(Errc::InvalidArgument, "svm lambda must be > 0");
    StandardScaler scaler = StandardScaler::fit(data.features);
    const Eigen::MatrixXd z = scaler.transform(data.features);

    // SGD on the primal with eta_t = eta0 / (1 + eta0 * lambda * t).
    constexpr double eta0 = 0.1;
    std::mt19937_64 rng(params.seed);
    std::vector<Eigen::Index> order = all_rows(z.rows());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(z.cols());
    double b = 0.0;
    double t = 0.0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) {
            const double eta = eta0 / (1.0 + eta0 * params.lambda * t);
            const double s = data.labels(i) == 1 ? 1.0 : -1.0;
            const double m = s * (z.row(i).dot(w) + b);
            w *= 1.0 - eta * params.lambda;
            if (m < 1.0) {
                w += eta * s * z.row(i).transpose();
                b += eta * s;
            }
            t += 1.0;
        }
        if (trace) trace->loss.push_back(hinge_objective(z, data.labels, w, b, params.lambda).loss);
    }
    return Model(ModelKind::LinearSvm, std::move(scaler), LinearWeights{w, b},
                 names_or_default(data), ModelSpec{params});
}

Model train_knn(const LabeledDataset& data, const KnnParams& params)
{
    data.validate();
    if (data.rows() == 0) throw Error(Errc::EmptyDataset, "no training rows");
    if (params.k < 1 || params.k > data.rows()) {
        throw Error(Errc::InvalidArgument, "k=" + std::to_string(params.k) + " with n=" +
                                               std::to_string(data.rows()));
    }
    StandardScaler scaler = StandardScaler::fit(data.features);
    KnnMemory mem{scaler.transform(data.features), data.labels, params.k};
    return Model(ModelKind::Knn, std::move(scaler), std::move(mem), names_or_default(data),
                 ModelSpec{params});
}

Model train_decision_tree(const LabeledDataset& data, const TreeParams& params)
{
    data.validate();
    if (data.rows() == 0) throw Error(Errc::EmptyDataset, "no training rows");
    StandardScaler scaler = StandardScaler::fit(data.features);
    const Eigen::MatrixXd z = scaler.transform(data.features);
    const Eigen::VectorXd target = data.labels.cast<double>();
    std::mt19937_64 rng(params.seed);
    Tree tree = grow_tree(z, target, all_rows(z.rows()), SplitCriterion::Gini,
                          TreeGrowth{params.max_depth, params.min_leaf, 0}, rng);
    return Model(ModelKind::DecisionTree, std::move(scaler), std::move(tree), names_or_default(data),
                 ModelSpec{params});
}

Model train_random_forest(const LabeledDataset& data, const ForestParams& params)
{
    data.validate();
    if (data.rows() == 0) throw Error(Errc::EmptyDataset, "no training rows");
    if (params.n_trees < 1) throw Error(Errc::InvalidArgument, "n_trees must be >= 1");
    StandardScaler scaler = StandardScaler::fit(data.features);
    const Eigen::MatrixXd z = scaler.transform(data.features);
    const Eigen::VectorXd target = data.labels.cast<double>();
    const auto d = static_cast<int>(z.cols());
    const int max_features =
        params.max_features < 0 ? std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))))
                                : params.max_features;

    TreeEnsemble forest;
    for (int t = 0; t < params.n_trees; ++t) {
        std::mt19937_64 rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
        std::vector<Eigen::Index> rows;
        if (params.bootstrap) {
            std::uniform_int_distribution<Eigen::Index> pick(0, z.rows() - 1);
            rows.resize(static_cast<std::size_t>(z.rows()));
            for (auto& r : rows) r = pick(rng);
        } else {
            rows = all_rows(z.rows());
        }
        forest.trees.push_back(grow_tree(z, target, std::move(rows), SplitCriterion::Gini,
                                         TreeGrowth{params.max_depth, params.min_leaf, max_features},
                                         rng));
    }
    return Model(ModelKind::RandomForest, std::move(scaler), std::move(forest),
                 names_or_default(data), ModelSpec{params});
}

Model train_gbdt(const LabeledDataset& data, const GbdtParams& params, TrainingTrace* trace)
{
    data.validate();
    require_both_classes(data);
    if (params.n_rounds < 0) throw Error(Errc::InvalidArgument, "n_rounds must be >= 0");
    StandardScaler scaler = StandardScaler::fit(data.features);
    const Eigen::MatrixXd z = scaler.transform(data.features);
    const Eigen::Index n = z.rows();

    const double prior = static_cast<double>(data.positives()) / static_cast<double>(n);
    TreeEnsemble ensemble;
    ensemble.base_score = std::log(prior / (1.0 - prior));
    ensemble.learning_rate = params.learning_rate;

    Eigen::VectorXd raw = Eigen::VectorXd::Constant(n, ensemble.base_score);
    if (trace) trace->loss.push_back(logistic_loss(raw, data.labels));
    std::mt19937_64 rng(params.seed);
    Eigen::VectorXd residual(n);
    for (int round = 0; round < params.n_rounds; ++round) {
        for (Eigen::Index i = 0; i < n; ++i) residual(i) = data.labels(i) - sigmoid(raw(i));
        Tree tree = grow_tree(z, residual, all_rows(n), SplitCriterion::Variance,
                              TreeGrowth{params.max_depth, params.min_leaf, 0}, rng);
        for (Eigen::Index i = 0; i < n; ++i) {
            raw(i) += params.learning_rate * tree.predict(z.row(i).transpose());
        }
        ensemble.trees.push_back(std::move(tree));
        if (trace) trace->loss.push_back(logistic_loss(raw, data.labels));
    }
    return Model(ModelKind::Gbdt, std::move(scaler), std::move(ensemble), names_or_default(data),
                 ModelSpec{params});
}

Model train(const LabeledDataset& data, const ModelSpec& spec)
{
    return std::visit(Overloaded{
                          [&](const LogisticParams& p) { return train_logistic(data, p); },
                          [&](const SvmParams& p) { return train_linear_svm(data, p); },
                          [&](const KnnParams& p) { return train_knn(data, p); },
                          [&](const TreeParams& p) { return train_decision_tree(data, p); },
                          [&](const ForestParams& p) { return train_random_forest(data, p); },
                          [&](const GbdtParams& p) { return train_gbdt(data, p); },
                      },
                      spec.params);
}

}  // namespace appwatch::learners
