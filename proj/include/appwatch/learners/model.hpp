#pragma once

#include "appwatch/dataset.hpp"
#include "appwatch/learners/scaler.hpp"
#include "appwatch/learners/tree.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace appwatch::learners {

inline constexpr int kModelFormatVersion = 1;

enum class ModelKind { LogisticRegression, LinearSvm, Knn, DecisionTree, RandomForest, Gbdt };

std::string_view to_string(ModelKind kind);
/// Accepts the short names `lr`, `svm`, `knn`, `tree`, `rf`, `gbdt`.
ModelKind parse_model_kind(std::string_view name);

struct LogisticParams {
    double learning_rate = 0.1;
    double l2 = 1e-3;
    int epochs = 500;
    std::uint64_t seed = 0;
};

struct SvmParams {
    double lambda = 1e-3;
    int epochs = 20;
    std::uint64_t seed = 0;
};

struct KnnParams {
    int k = 5;
};

struct TreeParams {
    int max_depth = -1;
    int min_leaf = 1;
    std::uint64_t seed = 0;
};

struct ForestParams {
    int n_trees = 100;
    int max_depth = 8;
    int min_leaf = 1;
    int max_features = -1;  ///< -1 = floor(sqrt(d)); 0 or >= d = all features
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct GbdtParams {
    int n_rounds = 200;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_leaf = 1;
    std::uint64_t seed = 0;
};

using HyperParams =
    std::variant<LogisticParams, SvmParams, KnnParams, TreeParams, ForestParams, GbdtParams>;

/// A model kind plus its hyperparameters; the unit `cross_validate` trains.
struct ModelSpec {
    HyperParams params;

    ModelKind kind() const;
    std::string name() const { return std::string(to_string(kind())); }
    /// Copy with the seed replaced (no-op for KNN).
    ModelSpec with_seed(std::uint64_t seed) const;

    /// Default hyperparameters for a kind name.
    static ModelSpec defaults(std::string_view name);

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

struct LinearWeights {
    Eigen::VectorXd weights;
    double bias = 0.0;
};

struct KnnMemory {
    Eigen::MatrixXd points;  ///< standardized training rows
    Eigen::VectorXi labels;
    int k = 5;
};

struct TreeEnsemble {
    double base_score = 0.0;  ///< GBDT raw prior; unused for forests
    double learning_rate = 1.0;
    std::vector<Tree> trees;
};

/// Trained classifier. Inputs are raw feature vectors; the fitted scaler is
/// applied internally.
class Model {
public:
    using Payload = std::variant<LinearWeights, KnnMemory, Tree, TreeEnsemble>;

    Model(ModelKind kind, StandardScaler scaler, Payload payload,
          std::vector<std::string> feature_names, ModelSpec spec);

    ModelKind kind() const { return kind_; }
    const ModelSpec& spec() const { return spec_; }
    const StandardScaler& scaler() const { return scaler_; }
    const Payload& payload() const { return payload_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    /// Score in [0,1]. Throws DimensionMismatch.
    double predict_score(const Eigen::VectorXd& features) const;
    Eigen::VectorXd predict_scores(const Eigen::MatrixXd& features) const;
    /// Raw margin before the link (log-odds for LR/GBDT, signed margin for SVM).
    double decision_value(const Eigen::VectorXd& standardized) const;

    /// Split-gain sums for trees, |weight| for linear models, uniform for KNN;
    /// normalized to sum to 1.
    Eigen::VectorXd feature_importance() const;

    nlohmann::json to_json() const;
    static Model from_json(const nlohmann::json& j);

private:
    double score_standardized(const Eigen::VectorXd& z) const;

    ModelKind kind_;
    StandardScaler scaler_;
    Payload payload_;
    std::vector<std::string> feature_names_;
    ModelSpec spec_;
};

/// Per-iteration training loss, recorded when requested.
struct TrainingTrace {
    std::vector<double> loss;
};

Model train_logistic(const LabeledDataset& data, const LogisticParams& params,
                     TrainingTrace* trace = nullptr);
Model train_linear_svm(const LabeledDataset& data, const SvmParams& params,
                       TrainingTrace* trace = nullptr);
Model train_knn(const LabeledDataset& data, const KnnParams& params);
Model train_decision_tree(const LabeledDataset& data, const TreeParams& params);
Model train_random_forest(const LabeledDataset& data, const ForestParams& params);
Model train_gbdt(const LabeledDataset& data, const GbdtParams& params,
                 TrainingTrace* trace = nullptr);

Model train(const LabeledDataset& data, const ModelSpec& spec);

struct LossAndGradient {
    double loss = 0.0;
    Eigen::VectorXd grad_weights;
    double grad_bias = 0.0;
};

/// Mean logistic loss + (l2/2)|w|^2 over standardized rows; labels 0/1.
LossAndGradient logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                   const Eigen::VectorXd& w, double b, double l2);

/// Mean hinge loss + (lambda/2)|w|^2 with labels mapped to -1/+1. The
/// subgradient takes 0 at the kink.
LossAndGradient hinge_objective(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                const Eigen::VectorXd& w, double b, double lambda);

/// Mean binary log-loss of raw scores (log-odds).
double logistic_loss(const Eigen::VectorXd& raw, const Eigen::VectorXi& y);

/// Indices of the k nearest rows to `query` by Euclidean distance, ties by lower index.
std::vector<Eigen::Index> nearest_neighbors(const Eigen::MatrixXd& points,
                                            const Eigen::VectorXd& query, int k);

}  // namespace appwatch::learners
