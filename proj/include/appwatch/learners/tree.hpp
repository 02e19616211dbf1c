#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace appwatch::learners {

enum class SplitCriterion { Gini, Variance };

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  ///< leaf output: positive fraction or mean target
    double gain = 0.0;   ///< impurity decrease weighted by node size
    int samples = 0;

    bool is_leaf() const { return feature < 0; }
};

/// Axis-aligned binary tree; `x[feature] <= threshold` goes left.
struct Tree {
    std::vector<TreeNode> nodes;

    template <typename Derived>
    double predict(const Eigen::MatrixBase<Derived>& x) const
    {
        int i = 0;
        while (!nodes[i].is_leaf()) {
            i = x(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        }
        return nodes[i].value;
    }

    int depth() const;
    void accumulate_importance(Eigen::VectorXd& importance) const;

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j);
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;  ///< impurity(parent) - weighted impurity(children), per sample
};

/// Best split of `rows` over `features`, scanning features in the given order
/// and thresholds ascending; only a strictly larger gain replaces the incumbent.
/// Thresholds are midpoints between consecutive distinct values. Returns
/// feature = -1 when no split leaves `min_leaf` rows on each side.
SplitCandidate find_best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                               std::span<const Eigen::Index> rows, std::span<const int> features,
                               SplitCriterion criterion, int min_leaf);

double node_impurity(const Eigen::VectorXd& target, std::span<const Eigen::Index> rows,
                     SplitCriterion criterion);

struct TreeGrowth {
    int max_depth = -1;  ///< negative = unlimited
    int min_leaf = 1;
    int max_features = 0;  ///< per-node feature sample; 0 or >= d = all features
};

/// Grows a CART tree on `rows` of `x`. For Gini, `target` holds 0/1 labels.
/// `rng` is only consulted when features are subsampled.
Tree grow_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
               std::vector<Eigen::Index> rows, SplitCriterion criterion, const TreeGrowth& growth,
               std::mt19937_64& rng);

}  // namespace appwatch::learners
