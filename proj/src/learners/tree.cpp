#include "appwatch/learners/tree.hpp"

#include "appwatch/error.hpp"

#include <algorithm>
#include <numeric>

namespace appwatch::learners {

namespace {

constexpr double kMinGain = 1e-12;

/// Per-sample impurity from target sums: variance, or Gini (= 2 x variance for 0/1 targets).
double impurity_from_sums(double sum, double sum_sq, double n, SplitCriterion criterion)
{
    if (n <= 0) return 0.0;
    const double sse = std::max(0.0, sum_sq - sum * sum / n);
    return (criterion == SplitCriterion::Gini ? 2.0 : 1.0) * sse / n;
}

struct Grower {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& target;
    SplitCriterion criterion;
    TreeGrowth growth;
    std::mt19937_64& rng;
    Tree tree;

    std::vector<int> node_features()
    {
        const int d = static_cast<int>(x.cols());
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        if (growth.max_features <= 0 || growth.max_features >= d) return all;
        for (int i = 0; i < growth.max_features; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
        }
        all.resize(static_cast<std::size_t>(growth.max_features));
        std::sort(all.begin(), all.end());
        return all;
    }

    int grow(std::vector<Eigen::Index> rows, int depth)
    {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        double sum = 0.0;
        for (auto r : rows) sum += target(r);
        tree.nodes[id].value = sum / static_cast<double>(rows.size());
        tree.nodes[id].samples = static_cast<int>(rows.size());

        const bool depth_left = growth.max_depth < 0 || depth < growth.max_depth;
        if (!depth_left || static_cast<int>(rows.size()) < 2 * std::max(1, growth.min_leaf) ||
            node_impurity(target, rows, criterion) <= kMinGain) {
            return id;
        }
        const std::vector<int> features = node_features();
        const SplitCandidate best =
            find_best_split(x, target, rows, features, criterion, std::max(1, growth.min_leaf));
        if (best.feature < 0 || best.gain <= kMinGain) return id;

        std::vector<Eigen::Index> left;
        std::vector<Eigen::Index> right;
        for (auto r : rows) (x(r, best.feature) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[id].feature = best.feature;
        tree.nodes[id].threshold = best.threshold;
        tree.nodes[id].gain = best.gain * tree.nodes[id].samples;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        tree.nodes[id].left = l;
        tree.nodes[id].right = r;
        return id;
    }
};

}  // namespace

double node_impurity(const Eigen::VectorXd& target, std::span<const Eigen::Index> rows,
                     SplitCriterion criterion)
{
    double sum = 0.0;
    double sum_sq = 0.0;
    for (auto r : rows) {
        sum += target(r);
        sum_sq += target(r) * target(r);
    }
    return impurity_from_sums(sum, sum_sq, static_cast<double>(rows.size()), criterion);
}

SplitCandidate find_best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                               std::span<const Eigen::Index> rows, std::span<const int> features,
                               SplitCriterion criterion, int min_leaf)
{
    SplitCandidate best;
    const auto n = static_cast<double>(rows.size());
    if (rows.size() < 2) return best;

    double total = 0.0;
    double total_sq = 0.0;
    for (auto r : rows) {
        total += target(r);
        total_sq += target(r) * target(r);
    }
    const double parent = impurity_from_sums(total, total_sq, n, criterion);

    std::vector<std::pair<double, double>> column(rows.size());
    for (int f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x(rows[i], f), target(rows[i])};
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double left_sum = 0.0;
        double left_sq = 0.0;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            left_sum += column[i].second;
            left_sq += column[i].second * column[i].second;
            if (column[i].first == column[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double children =
                (nl * impurity_from_sums(left_sum, left_sq, nl, criterion) +
                 nr * impurity_from_sums(total - left_sum, total_sq - left_sq, nr, criterion)) /
                n;
            const double gain = parent - children;
            if (best.feature < 0 || gain > best.gain + 1e-12) {
                const double lo = column[i].first;
                const double hi = column[i + 1].first;
                double threshold = lo + (hi - lo) / 2.0;
                if (!(threshold < hi)) threshold = lo;
                best = {f, threshold, gain};
            }
        }
    }
    return best;
}

Tree grow_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
               std::vector<Eigen::Index> rows, SplitCriterion criterion, const TreeGrowth& growth,
               std::mt19937_64& rng)
{
    if (rows.empty()) throw Error(Errc::EmptyDataset, "cannot grow a tree on zero rows");
    Grower g{x, target, criterion, growth, rng, {}};
    g.grow(std::move(rows), 0);
    return std::move(g.tree);
}

int Tree::depth() const
{
    std::vector<int> level(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (!nodes[i].is_leaf()) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

void Tree::accumulate_importance(Eigen::VectorXd& importance) const
{
    for (const auto& node : nodes) {
        if (!node.is_leaf()) importance(node.feature) += node.gain;
    }
}

nlohmann::json Tree::to_json() const
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& n : nodes) {
        out.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.gain, n.samples});
    }
    return out;
}

Tree Tree::from_json(const nlohmann::json& j)
{
    Tree t;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.value = n.at(4).get<double>();
        node.gain = n.at(5).get<double>();
        node.samples = n.at(6).get<int>();
        t.nodes.push_back(node);
    }
    const auto count = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes) {
        if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
            throw Error(Errc::InvalidArgument, "tree node references out of range");
        }
    }
    if (t.nodes.empty()) throw Error(Errc::InvalidArgument, "empty tree");
    return t;
}

}  // namespace appwatch::learners
