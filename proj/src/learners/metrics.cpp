#include "appwatch/learners/metrics.hpp"

#include "appwatch/error.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace appwatch::learners {

double auc_score(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores)
{
    if (labels.size() != scores.size()) throw Error(Errc::DimensionMismatch, "labels vs scores");
    const Eigen::Index n = labels.size();
    const double pos = labels.cast<double>().sum();
    const double neg = static_cast<double>(n) - pos;
    if (pos == 0 || neg == 0) throw Error(Errc::DegenerateLabels, "AUC needs both classes");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores(a) < scores(b); });

    // Rank-sum with average ranks over tie groups.
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores(order[j + 1]) == scores(order[i])) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels(order[k]) == 1) rank_sum += avg_rank;
        }
        i = j + 1;
    }
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

EvalMetrics evaluate_metrics(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores,
                             double threshold)
{
    if (labels.size() != scores.size()) throw Error(Errc::DimensionMismatch, "labels vs scores");
    EvalMetrics m;
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const bool predicted = scores(i) >= threshold;
        const bool actual = labels(i) == 1;
        if (predicted && actual) ++tp;
        else if (predicted) ++fp;
        else if (actual) ++fn;
        else ++tn;
    }
    m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.accuracy = labels.size() > 0 ? (tp + tn) / static_cast<double>(labels.size()) : 0.0;
    if (tp + fn > 0 && fp + tn > 0) m.auc = auc_score(labels, scores);
    return m;
}

}  // namespace appwatch::learners
