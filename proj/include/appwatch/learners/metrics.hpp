#pragma once

#include <Eigen/Core>

#include <optional>

namespace appwatch::learners {

struct EvalMetrics {
    std::optional<double> auc;  ///< absent when labels are single-class
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

/// Mann-Whitney AUC, ties counted one half. Throws DegenerateLabels.
double auc_score(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores);

/// Threshold metrics use score >= threshold as positive. Precision/recall are
/// 0 when their denominators are 0.
EvalMetrics evaluate_metrics(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores,
                             double threshold = 0.5);

}  // namespace appwatch::learners
