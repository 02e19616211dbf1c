#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace appwatch {

/// Dense design matrix with binary labels. Rows are samples.
struct LabeledDataset {
    Eigen::MatrixXd features;
    Eigen::VectorXi labels;  ///< 0 or 1
    std::vector<std::string> feature_names;
    std::vector<std::string> row_ids;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }
    Eigen::Index positives() const { return labels.sum(); }
    bool has_both_classes() const { return positives() > 0 && positives() < rows(); }

    /// Rows in the given order.
    LabeledDataset subset(const std::vector<Eigen::Index>& rows) const;

    /// Throws DimensionMismatch / NonFiniteFeature / InvalidArgument.
    void validate() const;
};

/// Header = feature names + `label`. An `app_id` column leads when row ids are set.
void write_dataset_csv(std::ostream& out, const LabeledDataset& data);
LabeledDataset read_dataset_csv(std::istream& in);

}  // namespace appwatch
