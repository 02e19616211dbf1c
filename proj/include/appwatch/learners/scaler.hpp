#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace appwatch::learners {

/// Per-feature standardization fitted on training rows. Constant features
/// get unit scale so they map to zero.
struct StandardScaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static StandardScaler fit(const Eigen::MatrixXd& x);

    template <typename Derived>
    Eigen::MatrixXd transform(const Eigen::MatrixBase<Derived>& x) const
    {
        return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
    }

    Eigen::Index dims() const { return mean.size(); }

    nlohmann::json to_json() const;
    static StandardScaler from_json(const nlohmann::json& j);
};

}  // namespace appwatch::learners
