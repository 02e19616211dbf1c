#include "appwatch/learners/scaler.hpp"

#include "appwatch/error.hpp"

namespace appwatch::learners {

StandardScaler StandardScaler::fit(const Eigen::MatrixXd& x)
{
    if (x.rows() == 0) throw Error(Errc::EmptyDataset, "cannot fit a scaler on zero rows");
    StandardScaler s;
    s.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
    s.scale = (centered.array().square().colwise().sum() / static_cast<double>(x.rows()))
                  .sqrt()
                  .transpose();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
        if (!(s.scale(j) > 1e-12 * std::max(1.0, std::abs(s.mean(j))))) s.scale(j) = 1.0;
    }
    return s;
}

nlohmann::json StandardScaler::to_json() const
{
    return {{"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
            {"scale", std::vector<double>(scale.data(), scale.data() + scale.size())}};
}

StandardScaler StandardScaler::from_json(const nlohmann::json& j)
{
    const auto m = j.at("mean").get<std::vector<double>>();
    const auto s = j.at("scale").get<std::vector<double>>();
    if (m.size() != s.size()) throw Error(Errc::DimensionMismatch, "scaler mean/scale lengths differ");
    StandardScaler out;
    out.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    out.scale = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    return out;
}

}  // namespace appwatch::learners
