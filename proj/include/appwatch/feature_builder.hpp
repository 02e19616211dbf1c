#pragma once

#include "appwatch/dataset.hpp"
#include "appwatch/date.hpp"
#include "appwatch/diff_engine.hpp"
#include "appwatch/market_model.hpp"
#include "appwatch/review_signals.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace appwatch {

inline constexpr int kFeatureSchemaVersion = 1;
inline constexpr int kFeatureCount = 13;

/// Everything known about one labelled app. `data_cutoff` is the last day
/// whose data may be used; it equals `reference_date` until truncated.
struct AppBundle {
    AppRecord app;
    std::vector<Review> reviews;
    std::vector<KeywordObservation> keywords;
    Date reference_date;
    Date data_cutoff;
    bool label = false;
};

/// Keeps only data dated <= reference_date - k and moves the cutoff there.
AppBundle truncate_bundle(const AppBundle& bundle, int advance_days);

struct FeatureConfig {
    int review_window_days = 30;
    int keyword_window_days = 7;
    AbnormalParams abnormal = kAbnormalLoose;

    nlohmann::json to_json() const;
    static FeatureConfig from_json(const nlohmann::json& j);
};

struct FeatureVector {
    double review_count_mean = 0.0;
    double review_stddev = 0.0;
    std::array<double, 5> rating_fractions{};
    double duplicate_fraction = 0.0;
    double abnormal_user_count = 0.0;
    double keyword_count_mean = 0.0;
    double keyword_stddev = 0.0;
    double coverage_count = 0.0;
    double coverage_fraction = 0.0;

    Eigen::Matrix<double, kFeatureCount, 1> values() const;
    static const std::array<std::string_view, kFeatureCount>& names();
};

struct SparsityFlags {
    bool no_reviews = false;
    bool no_keywords = false;
};

/// The abnormal-review table is built from the bundle itself.
FeatureVector build_feature_vector(const AppBundle& bundle, const FeatureConfig& config,
                                   SparsityFlags* sparsity = nullptr);

FeatureVector build_feature_vector(const AppBundle& bundle, const FeatureConfig& config,
                                   const AbnormalReviewTable& table,
                                   SparsityFlags* sparsity = nullptr);

struct FeatureDataset {
    LabeledDataset data;
    std::vector<SparsityFlags> sparsity;
    FeatureConfig config;
    int advance_days = 0;
    bool single_class = false;

    nlohmann::json sidecar() const;
};

/// Truncates every bundle by `advance_days`, builds the abnormal table from the
/// union of truncated reviews, then extracts one row per bundle in input order.
FeatureDataset build_dataset(std::span<const AppBundle> bundles, const FeatureConfig& config,
                             int advance_days);

/// Positives are referenced at their first removal; negatives at the last
/// snapshot date they were observed. Apps without a timeline are skipped.
std::vector<AppBundle> assemble_bundles(const std::map<std::string, AppTimeline>& timelines,
                                        const std::map<std::string, AppRecord>& latest_records,
                                        const std::map<std::string, bool>& labels,
                                        std::span<const Review> reviews,
                                        std::span<const KeywordObservation> keywords);

}  // namespace appwatch
