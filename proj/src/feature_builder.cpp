#include "appwatch/feature_builder.hpp"

#include "appwatch/aso_signals.hpp"
#include "appwatch/error.hpp"
#include "appwatch/stats.hpp"
#include "appwatch/review_signals.hpp"

#include <algorithm>

namespace appwatch {

using nlohmann::json;

AppBundle truncate_bundle(const AppBundle& bundle, int advance_days)
{
    if (advance_days < 0) throw Error(Errc::InvalidArgument, "advance_days must be >= 0");
    const Date cutoff = bundle.reference_date - advance_days;
    AppBundle out;
    out.app = bundle.app;
    out.reference_date = bundle.reference_date;
    out.data_cutoff = std::min(cutoff, bundle.data_cutoff);
    out.label = bundle.label;
    std::copy_if(bundle.reviews.begin(), bundle.reviews.end(), std::back_inserter(out.reviews),
                 [&](const Review& r) { return r.date <= out.data_cutoff; });
    std::copy_if(bundle.keywords.begin(), bundle.keywords.end(), std::back_inserter(out.keywords),
                 [&](const KeywordObservation& k) { return k.date <= out.data_cutoff; });
    return out;
}

json FeatureConfig::to_json() const
{
    return json{{"review_window_days", review_window_days},
                {"keyword_window_days", keyword_window_days},
                {"abnormal_min_words", abnormal.min_words},
                {"abnormal_min_occurrences", abnormal.min_occurrences}};
}

FeatureConfig FeatureConfig::from_json(const json& j)
{
    FeatureConfig c;
    c.review_window_days = j.value("review_window_days", c.review_window_days);
    c.keyword_window_days = j.value("keyword_window_days", c.keyword_window_days);
    c.abnormal.min_words = j.value("abnormal_min_words", c.abnormal.min_words);
    c.abnormal.min_occurrences = j.value("abnormal_min_occurrences", c.abnormal.min_occurrences);
    if (c.review_window_days < 1 || c.keyword_window_days < 1) {
        throw Error(Errc::ConfigInvalid, "feature windows must be >= 1 day");
    }
    c.abnormal.validate();
    return c;
}

Eigen::Matrix<double, kFeatureCount, 1> FeatureVector::values() const
{
    Eigen::Matrix<double, kFeatureCount, 1> v;
    v << review_count_mean, review_stddev, rating_fractions[0], rating_fractions[1],
        rating_fractions[2], rating_fractions[3], rating_fractions[4], duplicate_fraction,
        abnormal_user_count, keyword_count_mean, keyword_stddev, coverage_count, coverage_fraction;
    return v;
}

const std::array<std::string_view, kFeatureCount>& FeatureVector::names()
{
    static constexpr std::array<std::string_view, kFeatureCount> kNames = {
        "review_count_mean", "review_stddev",      "rating_1_fraction",
        "rating_2_fraction", "rating_3_fraction",  "rating_4_fraction",
        "rating_5_fraction", "duplicate_fraction", "abnormal_user_count",
        "keyword_count_mean", "keyword_stddev",    "coverage_count",
        "coverage_fraction",
    };
    return kNames;
}

FeatureVector build_feature_vector(const AppBundle& bundle, const FeatureConfig& config,
                                   SparsityFlags* sparsity)
{
    const AbnormalReviewTable table(bundle.reviews);
    return build_feature_vector(bundle, config, table, sparsity);
}

FeatureVector build_feature_vector(const AppBundle& bundle, const FeatureConfig& config,
                                   const AbnormalReviewTable& table, SparsityFlags* sparsity)
{
    const Window review_window{bundle.data_cutoff, config.review_window_days};
    const Window keyword_window{bundle.data_cutoff, config.keyword_window_days};

    std::vector<Review> in_window;
    for (const auto& r : bundle.reviews) {
        if (review_window.contains(r.date)) in_window.push_back(r);
    }

    FeatureVector f;
    const DailyReviewStats daily = daily_review_stats(in_window, review_window);
    f.review_count_mean = daily.mean;
    f.review_stddev = daily.stddev;
    f.rating_fractions = star_distribution(in_window).fractions;
    f.duplicate_fraction = duplicate_stats(in_window).fraction;
    f.abnormal_user_count = static_cast<double>(table.abnormal_user_count(in_window, config.abnormal));

    const DailySeries keywords = keyword_daily_series(bundle.keywords, keyword_window);
    f.keyword_count_mean = stats::mean(keywords.values);
    f.keyword_stddev = series_stddev(keywords);
    const CoverageResult coverage =
        description_coverage(bundle.app.description, bundle.keywords, keyword_window);
    f.coverage_count = static_cast<double>(coverage.coverage_count);
    f.coverage_fraction = coverage.coverage_fraction;

    if (sparsity) {
        sparsity->no_reviews = in_window.empty();
        sparsity->no_keywords = coverage.distinct_keywords == 0;
    }
    return f;
}

json FeatureDataset::sidecar() const
{
    json names = json::array();
    for (const auto& n : data.feature_names) names.push_back(n);
    json no_reviews = json::array();
    json no_keywords = json::array();
    for (std::size_t i = 0; i < sparsity.size(); ++i) {
        const std::string id = i < data.row_ids.size() ? data.row_ids[i] : std::to_string(i);
        if (sparsity[i].no_reviews) no_reviews.push_back(id);
        if (sparsity[i].no_keywords) no_keywords.push_back(id);
    }
    return json{{"version", kFeatureSchemaVersion},
                {"feature_names", names},
                {"config", config.to_json()},
                {"advance_days", advance_days},
                {"rows", data.rows()},
                {"positives", data.positives()},
                {"single_class", single_class},
                {"sparsity", {{"no_reviews", no_reviews}, {"no_keywords", no_keywords}}}};
}

FeatureDataset build_dataset(std::span<const AppBundle> bundles, const FeatureConfig& config,
                             int advance_days)
{
    if (bundles.empty()) throw Error(Errc::EmptyDataset, "no bundles");
    config.abnormal.validate();

    std::vector<AppBundle> truncated;
    truncated.reserve(bundles.size());
    for (const auto& b : bundles) truncated.push_back(truncate_bundle(b, advance_days));

    AbnormalReviewTable table;
    for (const auto& b : truncated) table.add(b.reviews);

    FeatureDataset out;
    out.config = config;
    out.advance_days = advance_days;
    const auto n = static_cast<Eigen::Index>(truncated.size());
    out.data.features.resize(n, kFeatureCount);
    out.data.labels.resize(n);
    for (auto name : FeatureVector::names()) out.data.feature_names.emplace_back(name);
    out.sparsity.resize(truncated.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const AppBundle& b = truncated[static_cast<std::size_t>(i)];
        out.data.features.row(i) =
            build_feature_vector(b, config, table, &out.sparsity[static_cast<std::size_t>(i)])
                .values()
                .transpose();
        out.data.labels(i) = b.label ? 1 : 0;
        out.data.row_ids.push_back(b.app.app_id);
    }
    out.single_class = !out.data.has_both_classes();
    out.data.validate();
    return out;
}

std::vector<AppBundle> assemble_bundles(const std::map<std::string, AppTimeline>& timelines,
                                        const std::map<std::string, AppRecord>& latest_records,
                                        const std::map<std::string, bool>& labels,
                                        std::span<const Review> reviews,
                                        std::span<const KeywordObservation> keywords)
{
    std::map<std::string, std::vector<const Review*>> reviews_by_app;
    for (const auto& r : reviews) {
        if (labels.contains(r.app_id)) reviews_by_app[r.app_id].push_back(&r);
    }
    std::map<std::string, std::vector<const KeywordObservation*>> keywords_by_app;
    for (const auto& k : keywords) {
        if (labels.contains(k.app_id)) keywords_by_app[k.app_id].push_back(&k);
    }

    std::vector<AppBundle> bundles;
    for (const auto& [id, label] : labels) {
        auto t = timelines.find(id);
        auto rec = latest_records.find(id);
        if (t == timelines.end() || rec == latest_records.end()) continue;

        AppBundle b;
        b.app = rec->second;
        b.label = label;
        const auto removal = t->second.first_removal();
        b.reference_date = (label && removal) ? *removal : t->second.last_seen;
        b.data_cutoff = b.reference_date;
        for (const Review* r : reviews_by_app[id]) {
            if (r->date <= b.reference_date) b.reviews.push_back(*r);
        }
        for (const KeywordObservation* k : keywords_by_app[id]) {
            if (k->date <= b.reference_date) b.keywords.push_back(*k);
        }
        std::stable_sort(b.reviews.begin(), b.reviews.end(),
                         [](const Review& a, const Review& c) { return a.date < c.date; });
        std::stable_sort(b.keywords.begin(), b.keywords.end(),
                         [](const auto& a, const auto& c) { return a.date < c.date; });
        bundles.push_back(std::move(b));
    }
    return bundles;
}

}  // namespace appwatch
