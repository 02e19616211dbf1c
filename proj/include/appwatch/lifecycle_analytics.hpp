#pragma once

#include "appwatch/date.hpp"
#include "appwatch/diff_engine.hpp"
#include "appwatch/market_model.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace appwatch {

/// One non-negative count per consecutive day starting at `start`.
struct DailySeries {
    Date start;
    Eigen::ArrayXd values;

    Eigen::Index size() const { return values.size(); }
    Date date_at(Eigen::Index i) const { return start + static_cast<long>(i); }
    Date end() const { return date_at(values.size() - 1); }
};

/// Counts Removed events per day of `range`. Throws EmptyRange if last < first.
DailySeries daily_removal_series(std::span<const LifecycleEvent> events, DateRange range);

struct PeakReport {
    std::vector<Date> peak_dates;
    std::vector<long> interpeak_days;
    std::optional<double> median_interpeak;
};

/// Local maxima (a plateau counts once, at its first day; the series ends
/// count as lower neighbours) rising at least
/// `min_prominence` above the series median, then greedily thinned so kept
/// peaks are at least `min_separation` days apart, larger peaks first.
PeakReport detect_peaks(const DailySeries& series, double min_prominence, int min_separation);

/// Defaults: prominence = 2 x median absolute deviation, separation = 7 days.
PeakReport detect_peaks(const DailySeries& series);

struct CategoryBreakdown {
    std::vector<std::string> categories;  ///< columns, sorted; includes "unknown" if used
    std::vector<Date> days;               ///< rows: days with at least one removal
    Eigen::MatrixXd daily_fractions;      ///< days x categories
    Eigen::VectorXd overall;              ///< removal share per category over all days
    Eigen::VectorXd totals;               ///< removal counts per category
};

/// `category_of` maps app_id to the category of its last-seen record;
/// unresolved apps fall into the "unknown" bucket.
CategoryBreakdown category_breakdown(std::span<const LifecycleEvent> events,
                                     const std::map<std::string, Category>& category_of);

CategoryBreakdown category_breakdown(std::span<const LifecycleEvent> events,
                                     std::span<const Snapshot> snapshots);

struct PopularityFlag {
    bool ever_top_k = false;
    std::optional<int> best_rank;
    std::optional<int> last_rank_before;
};

/// Observations for other apps are ignored. `before` selects the latest
/// observation strictly earlier than that date.
PopularityFlag popularity_flag(const std::string& app_id,
                               std::span<const RankingObservation> rankings, int threshold_rank,
                               std::optional<Date> before = std::nullopt);

/// Right-continuous empirical CDF as sorted (value, cumulative fraction) steps.
class Ecdf {
public:
    /// Throws EmptyInput.
    explicit Ecdf(std::span<const double> samples);

    const std::vector<std::pair<double, double>>& steps() const { return steps_; }
    /// Fraction of samples <= v.
    double operator()(double v) const;

private:
    std::vector<std::pair<double, double>> steps_;
};

inline Ecdf ecdf(std::span<const double> samples) { return Ecdf(samples); }

struct DeveloperStats {
    std::string developer_name;
    std::size_t apps_total = 0;
    std::size_t apps_removed = 0;
    double removed_fraction = 0.0;
};

struct DeveloperReport {
    std::vector<DeveloperStats> stats;  ///< sorted by developer name
    double fraction_developers_all_removed = 0.0;
};

/// An app counts as removed if its timeline has any Removed event. Apps
/// without a timeline count toward the total only.
DeveloperReport developer_stats(const std::map<std::string, AppTimeline>& timelines,
                                const std::map<std::string, std::vector<std::string>>& apps_by_developer);

/// Groups timelines by their developer_name.
std::map<std::string, std::vector<std::string>> apps_by_developer(
    const std::map<std::string, AppTimeline>& timelines);

/// Points (i/D, share of removals held by the i developers with most
/// removals) for i = 0..D. Throws NoRemovals.
std::vector<std::pair<double, double>> concentration_curve(std::vector<DeveloperStats> stats);

/// Share of removals owned by the ceil(p*D) developers with most removals.
double concentration_at(const std::vector<std::pair<double, double>>& curve, double p);

}  // namespace appwatch
