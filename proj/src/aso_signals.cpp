#include "appwatch/aso_signals.hpp"

#include "appwatch/error.hpp"
#include "appwatch/stats.hpp"
#include "appwatch/text.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace appwatch {

namespace {

using DayGroups = std::map<Date, std::vector<const KeywordObservation*>>;

DayGroups group_by_day(std::span<const KeywordObservation> observations, Date until)
{
    DayGroups groups;
    for (const auto& o : observations) {
        if (o.date <= until) groups[o.date].push_back(&o);
    }
    return groups;
}

std::size_t union_size(const std::vector<const KeywordObservation*>& group)
{
    if (group.size() == 1) return group.front()->size();
    std::set<std::string_view> all;
    for (const auto* o : group) all.insert(o->keywords.begin(), o->keywords.end());
    return all.size();
}

/// First group whose day is effective somewhere in the window.
DayGroups::const_iterator first_effective(const DayGroups& groups, Window window)
{
    auto it = groups.upper_bound(window.first());
    if (it != groups.begin()) --it;
    return it;
}

}  // namespace

DailySeries keyword_daily_series(std::span<const KeywordObservation> observations, Window window)
{
    if (window.days < 1) throw Error(Errc::EmptyWindow, "keyword window of " + std::to_string(window.days) + " days");
    DailySeries series{window.first(), Eigen::ArrayXd::Zero(window.days)};
    const DayGroups groups = group_by_day(observations, window.end);

    auto it = groups.begin();
    double current = 0.0;
    for (int i = 0; i < window.days; ++i) {
        const Date day = window.first() + i;
        while (it != groups.end() && it->first <= day) {
            current = static_cast<double>(union_size(it->second));
            ++it;
        }
        series.values(i) = current;
    }
    return series;
}

bool weekly_surge(const DailySeries& series, int window_days, double threshold)
{
    const Eigen::Index n = series.size();
    if (n == 0 || window_days < 1) return false;
    const double last = series.values(n - 1);
    const Eigen::Index from = std::max<Eigen::Index>(0, n - window_days);
    const double lowest = series.values.segment(from, n - from).minCoeff();
    return last - lowest >= threshold;
}

CoverageResult description_coverage(std::string_view description,
                                    std::span<const KeywordObservation> observations,
                                    Window window, double min_avg_keywords)
{
    CoverageResult out;
    const DayGroups groups = group_by_day(observations, window.end);
    std::set<std::string_view> universe;
    if (!groups.empty()) {
        for (auto it = first_effective(groups, window); it != groups.end(); ++it) {
            for (const auto* o : it->second) universe.insert(o->keywords.begin(), o->keywords.end());
        }
    }

    const std::string desc = text::normalize_keyword(description);
    for (std::string_view k : universe) {
        if (!k.empty() && desc.find(k) != std::string::npos) ++out.coverage_count;
    }
    out.distinct_keywords = universe.size();
    out.coverage_fraction = universe.empty() ? 0.0
                                             : static_cast<double>(out.coverage_count) /
                                                   static_cast<double>(universe.size());
    out.average_keyword_count =
        window.days >= 1 ? stats::mean(keyword_daily_series(observations, window).values) : 0.0;
    out.eligible = out.average_keyword_count >= min_avg_keywords;
    return out;
}

double series_stddev(const DailySeries& series)
{
    if (series.size() == 0) throw Error(Errc::EmptyInput, "stddev of an empty series");
    return stats::population_stddev(series.values);
}

AsoSignalBundle aso_signals(const std::string& app_id, std::string_view description,
                            std::span<const KeywordObservation> observations, Window window,
                            double surge_threshold, double min_avg_keywords)
{
    AsoSignalBundle b;
    b.app_id = app_id;
    b.window = window;
    b.daily_keyword_counts = keyword_daily_series(observations, window);
    b.keyword_stddev = series_stddev(b.daily_keyword_counts);
    b.weekly_surge = weekly_surge(b.daily_keyword_counts, kSurgeWindowDays, surge_threshold);
    b.coverage = description_coverage(description, observations, window, min_avg_keywords);
    return b;
}

}  // namespace appwatch
