#include "appwatch/lifecycle_analytics.hpp"

#include "appwatch/error.hpp"
#include "appwatch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace appwatch {

DailySeries daily_removal_series(std::span<const LifecycleEvent> events, DateRange range)
{
    if (range.last < range.first) throw Error(Errc::EmptyRange, range.first.iso() + ".." + range.last.iso());
    DailySeries s{range.first, Eigen::ArrayXd::Zero(range.size())};
    for (const auto& e : events) {
        if (e.kind == EventKind::Removed && range.contains(e.date)) s.values(e.date - range.first) += 1.0;
    }
    return s;
}

PeakReport detect_peaks(const DailySeries& series, double min_prominence, int min_separation)
{
    if (min_separation < 1) throw Error(Errc::InvalidArgument, "min_separation must be >= 1");
    PeakReport report;
    const Eigen::Index n = series.size();
    if (n == 0) return report;
    const double baseline = stats::median(series.values);

    struct Candidate {
        Eigen::Index index;
        double value;
    };
    std::vector<Candidate> candidates;
    // A plateau is one candidate at its first day. Missing neighbours at the
    // series ends count as lower, but a plateau needs at least one real neighbour.
    for (Eigen::Index i = 0; i < n;) {
        const double v = series.values(i);
        Eigen::Index j = i;
        while (j + 1 < n && series.values(j + 1) == v) ++j;
        const bool has_neighbour = i > 0 || j < n - 1;
        const bool left_lower = i == 0 || series.values(i - 1) < v;
        const bool right_lower = j == n - 1 || series.values(j + 1) < v;
        if (has_neighbour && left_lower && right_lower && v - baseline >= min_prominence) {
            candidates.push_back({i, v});
        }
        i = j + 1;
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
    std::vector<Eigen::Index> kept;
    for (const auto& c : candidates) {
        const bool clear = std::all_of(kept.begin(), kept.end(), [&](Eigen::Index k) {
            return std::abs(k - c.index) >= min_separation;
        });
        if (clear) kept.push_back(c.index);
    }
    std::sort(kept.begin(), kept.end());

    for (std::size_t i = 0; i < kept.size(); ++i) {
        report.peak_dates.push_back(series.date_at(kept[i]));
        if (i > 0) report.interpeak_days.push_back(static_cast<long>(kept[i] - kept[i - 1]));
    }
    if (!report.interpeak_days.empty()) {
        std::vector<double> gaps(report.interpeak_days.begin(), report.interpeak_days.end());
        report.median_interpeak = stats::median(std::move(gaps));
    }
    return report;
}

PeakReport detect_peaks(const DailySeries& series)
{
    const double mad = series.size() == 0 ? 0.0 : stats::median_absolute_deviation(series.values);
    return detect_peaks(series, 2.0 * mad, 7);
}

CategoryBreakdown category_breakdown(std::span<const LifecycleEvent> events,
                                     const std::map<std::string, Category>& category_of)
{
    std::map<Date, std::map<std::string, double>> per_day;
    std::map<std::string, double> totals;
    for (const auto& e : events) {
        if (e.kind != EventKind::Removed) continue;
        auto it = category_of.find(e.app_id);
        const std::string& cat = (it == category_of.end() || it->second.name().empty())
                                     ? Category::unknown().name()
                                     : it->second.name();
        per_day[e.date][cat] += 1.0;
        totals[cat] += 1.0;
    }

    CategoryBreakdown out;
    for (const auto& [cat, count] : totals) out.categories.push_back(cat);
    const auto cols = static_cast<Eigen::Index>(out.categories.size());
    out.daily_fractions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(per_day.size()), cols);
    out.totals = Eigen::VectorXd::Zero(cols);
    out.overall = Eigen::VectorXd::Zero(cols);

    Eigen::Index row = 0;
    for (const auto& [day, counts] : per_day) {
        out.days.push_back(day);
        double day_total = 0.0;
        for (const auto& [cat, count] : counts) day_total += count;
        for (const auto& [cat, count] : counts) {
            const auto col = std::lower_bound(out.categories.begin(), out.categories.end(), cat) -
                             out.categories.begin();
            out.daily_fractions(row, col) = count / day_total;
        }
        ++row;
    }
    for (Eigen::Index c = 0; c < cols; ++c) out.totals(c) = totals[out.categories[c]];
    if (out.totals.sum() > 0) out.overall = out.totals / out.totals.sum();
    return out;
}

CategoryBreakdown category_breakdown(std::span<const LifecycleEvent> events,
                                     std::span<const Snapshot> snapshots)
{
    std::map<std::string, Category> last_seen;
    for (const auto& s : snapshots) {
        for (const auto& [id, rec] : s.records) last_seen[id] = rec.category;
    }
    return category_breakdown(events, last_seen);
}

PopularityFlag popularity_flag(const std::string& app_id,
                               std::span<const RankingObservation> rankings, int threshold_rank,
                               std::optional<Date> before)
{
    PopularityFlag flag;
    std::optional<Date> latest;
    for (const auto& r : rankings) {
        if (r.app_id != app_id) continue;
        if (!flag.best_rank || r.rank < *flag.best_rank) flag.best_rank = r.rank;
        if (before && r.date < *before && (!latest || r.date >= *latest)) {
            latest = r.date;
            flag.last_rank_before = r.rank;
        }
    }
    flag.ever_top_k = flag.best_rank && *flag.best_rank <= threshold_rank;
    return flag;
}

Ecdf::Ecdf(std::span<const double> samples)
{
    if (samples.empty()) throw Error(Errc::EmptyInput, "ecdf of no samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        steps_.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
    steps_.back().second = 1.0;
}

double Ecdf::operator()(double v) const
{
    auto it = std::upper_bound(steps_.begin(), steps_.end(), v,
                               [](double x, const auto& step) { return x < step.first; });
    return it == steps_.begin() ? 0.0 : std::prev(it)->second;
}

DeveloperReport developer_stats(const std::map<std::string, AppTimeline>& timelines,
                                const std::map<std::string, std::vector<std::string>>& by_developer)
{
    DeveloperReport report;
    std::size_t all_removed = 0;
    for (const auto& [developer, apps] : by_developer) {
        DeveloperStats s{developer, apps.size(), 0, 0.0};
        for (const auto& id : apps) {
            auto it = timelines.find(id);
            if (it != timelines.end() && it->second.ever_removed()) ++s.apps_removed;
        }
        s.removed_fraction = s.apps_total == 0 ? 0.0
                                               : static_cast<double>(s.apps_removed) /
                                                     static_cast<double>(s.apps_total);
        if (s.apps_total > 0 && s.apps_removed == s.apps_total) ++all_removed;
        report.stats.push_back(std::move(s));
    }
    if (!report.stats.empty()) {
        report.fraction_developers_all_removed =
            static_cast<double>(all_removed) / static_cast<double>(report.stats.size());
    }
    return report;
}

std::map<std::string, std::vector<std::string>> apps_by_developer(
    const std::map<std::string, AppTimeline>& timelines)
{
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [id, t] : timelines) out[t.developer_name].push_back(id);
    return out;
}

std::vector<std::pair<double, double>> concentration_curve(std::vector<DeveloperStats> stats)
{
    std::stable_sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) {
        return a.apps_removed > b.apps_removed;
    });
    double total = 0.0;
    for (const auto& s : stats) total += static_cast<double>(s.apps_removed);
    if (total <= 0.0) throw Error(Errc::NoRemovals, "no developer has removed apps");

    const double d = static_cast<double>(stats.size());
    std::vector<std::pair<double, double>> curve{{0.0, 0.0}};
    double running = 0.0;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        running += static_cast<double>(stats[i].apps_removed);
        curve.emplace_back(static_cast<double>(i + 1) / d, running / total);
    }
    curve.back() = {1.0, 1.0};
    return curve;
}

double concentration_at(const std::vector<std::pair<double, double>>& curve, double p)
{
    const double d = static_cast<double>(curve.size() - 1);
    const double pos = std::ceil(std::clamp(p, 0.0, 1.0) * d - 1e-9);
    return curve[static_cast<std::size_t>(std::clamp(pos, 0.0, d))].second;
}

}  // namespace appwatch
