#include "appwatch/lifecycle_analytics.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace appwatch;
using testing_support::day;
using testing_support::error_code_of;

namespace {

DailySeries series_of(std::vector<double> v)
{
    DailySeries s{day(0), Eigen::ArrayXd(static_cast<Eigen::Index>(v.size()))};
    for (std::size_t i = 0; i < v.size(); ++i) s.values(static_cast<Eigen::Index>(i)) = v[i];
    return s;
}

LifecycleEvent removed(const std::string& id, Date d)
{
    return {id, d, EventKind::Removed};
}

AppTimeline timeline(const std::string& id, const std::string& dev, bool was_removed)
{
    AppTimeline t;
    t.app_id = id;
    t.developer_name = dev;
    t.events.push_back({id, day(0), EventKind::Appeared});
    if (was_removed) t.events.push_back(removed(id, day(3)));
    return t;
}

}  // namespace

TEST(DailySeries, CountsRemovalsOnly)
{
    std::vector<LifecycleEvent> none = {{"a", day(1), EventKind::Appeared}};
    auto zero = daily_removal_series(none, {day(0), day(4)});
    EXPECT_EQ(zero.size(), 5);
    EXPECT_EQ(zero.values.sum(), 0.0);

    std::vector<LifecycleEvent> three = {removed("a", day(2)), removed("b", day(2)), removed("c", day(2))};
    auto s = daily_removal_series(three, {day(0), day(4)});
    EXPECT_EQ(s.values(2), 3.0);
    EXPECT_EQ(s.values.sum(), 3.0);
    EXPECT_EQ(s.end(), day(4));

    EXPECT_EQ(error_code_of([&] { daily_removal_series(three, {day(4), day(0)}); }), Errc::EmptyRange);
}

TEST(DailySeries, MatchesGroupingOracle)
{
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<LifecycleEvent> events;
        std::map<long, int> expected;
        const int n = static_cast<int>(rng() % 200);
        for (int i = 0; i < n; ++i) {
            const int d = static_cast<int>(rng() % 40);
            const auto kind = static_cast<EventKind>(rng() % 3);
            events.push_back({"a" + std::to_string(i), day(d), kind});
            if (kind == EventKind::Removed) ++expected[d];
        }
        auto s = daily_removal_series(events, {day(0), day(39)});
        for (int d = 0; d < 40; ++d) EXPECT_EQ(s.values(d), expected[d]);
    }
}

TEST(Peaks, ConstantSeriesHasNone)
{
    EXPECT_TRUE(detect_peaks(series_of({4, 4, 4, 4, 4})).peak_dates.empty());
    EXPECT_TRUE(detect_peaks(series_of({4, 4, 4, 4, 4}), 0.0, 1).peak_dates.empty());
    EXPECT_TRUE(detect_peaks(series_of({7})).peak_dates.empty());
}

TEST(Peaks, MonthlyImpulses)
{
    std::vector<double> v(70, 0.0);
    v[0] = v[30] = v[60] = 100;
    auto r = detect_peaks(series_of(v), 10, 7);
    EXPECT_EQ(r.peak_dates, (std::vector<Date>{day(0), day(30), day(60)}));
    EXPECT_EQ(r.interpeak_days, (std::vector<long>{30, 30}));
    EXPECT_EQ(r.median_interpeak, 30.0);
}

TEST(Peaks, SeparationKeepsLarger)
{
    auto r = detect_peaks(series_of({0, 5, 0, 9, 0, 0, 0, 0, 0, 0, 0, 0, 6, 0}), 1, 4);
    EXPECT_EQ(r.peak_dates, (std::vector<Date>{day(3), day(12)}));
    EXPECT_EQ(r.median_interpeak, 9.0);
}

TEST(Peaks, PlateauCountsOnce)
{
    auto r = detect_peaks(series_of({0, 3, 3, 3, 0, 0}), 1, 1);
    EXPECT_EQ(r.peak_dates, (std::vector<Date>{day(1)}));
    EXPECT_FALSE(r.median_interpeak);
}

TEST(Peaks, ProminenceRelativeToMedian)
{
    auto r = detect_peaks(series_of({10, 10, 14, 10, 10, 30, 10}), 5, 1);
    EXPECT_EQ(r.peak_dates, (std::vector<Date>{day(5)}));
    EXPECT_EQ(error_code_of([] { detect_peaks(series_of({1, 2}), 1, 0); }), Errc::InvalidArgument);
}

TEST(Peaks, ShiftInvariant)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> noise(0, 4);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> v(90);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::floor(noise(rng)) + (i % 30 == 12 ? 40 : 0);
        auto base = detect_peaks(series_of(v));
        for (auto& x : v) x += 17;
        auto shifted = detect_peaks(series_of(v));
        EXPECT_EQ(base.peak_dates, shifted.peak_dates);
    }
}

TEST(Categories, SingleCategoryAndSplit)
{
    std::vector<LifecycleEvent> ev = {removed("a", day(1)), removed("b", day(1)), removed("c", day(1)),
                                      removed("d", day(1))};
    std::map<std::string, Category> cats = {{"a", Category{"Games"}}, {"b", Category{"Games"}},
                                            {"c", Category{"Business"}}, {"d", Category{"Business"}}};
    auto split = category_breakdown(ev, cats);
    ASSERT_EQ(split.categories, (std::vector<std::string>{"Business", "Games"}));
    EXPECT_DOUBLE_EQ(split.daily_fractions(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(split.daily_fractions(0, 1), 0.5);

    for (auto& [id, c] : cats) c = Category{"Games"};
    auto single = category_breakdown(ev, cats);
    ASSERT_EQ(single.categories.size(), 1u);
    EXPECT_DOUBLE_EQ(single.overall(0), 1.0);
}

TEST(Categories, UnknownBucketAndSnapshotsOverload)
{
    std::vector<LifecycleEvent> ev = {removed("a", day(1)), removed("ghost", day(1))};
    Snapshot s{day(0), {{"a", testing_support::record("a")}}};
    std::vector<Snapshot> snaps = {s};
    auto b = category_breakdown(ev, snaps);
    EXPECT_EQ(b.categories, (std::vector<std::string>{"Games", "unknown"}));
    EXPECT_EQ(b.totals.sum(), 2.0);
}

TEST(Categories, MatchesCountingOracle)
{
    std::mt19937_64 rng(21);
    const std::vector<std::string> names = {"Games", "Business", "Lifestyle", "Utilities"};
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<LifecycleEvent> ev;
        std::map<std::string, Category> cats;
        std::map<std::pair<long, std::string>, double> count;
        std::map<long, double> per_day;
        std::map<std::string, double> total;
        for (int i = 0; i < 150; ++i) {
            const std::string id = "a" + std::to_string(i);
            const std::string& c = names[rng() % names.size()];
            const int d = static_cast<int>(rng() % 10);
            cats[id] = Category{c};
            ev.push_back(removed(id, day(d)));
            count[{d, c}] += 1;
            per_day[d] += 1;
            total[c] += 1;
        }
        auto b = category_breakdown(ev, cats);
        for (std::size_t r = 0; r < b.days.size(); ++r) {
            const long d = b.days[r] - day(0);
            EXPECT_NEAR(b.daily_fractions.row(static_cast<Eigen::Index>(r)).sum(), 1.0, 1e-9);
            for (std::size_t c = 0; c < b.categories.size(); ++c) {
                EXPECT_NEAR(b.daily_fractions(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)),
                            count[std::make_pair(d, b.categories[c])] / per_day[d], 1e-12);
            }
        }
        for (std::size_t c = 0; c < b.categories.size(); ++c) {
            EXPECT_NEAR(b.overall(static_cast<Eigen::Index>(c)), total[b.categories[c]] / 150.0, 1e-12);
        }
    }
}

TEST(Popularity, Threshold)
{
    std::vector<RankingObservation> r = {{"a", day(0), Category{"Games"}, 1700},
                                         {"a", day(2), Category{"Games"}, 1500},
                                         {"b", day(1), Category{"Games"}, 1}};
    auto f = popularity_flag("a", r, 1500);
    EXPECT_TRUE(f.ever_top_k);
    EXPECT_EQ(f.best_rank, 1500);
    EXPECT_FALSE(popularity_flag("a", std::vector<RankingObservation>{{"a", day(0), Category{}, 1501}}, 1500)
                     .ever_top_k);
    auto none = popularity_flag("zzz", r, 1500);
    EXPECT_FALSE(none.ever_top_k);
    EXPECT_FALSE(none.best_rank);
    EXPECT_EQ(popularity_flag("a", r, 10, day(2)).last_rank_before, 1700);
    EXPECT_FALSE(popularity_flag("a", r, 10, day(0)).last_rank_before);
}

TEST(Ecdf, Basics)
{
    std::vector<double> one = {5};
    Ecdf e(one);
    ASSERT_EQ(e.steps().size(), 1u);
    EXPECT_EQ(e.steps()[0], std::make_pair(5.0, 1.0));
    std::vector<double> s = {1, 2, 2, 4};
    EXPECT_DOUBLE_EQ(ecdf(s)(2), 0.75);
    EXPECT_DOUBLE_EQ(ecdf(s)(0.5), 0.0);
    EXPECT_DOUBLE_EQ(ecdf(s)(100), 1.0);
    std::vector<double> empty;
    EXPECT_EQ(error_code_of([&] { Ecdf x(empty); }), Errc::EmptyInput);
}

TEST(Ecdf, MatchesCountBelow)
{
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> u(0, 300);
    std::vector<double> s(1000);
    for (auto& x : s) x = u(rng);
    Ecdf e(s);
    double prev = 0.0;
    for (const auto& [v, f] : e.steps()) {
        EXPECT_GE(f, prev);
        prev = f;
    }
    EXPECT_EQ(e.steps().back().second, 1.0);
    for (int probe = 0; probe < 50; ++probe) {
        const double v = u(rng) + (probe % 2 ? 0.5 : 0.0);
        const auto below = std::count_if(s.begin(), s.end(), [&](double x) { return x <= v; });
        EXPECT_DOUBLE_EQ(e(v), static_cast<double>(below) / 1000.0);
    }
}

TEST(Developers, Fractions)
{
    std::map<std::string, AppTimeline> t;
    t["a"] = timeline("a", "solo", true);
    for (int i = 0; i < 4; ++i) {
        const std::string id = "m" + std::to_string(i);
        t[id] = timeline(id, "multi", i < 3);
    }
    t["k"] = timeline("k", "keeper", false);
    auto report = developer_stats(t, apps_by_developer(t));
    ASSERT_EQ(report.stats.size(), 3u);
    EXPECT_EQ(report.stats[0].developer_name, "keeper");
    EXPECT_DOUBLE_EQ(report.stats[0].removed_fraction, 0.0);
    EXPECT_DOUBLE_EQ(report.stats[1].removed_fraction, 0.75);
    EXPECT_DOUBLE_EQ(report.stats[2].removed_fraction, 1.0);
    EXPECT_DOUBLE_EQ(report.fraction_developers_all_removed, 1.0 / 3.0);
}

TEST(Concentration, UniformIsDiagonal)
{
    std::vector<DeveloperStats> s;
    for (int i = 0; i < 8; ++i) s.push_back({"d" + std::to_string(i), 2, 2, 1.0});
    auto c = concentration_curve(s);
    ASSERT_EQ(c.size(), 9u);
    EXPECT_EQ(c.front(), std::make_pair(0.0, 0.0));
    EXPECT_EQ(c.back(), std::make_pair(1.0, 1.0));
    for (double p : {0.1, 0.25, 0.5, 0.9}) EXPECT_NEAR(concentration_at(c, p), std::ceil(p * 8) / 8, 1e-12);
}

TEST(Concentration, OneOwnerAndErrors)
{
    std::vector<DeveloperStats> s = {{"a", 1, 0, 0}, {"b", 9, 9, 1}, {"c", 1, 0, 0}};
    auto c = concentration_curve(s);
    EXPECT_DOUBLE_EQ(c[1].second, 1.0);
    std::vector<DeveloperStats> none = {{"a", 1, 0, 0}};
    EXPECT_EQ(error_code_of([&] { concentration_curve(none); }), Errc::NoRemovals);
}

TEST(Concentration, MatchesPrefixSumOracle)
{
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 30; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 40);
        std::vector<DeveloperStats> s;
        std::vector<double> counts;
        for (int i = 0; i < d; ++i) {
            const auto removed_n = static_cast<std::size_t>(rng() % 10);
            s.push_back({"d" + std::to_string(i), removed_n + 1, removed_n, 0});
            counts.push_back(static_cast<double>(removed_n));
        }
        if (std::accumulate(counts.begin(), counts.end(), 0.0) == 0) continue;
        auto c = concentration_curve(s);
        std::sort(counts.rbegin(), counts.rend());
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        double prefix = 0;
        for (int i = 0; i <= d; ++i) {
            if (i > 0) prefix += counts[static_cast<std::size_t>(i - 1)];
            EXPECT_NEAR(c[static_cast<std::size_t>(i)].second, prefix / total, 1e-12);
            if (i > 0) {
                EXPECT_GE(c[static_cast<std::size_t>(i)].second, c[static_cast<std::size_t>(i - 1)].second);
            }
        }
        // No other subset of the same size holds more removals: top-i sum is maximal.
        for (int trial = 0; trial < 10; ++trial) {
            auto shuffled = counts;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            const int i = static_cast<int>(rng() % static_cast<unsigned>(d)) + 1;
            const double other = std::accumulate(shuffled.begin(), shuffled.begin() + i, 0.0) / total;
            EXPECT_LE(other, c[static_cast<std::size_t>(i)].second + 1e-12);
        }
    }
}
