#include "appwatch/review_signals.hpp"

#include "appwatch/error.hpp"
#include "appwatch/stats.hpp"
#include "appwatch/text.hpp"

#include <algorithm>
#include <unordered_set>

namespace appwatch {

void AbnormalParams::validate() const
{
    if (min_words < 1) throw Error(Errc::InvalidArgument, "min_words must be >= 1");
    if (min_occurrences < 2) throw Error(Errc::InvalidArgument, "min_occurrences must be >= 2");
}

DuplicateStats duplicate_stats(std::span<const Review> reviews)
{
    if (reviews.empty()) return {};
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& r : reviews) ++counts[text::normalize_review(r.text)];
    std::size_t duplicated = 0;
    for (const auto& [t, c] : counts) {
        if (c >= 2) duplicated += c;
    }
    return {duplicated, static_cast<double>(duplicated) / static_cast<double>(reviews.size())};
}

StarDistribution star_distribution(std::span<const Review> reviews)
{
    StarDistribution d;
    if (reviews.empty()) return d;
    for (const auto& r : reviews) {
        if (r.stars < 1 || r.stars > 5) throw Error(Errc::StarsOutOfRange, std::to_string(r.stars));
        d.fractions[static_cast<std::size_t>(r.stars - 1)] += 1.0;
    }
    for (double& f : d.fractions) f /= static_cast<double>(reviews.size());
    d.five_star_fraction = d.fractions[4];
    return d;
}

void AbnormalReviewTable::add(std::span<const Review> reviews)
{
    for (const auto& r : reviews) add(r);
}

void AbnormalReviewTable::add(const Review& review)
{
    ++counts_[text::normalize_review(review.text)];
}

std::size_t AbnormalReviewTable::occurrences(const std::string& normalized_text) const
{
    auto it = counts_.find(normalized_text);
    return it == counts_.end() ? 0 : it->second;
}

bool AbnormalReviewTable::is_abnormal(const Review& review, const AbnormalParams& params) const
{
    const std::string t = text::normalize_review(review.text);
    return text::word_count(t) > static_cast<std::size_t>(params.min_words) &&
           occurrences(t) >= static_cast<std::size_t>(params.min_occurrences);
}

std::size_t AbnormalReviewTable::abnormal_user_count(std::span<const Review> reviews,
                                                     const AbnormalParams& params) const
{
    std::unordered_set<std::string> users;
    for (const auto& r : reviews) {
        if (is_abnormal(r, params)) users.insert(r.user_id);
    }
    return users.size();
}

AbnormalUsers abnormal_users(std::span<const Review> all_reviews, const AbnormalParams& params)
{
    params.validate();
    const AbnormalReviewTable table(all_reviews);

    AbnormalUsers out;
    std::map<std::string, std::set<std::string>> per_app;
    for (std::size_t i = 0; i < all_reviews.size(); ++i) {
        const Review& r = all_reviews[i];
        if (!table.is_abnormal(r, params)) continue;
        out.abnormal_review_ids.insert(i);
        out.abnormal_users.insert(r.user_id);
    }
    // Per-app count: distinct abnormal users among each app's reviewers.
    for (const auto& r : all_reviews) {
        auto& users = per_app[r.app_id];
        if (out.abnormal_users.contains(r.user_id)) users.insert(r.user_id);
    }
    for (const auto& [app, users] : per_app) out.per_app_abnormal_user_count[app] = users.size();
    return out;
}

DailyReviewStats daily_review_stats(std::span<const Review> reviews, Window window)
{
    if (window.days < 1) throw Error(Errc::EmptyWindow, "review window of " + std::to_string(window.days) + " days");
    DailyReviewStats out;
    out.daily_counts = DailySeries{window.first(), Eigen::ArrayXd::Zero(window.days)};
    for (const auto& r : reviews) {
        if (window.contains(r.date)) out.daily_counts.values(r.date - window.first()) += 1.0;
    }
    out.mean = stats::mean(out.daily_counts.values);
    out.stddev = stats::population_stddev(out.daily_counts.values);
    return out;
}

std::span<const Review> reviews_in(std::span<const Review> sorted_by_date, Window window)
{
    auto lo = std::lower_bound(sorted_by_date.begin(), sorted_by_date.end(), window.first(),
                               [](const Review& r, Date d) { return r.date < d; });
    auto hi = std::upper_bound(lo, sorted_by_date.end(), window.end,
                               [](Date d, const Review& r) { return d < r.date; });
    return {lo, hi};
}

ReviewSignalBundle review_signals(const std::string& app_id, std::span<const Review> reviews,
                                  Window window, const AbnormalReviewTable& table)
{
    std::vector<Review> in_window;
    for (const auto& r : reviews) {
        if (window.contains(r.date)) in_window.push_back(r);
    }
    ReviewSignalBundle b;
    b.app_id = app_id;
    b.window = window;
    b.duplicates = duplicate_stats(in_window);
    b.stars = star_distribution(in_window);
    b.abnormal_users_loose = table.abnormal_user_count(in_window, kAbnormalLoose);
    b.abnormal_users_strict = table.abnormal_user_count(in_window, kAbnormalStrict);
    b.daily = daily_review_stats(in_window, window);
    return b;
}

}  // namespace appwatch
