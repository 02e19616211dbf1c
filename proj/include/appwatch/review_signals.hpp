#pragma once

#include "appwatch/date.hpp"
#include "appwatch/lifecycle_analytics.hpp"
#include "appwatch/market_model.hpp"

#include <array>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>

namespace appwatch {

/// A review is abnormal when it has more than `min_words` words and its
/// normalized text occurs at least `min_occurrences` times dataset-wide.
struct AbnormalParams {
    int min_words = 5;
    int min_occurrences = 10;

    void validate() const;  ///< min_words >= 1, min_occurrences >= 2
};

inline constexpr AbnormalParams kAbnormalLoose{5, 10};
inline constexpr AbnormalParams kAbnormalStrict{10, 20};

struct DuplicateStats {
    std::size_t count = 0;
    double fraction = 0.0;
};

/// Every member of a group of >= 2 identical (normalized) texts counts.
DuplicateStats duplicate_stats(std::span<const Review> reviews);

struct StarDistribution {
    std::array<double, 5> fractions{};  ///< index 0 = one star
    double five_star_fraction = 0.0;
};

StarDistribution star_distribution(std::span<const Review> reviews);

/// Global text-frequency table; phase one of the abnormal-user computation.
class AbnormalReviewTable {
public:
    AbnormalReviewTable() = default;
    explicit AbnormalReviewTable(std::span<const Review> corpus) { add(corpus); }

    void add(std::span<const Review> reviews);
    void add(const Review& review);

    std::size_t occurrences(const std::string& normalized_text) const;
    bool is_abnormal(const Review& review, const AbnormalParams& params) const;

    /// Distinct abnormal authors among `reviews`.
    std::size_t abnormal_user_count(std::span<const Review> reviews,
                                    const AbnormalParams& params) const;

private:
    std::unordered_map<std::string, std::size_t> counts_;
};

struct AbnormalUsers {
    std::set<std::size_t> abnormal_review_ids;  ///< positions in the input sequence
    std::set<std::string> abnormal_users;
    std::map<std::string, std::size_t> per_app_abnormal_user_count;
};

AbnormalUsers abnormal_users(std::span<const Review> all_reviews, const AbnormalParams& params);

struct DailyReviewStats {
    DailySeries daily_counts;
    double mean = 0.0;
    double stddev = 0.0;  ///< population
};

/// Reviews outside the window are ignored. Throws EmptyWindow if days < 1.
DailyReviewStats daily_review_stats(std::span<const Review> reviews, Window window);

struct ReviewSignalBundle {
    std::string app_id;
    Window window;
    DuplicateStats duplicates;
    StarDistribution stars;
    std::size_t abnormal_users_loose = 0;   ///< M=5, N=10
    std::size_t abnormal_users_strict = 0;  ///< M=10, N=20
    DailyReviewStats daily;
};

/// `reviews` are one app's; only those inside the window are used.
ReviewSignalBundle review_signals(const std::string& app_id, std::span<const Review> reviews,
                                  Window window, const AbnormalReviewTable& table);

std::span<const Review> reviews_in(std::span<const Review> sorted_by_date, Window window);

}  // namespace appwatch
