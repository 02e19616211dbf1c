#pragma once

#include "appwatch/date.hpp"
#include "appwatch/lifecycle_analytics.hpp"
#include "appwatch/market_model.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace appwatch {

inline constexpr int kSurgeWindowDays = 7;
inline constexpr double kSurgeThreshold = 1000.0;
inline constexpr double kMinAverageKeywords = 100.0;

/// Keyword-set size per window day. A day without an observation carries the
/// most recent earlier observation forward (0 before the first one).
/// Observations sharing a day are merged as a set union.
DailySeries keyword_daily_series(std::span<const KeywordObservation> observations, Window window);

/// True iff the last value rose by at least `threshold` over the start of some
/// trailing sub-window of at most `window_days` days.
bool weekly_surge(const DailySeries& series, int window_days = kSurgeWindowDays,
                  double threshold = kSurgeThreshold);

struct CoverageResult {
    std::size_t coverage_count = 0;
    double coverage_fraction = 0.0;
    std::size_t distinct_keywords = 0;
    double average_keyword_count = 0.0;
    bool eligible = false;
};

/// Keywords effective on any window day form the universe; a keyword is
/// covered when it occurs as a substring of the normalized description.
CoverageResult description_coverage(std::string_view description,
                                    std::span<const KeywordObservation> observations,
                                    Window window, double min_avg_keywords = kMinAverageKeywords);

/// Population standard deviation. Throws EmptyInput.
double series_stddev(const DailySeries& series);

struct AsoSignalBundle {
    std::string app_id;
    Window window;
    DailySeries daily_keyword_counts;
    double keyword_stddev = 0.0;
    bool weekly_surge = false;
    CoverageResult coverage;
};

AsoSignalBundle aso_signals(const std::string& app_id, std::string_view description,
                            std::span<const KeywordObservation> observations, Window window,
                            double surge_threshold = kSurgeThreshold,
                            double min_avg_keywords = kMinAverageKeywords);

}  // namespace appwatch
