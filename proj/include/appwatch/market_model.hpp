#pragma once

#include "appwatch/date.hpp"

#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace appwatch {

/// Market category. The 25 store categories are known; any other
/// non-empty name is accepted as-is.
class Category {
public:
    Category() = default;
    explicit Category(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    bool is_known() const;

    static std::span<const std::string_view> known();
    static const Category& unknown();

    friend auto operator<=>(const Category&, const Category&) = default;
    friend bool operator==(const Category&, const Category&) = default;

private:
    std::string name_;
};

struct AppRecord {
    std::string app_id;
    std::string app_name;
    std::string developer_name;
    Category category;
    double price = 0.0;
    Date release_date;
    Date update_date;
    long long rating_count = 0;
    std::string description;

    friend bool operator==(const AppRecord&, const AppRecord&) = default;
};

/// Throws Error(InvalidRecord) naming the first broken invariant.
void validate(const AppRecord& record);

/// The whole market as observed on one day.
struct Snapshot {
    Date date;
    std::map<std::string, AppRecord> records;

    bool contains(const std::string& app_id) const { return records.contains(app_id); }
    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct Review {
    std::string app_id;
    std::string user_id;
    Date date;
    int stars = 5;
    std::string text;

    friend bool operator==(const Review&, const Review&) = default;
};

/// `keywords` is sorted and duplicate-free; entries are normalized.
struct KeywordObservation {
    std::string app_id;
    Date date;
    std::vector<std::string> keywords;

    static KeywordObservation make(std::string app_id, Date date, std::vector<std::string> raw);
    std::size_t size() const { return keywords.size(); }
    friend bool operator==(const KeywordObservation&, const KeywordObservation&) = default;
};

struct RankingObservation {
    std::string app_id;
    Date date;
    Category category;
    int rank = 1;

    friend bool operator==(const RankingObservation&, const RankingObservation&) = default;
};

}  // namespace appwatch
