#pragma once

#include "appwatch/error.hpp"
#include "appwatch/market_model.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace appwatch {

// Line formats (one JSON object per line, UTF-8):
//   snapshot: app_id, app_name, developer_name, category, price,
//             release_date, update_date, rating_count, description
//             [, snapshot_date]
//   review:   app_id, user_id, date, stars, text
//   keyword:  app_id, date, keywords[]
//   ranking:  app_id, date, category, rank
// Unknown fields (e.g. a store-reported `status`) are ignored.

struct LineError {
    std::size_t line_no = 0;
    Errc code = Errc::MalformedLine;
    std::string reason;
};

/// Every non-blank line lands in exactly one of `items` or `errors`.
template <typename T>
struct ParseResult {
    std::vector<T> items;
    std::vector<LineError> errors;
    std::size_t lines = 0;
};

/// Strict: the first bad line throws (MalformedLine, DuplicateAppId,
/// DateMismatch, InvalidRecord) with the line number in the message.
Snapshot parse_snapshot_file(std::istream& in, Date expected_date);

ParseResult<Review> parse_reviews(std::istream& in);
ParseResult<KeywordObservation> parse_keywords(std::istream& in);
ParseResult<RankingObservation> parse_rankings(std::istream& in);

struct AuxiliaryData {
    ParseResult<Review> reviews;
    ParseResult<KeywordObservation> keywords;
    ParseResult<RankingObservation> rankings;
};

/// Null streams are treated as empty.
AuxiliaryData parse_auxiliary_streams(std::istream* reviews, std::istream* keywords,
                                      std::istream* rankings);

// Canonical single-line serialization (sorted keys, shortest round-trip doubles).
std::string to_line(const AppRecord& record);
std::string to_line(const Review& review);
std::string to_line(const KeywordObservation& obs);
std::string to_line(const RankingObservation& obs);

void write_snapshot(std::ostream& out, const Snapshot& snapshot);
void write_reviews(std::ostream& out, std::span<const Review> reviews);
void write_keywords(std::ostream& out, std::span<const KeywordObservation> obs);
void write_rankings(std::ostream& out, std::span<const RankingObservation> obs);

/// Directory store: `<root>/snapshots/<YYYY-MM-DD>.jsonl` plus `<root>/index.json`.
/// Single writer; a second concurrent writer for the same date fails with
/// ConcurrentWrite.
class SnapshotStore {
public:
    explicit SnapshotStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path path_for(Date date) const;

    /// Returns the file written. Overwrites an existing snapshot for the date.
    std::filesystem::path persist(const Snapshot& snapshot);
    Snapshot load(Date date) const;
    /// Ascending.
    std::vector<Date> dates() const;
    bool has(Date date) const;

private:
    void write_index(const std::vector<Date>& dates) const;

    std::filesystem::path root_;
};

}  // namespace appwatch
