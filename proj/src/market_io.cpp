#include "appwatch/market_io.hpp"

#include "appwatch/text.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace appwatch {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Thrown inside per-line parsers; converted to LineError or rethrown with position.
struct LineFailure {
    Errc code;
    std::string reason;
};

bool is_blank(const std::string& line)
{
    return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

const json& field(const json& obj, const char* name)
{
    auto it = obj.find(name);
    if (it == obj.end()) throw LineFailure{Errc::MalformedLine, std::string("missing field ") + name};
    return *it;
}

std::string get_string(const json& obj, const char* name)
{
    const json& v = field(obj, name);
    if (!v.is_string()) throw LineFailure{Errc::MalformedLine, std::string(name) + " must be a string"};
    return v.get<std::string>();
}

long long get_integer(const json& obj, const char* name)
{
    const json& v = field(obj, name);
    if (!v.is_number_integer()) {
        throw LineFailure{Errc::MalformedLine, std::string(name) + " must be an integer"};
    }
    return v.get<long long>();
}

double get_number(const json& obj, const char* name)
{
    const json& v = field(obj, name);
    if (!v.is_number()) throw LineFailure{Errc::MalformedLine, std::string(name) + " must be a number"};
    return v.get<double>();
}

Date get_date(const json& obj, const char* name)
{
    try {
        return Date::parse(get_string(obj, name));
    } catch (const Error& e) {
        throw LineFailure{Errc::MalformedLine, std::string(name) + ": " + e.what()};
    }
}

json parse_object(const std::string& line)
{
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw LineFailure{Errc::MalformedLine, "not a JSON object"};
    }
    return obj;
}

std::string get_id(const json& obj)
{
    std::string id = get_string(obj, "app_id");
    if (id.empty()) throw LineFailure{Errc::MalformedLine, "empty app_id"};
    return id;
}

AppRecord record_from_json(const json& obj)
{
    AppRecord r;
    r.app_id = get_id(obj);
    r.app_name = get_string(obj, "app_name");
    r.developer_name = get_string(obj, "developer_name");
    r.category = Category{get_string(obj, "category")};
    r.price = get_number(obj, "price");
    r.release_date = get_date(obj, "release_date");
    r.update_date = get_date(obj, "update_date");
    r.rating_count = get_integer(obj, "rating_count");
    r.description = get_string(obj, "description");
    try {
        validate(r);
    } catch (const Error& e) {
        throw LineFailure{Errc::InvalidRecord, e.what()};
    }
    return r;
}

Review review_from_json(const json& obj)
{
    Review r;
    r.app_id = get_id(obj);
    r.user_id = get_string(obj, "user_id");
    r.date = get_date(obj, "date");
    const long long stars = get_integer(obj, "stars");
    if (stars < 1 || stars > 5) {
        throw LineFailure{Errc::StarsOutOfRange, "stars=" + std::to_string(stars)};
    }
    r.stars = static_cast<int>(stars);
    r.text = get_string(obj, "text");
    return r;
}

KeywordObservation keywords_from_json(const json& obj)
{
    std::string id = get_id(obj);
    Date date = get_date(obj, "date");
    const json& list = field(obj, "keywords");
    if (!list.is_array()) throw LineFailure{Errc::MalformedLine, "keywords must be an array"};
    std::vector<std::string> raw;
    raw.reserve(list.size());
    for (const auto& k : list) {
        if (!k.is_string()) throw LineFailure{Errc::MalformedLine, "keywords must be strings"};
        if (text::normalize_keyword(k.get_ref<const std::string&>()).empty()) {
            throw LineFailure{Errc::MalformedLine, "empty keyword"};
        }
        raw.push_back(k.get<std::string>());
    }
    return KeywordObservation::make(std::move(id), date, std::move(raw));
}

RankingObservation ranking_from_json(const json& obj)
{
    RankingObservation r;
    r.app_id = get_id(obj);
    r.date = get_date(obj, "date");
    r.category = Category{get_string(obj, "category")};
    const long long rank = get_integer(obj, "rank");
    if (rank < 1) throw LineFailure{Errc::NonPositiveRank, "rank=" + std::to_string(rank)};
    r.rank = static_cast<int>(rank);
    return r;
}

template <typename T, typename Fn>
ParseResult<T> parse_lines(std::istream& in, Fn&& from_json)
{
    ParseResult<T> result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        ++result.lines;
        try {
            result.items.push_back(from_json(parse_object(line)));
        } catch (const LineFailure& f) {
            result.errors.push_back({line_no, f.code, f.reason});
        }
    }
    return result;
}

json to_json(const AppRecord& r)
{
    return json{{"app_id", r.app_id},
                {"app_name", r.app_name},
                {"developer_name", r.developer_name},
                {"category", r.category.name()},
                {"price", r.price},
                {"release_date", r.release_date.iso()},
                {"update_date", r.update_date.iso()},
                {"rating_count", r.rating_count},
                {"description", r.description}};
}

}  // namespace

Snapshot parse_snapshot_file(std::istream& in, Date expected_date)
{
    Snapshot snap{expected_date, {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        try {
            json obj = parse_object(line);
            if (auto it = obj.find("snapshot_date"); it != obj.end()) {
                Date stated = get_date(obj, "snapshot_date");
                if (stated != expected_date) {
                    throw LineFailure{Errc::DateMismatch,
                                      stated.iso() + " != expected " + expected_date.iso()};
                }
            }
            AppRecord r = record_from_json(obj);
            if (r.release_date > expected_date) {
                throw LineFailure{Errc::InvalidRecord,
                                  r.app_id + ": release_date after snapshot date"};
            }
            std::string id = r.app_id;
            if (!snap.records.emplace(id, std::move(r)).second) {
                throw Error(Errc::DuplicateAppId, id);
            }
        } catch (const LineFailure& f) {
            throw Error(f.code, "line " + std::to_string(line_no) + ": " + f.reason);
        }
    }
    return snap;
}

ParseResult<Review> parse_reviews(std::istream& in)
{
    return parse_lines<Review>(in, review_from_json);
}

ParseResult<KeywordObservation> parse_keywords(std::istream& in)
{
    return parse_lines<KeywordObservation>(in, keywords_from_json);
}

ParseResult<RankingObservation> parse_rankings(std::istream& in)
{
    return parse_lines<RankingObservation>(in, ranking_from_json);
}

AuxiliaryData parse_auxiliary_streams(std::istream* reviews, std::istream* keywords,
                                      std::istream* rankings)
{
    AuxiliaryData out;
    if (reviews) out.reviews = parse_reviews(*reviews);
    if (keywords) out.keywords = parse_keywords(*keywords);
    if (rankings) out.rankings = parse_rankings(*rankings);
    return out;
}

std::string to_line(const AppRecord& record)
{
    return to_json(record).dump();
}

std::string to_line(const Review& r)
{
    return json{{"app_id", r.app_id},
                {"user_id", r.user_id},
                {"date", r.date.iso()},
                {"stars", r.stars},
                {"text", r.text}}
        .dump();
}

std::string to_line(const KeywordObservation& obs)
{
    return json{{"app_id", obs.app_id}, {"date", obs.date.iso()}, {"keywords", obs.keywords}}.dump();
}

std::string to_line(const RankingObservation& r)
{
    return json{{"app_id", r.app_id},
                {"date", r.date.iso()},
                {"category", r.category.name()},
                {"rank", r.rank}}
        .dump();
}

void write_snapshot(std::ostream& out, const Snapshot& snapshot)
{
    for (const auto& [id, record] : snapshot.records) out << to_line(record) << '\n';
}

void write_reviews(std::ostream& out, std::span<const Review> reviews)
{
    for (const auto& r : reviews) out << to_line(r) << '\n';
}

void write_keywords(std::ostream& out, std::span<const KeywordObservation> obs)
{
    for (const auto& o : obs) out << to_line(o) << '\n';
}

void write_rankings(std::ostream& out, std::span<const RankingObservation> obs)
{
    for (const auto& o : obs) out << to_line(o) << '\n';
}

SnapshotStore::SnapshotStore(fs::path root) : root_(std::move(root)) {}

fs::path SnapshotStore::path_for(Date date) const
{
    return root_ / "snapshots" / (date.iso() + ".jsonl");
}

bool SnapshotStore::has(Date date) const
{
    return fs::exists(path_for(date));
}

fs::path SnapshotStore::persist(const Snapshot& snapshot)
{
    std::error_code ec;
    fs::create_directories(root_ / "snapshots", ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create " + (root_ / "snapshots").string());

    const fs::path target = path_for(snapshot.date);
    const fs::path lock = target.string() + ".lock";
    // "x" = exclusive create; a second writer for the same date fails here.
    std::FILE* lock_file = std::fopen(lock.c_str(), "wx");
    if (!lock_file) throw Error(Errc::ConcurrentWrite, snapshot.date.iso());
    std::fclose(lock_file);

    try {
        const fs::path tmp = target.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(Errc::IoFailure, "cannot write " + tmp.string());
            write_snapshot(out, snapshot);
            if (!out) throw Error(Errc::IoFailure, "write failed for " + tmp.string());
        }
        fs::rename(tmp, target);

        std::vector<Date> all = dates();
        write_index(all);
    } catch (...) {
        fs::remove(lock, ec);
        throw;
    }
    fs::remove(lock, ec);
    return target;
}

Snapshot SnapshotStore::load(Date date) const
{
    const fs::path p = path_for(date);
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(Errc::SnapshotNotFound, date.iso());
    return parse_snapshot_file(in, date);
}

std::vector<Date> SnapshotStore::dates() const
{
    std::set<Date> found;
    const fs::path dir = root_ / "snapshots";
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return {};
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
        try {
            found.insert(Date::parse(entry.path().stem().string()));
        } catch (const Error&) {
            // foreign file; not part of the store
        }
    }
    return {found.begin(), found.end()};
}

void SnapshotStore::write_index(const std::vector<Date>& dates) const
{
    json index{{"version", 1}, {"dates", json::array()}};
    for (Date d : dates) index["dates"].push_back(d.iso());
    const fs::path p = root_ / "index.json";
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot write " + p.string());
    out << index.dump(2) << '\n';
}

}  // namespace appwatch
