// appwatch: command-line front end over the appwatch library.
#include "appwatch/aso_signals.hpp"
#include "appwatch/csv.hpp"
#include "appwatch/diff_engine.hpp"
#include "appwatch/feature_builder.hpp"
#include "appwatch/learners/model.hpp"
#include "appwatch/learners/validation.hpp"
#include "appwatch/lifecycle_analytics.hpp"
#include "appwatch/market_io.hpp"
#include "appwatch/review_signals.hpp"
#include "appwatch/synthgen.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace appwatch;

namespace {

constexpr const char* kAllModels = "lr,svm,knn,tree,rf,gbdt";

struct RunConfig {
    fs::path store;
    fs::path out = ".";
    fs::path labels;
    std::vector<fs::path> inputs;
    fs::path reviews_in, keywords_in, rankings_in;
    std::optional<Date> from, to, date;
    std::uint64_t seed = 42;
    std::string k_range;  // empty: command default
    json models = kAllModels;
    int folds = 10;
    FeatureConfig features;
    int popular_rank = 1500;
    double surge_threshold = kSurgeThreshold;
    double min_avg_keywords = kMinAverageKeywords;
    json market = json::object();
};

// Raw flag values; only the ones given on the command line override the config file.
struct Flags {
    std::string store, out, labels, from, to, date, config, k, models;
    std::vector<std::string> inputs;
    std::string reviews, keywords, rankings;
    std::uint64_t seed = 0;
    int folds = 0, m_words = 0, n_occurrences = 0, popular_rank = 0;
    double surge_threshold = 0, min_avg_keywords = 0;
};

Error config_error(const std::string& what)
{
    return Error(Errc::ConfigInvalid, what);
}

Date parse_date_arg(const std::string& s, const char* what)
{
    try {
        return Date::parse(s);
    } catch (const Error& e) {
        throw config_error(std::string(what) + ": " + e.what());
    }
}

void apply_config_file(RunConfig& rc, const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoFailure, "cannot read config " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw config_error(path.string() + " is not a JSON object");
    try {
        if (j.contains("store")) rc.store = j["store"].get<std::string>();
        if (j.contains("out")) rc.out = j["out"].get<std::string>();
        if (j.contains("labels")) rc.labels = j["labels"].get<std::string>();
        if (j.contains("from")) rc.from = parse_date_arg(j["from"].get<std::string>(), "from");
        if (j.contains("to")) rc.to = parse_date_arg(j["to"].get<std::string>(), "to");
        if (j.contains("seed")) rc.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("k")) rc.k_range = j["k"].is_string() ? j["k"].get<std::string>() : j["k"].dump();
        if (j.contains("models")) rc.models = j["models"];
        if (j.contains("folds")) rc.folds = j["folds"].get<int>();
        if (j.contains("features")) rc.features = FeatureConfig::from_json(j["features"]);
        if (j.contains("popular_rank")) rc.popular_rank = j["popular_rank"].get<int>();
        if (j.contains("surge_threshold")) rc.surge_threshold = j["surge_threshold"].get<double>();
        if (j.contains("min_avg_keywords")) rc.min_avg_keywords = j["min_avg_keywords"].get<double>();
        if (j.contains("market")) rc.market = j["market"];
    } catch (const json::exception& e) {
        throw config_error(path.string() + ": " + e.what());
    }
}

RunConfig resolve(const CLI::App& app, const Flags& f)
{
    RunConfig rc;
    if (!f.config.empty()) apply_config_file(rc, f.config);
    auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
    if (given("--store")) rc.store = f.store;
    if (given("--out")) rc.out = f.out;
    if (given("--labels")) rc.labels = f.labels;
    if (given("--from")) rc.from = parse_date_arg(f.from, "--from");
    if (given("--to")) rc.to = parse_date_arg(f.to, "--to");
    if (given("--date")) rc.date = parse_date_arg(f.date, "--date");
    if (given("--seed")) rc.seed = f.seed;
    if (given("--k")) rc.k_range = f.k;
    if (given("--models")) rc.models = f.models;
    if (given("--folds")) rc.folds = f.folds;
    if (given("--m-words")) rc.features.abnormal.min_words = f.m_words;
    if (given("--n-occurrences")) rc.features.abnormal.min_occurrences = f.n_occurrences;
    if (given("--popular-rank")) rc.popular_rank = f.popular_rank;
    if (given("--surge-threshold")) rc.surge_threshold = f.surge_threshold;
    if (given("--min-avg-keywords")) rc.min_avg_keywords = f.min_avg_keywords;
    for (const auto& p : f.inputs) rc.inputs.emplace_back(p);
    rc.reviews_in = f.reviews;
    rc.keywords_in = f.keywords;
    rc.rankings_in = f.rankings;

    try {
        rc.features.abnormal.validate();
    } catch (const Error& e) {
        throw config_error(e.what());
    }
    if (rc.folds < 2) throw config_error("folds must be >= 2");
    if (rc.popular_rank < 1) throw config_error("popular_rank must be >= 1");
    if (rc.from && rc.to && *rc.to < *rc.from) throw config_error("--to before --from");
    return rc;
}

// "0..6", "3" or "0,2,4".
std::vector<int> parse_k_range(const std::string& s)
{
    std::vector<int> ks;
    auto to_int = [&](const std::string& t) {
        std::size_t used = 0;
        int v = -1;
        try {
            v = std::stoi(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size() || v < 0) throw config_error("bad --k value '" + s + "'");
        return v;
    };
    if (auto dots = s.find(".."); dots != std::string::npos) {
        const int lo = to_int(s.substr(0, dots)), hi = to_int(s.substr(dots + 2));
        if (hi < lo) throw config_error("empty --k range '" + s + "'");
        for (int k = lo; k <= hi; ++k) ks.push_back(k);
        return ks;
    }
    std::string cleaned = s;
    std::erase_if(cleaned, [](char c) { return c == '[' || c == ']' || c == ' '; });
    std::stringstream in(cleaned);
    for (std::string part; std::getline(in, part, ',');) ks.push_back(to_int(part));
    if (ks.empty()) throw config_error("empty --k");
    return ks;
}

int single_k(const RunConfig& rc)
{
    if (rc.k_range.empty()) return 0;
    const auto ks = parse_k_range(rc.k_range);
    if (ks.size() != 1) throw config_error("this command takes a single --k value");
    return ks.front();
}

std::vector<learners::ModelSpec> model_specs(const RunConfig& rc)
{
    std::vector<learners::ModelSpec> specs;
    auto add = [&](const learners::ModelSpec& s) {
        for (const auto& have : specs) {
            if (have.name() == s.name()) throw config_error("model listed twice: " + s.name());
        }
        specs.push_back(s);
    };
    try {
        if (rc.models.is_string()) {
            std::stringstream in(rc.models.get<std::string>());
            for (std::string name; std::getline(in, name, ',');) {
                if (!name.empty()) add(learners::ModelSpec::defaults(name));
            }
        } else if (rc.models.is_array()) {
            for (const auto& m : rc.models) {
                add(m.is_string() ? learners::ModelSpec::defaults(m.get<std::string>())
                                  : learners::ModelSpec::from_json(m));
            }
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("models: ") + e.what());
    } catch (const Error& e) {
        throw config_error(e.what());
    }
    if (specs.empty()) throw config_error("no models selected");
    return specs;
}

// --- I/O helpers -----------------------------------------------------------

fs::path require_store(const RunConfig& rc)
{
    if (rc.store.empty()) throw config_error("--store is required");
    return rc.store;
}

std::ofstream open_out(const fs::path& path)
{
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
    return out;
}

void write_text(const fs::path& path, const std::string& text)
{
    auto out = open_out(path);
    out << text;
    if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

void warn_line_errors(const char* stream, const std::vector<LineError>& errors)
{
    if (errors.empty()) return;
    std::cerr << json{{"warning", "skipped malformed lines"}, {"stream", stream}, {"count", errors.size()},
                      {"first_line", errors.front().line_no}, {"first_reason", errors.front().reason}}
                     .dump()
              << '\n';
}

template <typename T, typename Parse>
std::vector<T> read_stream(const fs::path& path, const char* name, Parse parse)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    auto result = parse(in);
    warn_line_errors(name, result.errors);
    return std::move(result.items);
}

struct Market {
    std::vector<Date> dates;
    std::map<std::string, AppTimeline> timelines;
    std::map<std::string, AppRecord> latest;
    std::vector<LifecycleEvent> events;
    std::map<std::string, Category> category_of;
};

Market load_market(const RunConfig& rc)
{
    const SnapshotStore store(require_store(rc));
    TimelineBuilder builder;
    for (Date d : store.dates()) {
        if ((rc.from && d < *rc.from) || (rc.to && d > *rc.to)) continue;
        builder.add(store.load(d));
    }
    if (builder.dates().empty()) throw Error(Errc::EmptyInput, "no snapshots in " + store.root().string());
    Market m;
    m.dates = builder.dates();
    m.latest = builder.latest_records();
    m.events = builder.events();
    m.timelines = std::move(builder).finish();
    for (const auto& [id, r] : m.latest) m.category_of.emplace(id, r.category);
    return m;
}

std::vector<Review> load_reviews(const RunConfig& rc)
{
    return read_stream<Review>(rc.store / "reviews.jsonl", "reviews", parse_reviews);
}

std::vector<KeywordObservation> load_keywords(const RunConfig& rc)
{
    return read_stream<KeywordObservation>(rc.store / "keywords.jsonl", "keywords", parse_keywords);
}

std::vector<RankingObservation> load_rankings(const RunConfig& rc)
{
    return read_stream<RankingObservation>(rc.store / "rankings.jsonl", "rankings", parse_rankings);
}

// Labels come from --labels, else <store>/labels.csv, else "ever removed".
std::map<std::string, bool> load_labels(const RunConfig& rc, const Market& m)
{
    fs::path path = rc.labels;
    if (path.empty() && fs::exists(rc.store / "labels.csv")) path = rc.store / "labels.csv";
    std::map<std::string, bool> labels;
    if (path.empty()) {
        for (const auto& [id, t] : m.timelines) labels[id] = t.ever_removed();
        return labels;
    }
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoFailure, "cannot read labels " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (line_no == 1 && line.rfind("app_id", 0) == 0)) continue;
        const auto comma = line.rfind(',');
        const std::string value = comma == std::string::npos ? "" : line.substr(comma + 1);
        if (value != "0" && value != "1") {
            throw Error(Errc::MalformedLine, fmt::format("{} line {}: expected app_id,0|1", path.string(), line_no));
        }
        labels[line.substr(0, comma)] = value == "1";
    }
    return labels;
}

std::vector<AppBundle> load_bundles(const RunConfig& rc)
{
    const Market m = load_market(rc);
    const auto reviews = load_reviews(rc);
    const auto keywords = load_keywords(rc);
    return assemble_bundles(m.timelines, m.latest, load_labels(rc, m), reviews, keywords);
}

LabeledDataset load_dataset(const RunConfig& rc, int k)
{
    if (!rc.inputs.empty()) {
        std::ifstream in(rc.inputs.front(), std::ios::binary);
        if (!in) throw Error(Errc::IoFailure, "cannot read " + rc.inputs.front().string());
        return read_dataset_csv(in);
    }
    const auto bundles = load_bundles(rc);
    return build_dataset(bundles, rc.features, k).data;
}

std::string opt_number(const std::optional<long>& v)
{
    return v ? std::to_string(*v) : std::string();
}

std::string opt_date(const std::optional<Date>& d)
{
    return d ? d->iso() : std::string();
}

// --- commands --------------------------------------------------------------

int cmd_simulate(const RunConfig& rc, const CLI::App& app)
{
    const fs::path root = !rc.store.empty() ? rc.store : rc.out;
    synth::MarketConfig cfg = synth::MarketConfig::from_json(rc.market);
    if (app.get_option("--seed")->count() > 0 || !rc.market.contains("seed")) cfg.seed = rc.seed;
    cfg.validate();
    const auto market = synth::generate_market(cfg);
    // Stale snapshots from an earlier, longer run would otherwise survive.
    std::error_code ec;
    fs::remove_all(root / "snapshots", ec);
    synth::write_market(market, root);
    std::cout << json{{"store", root.string()},
                      {"snapshots", market.snapshots.size()},
                      {"reviews", market.reviews.size()},
                      {"keyword_observations", market.keywords.size()},
                      {"rankings", market.rankings.size()}}
                     .dump()
              << '\n';
    return 0;
}

int cmd_ingest(const RunConfig& rc)
{
    SnapshotStore store(require_store(rc));
    if (rc.inputs.empty() && rc.reviews_in.empty() && rc.keywords_in.empty() && rc.rankings_in.empty()) {
        throw config_error("ingest needs --input or an auxiliary stream");
    }
    if (rc.date && rc.inputs.size() > 1) throw config_error("--date applies to a single --input");
    json report{{"snapshots", json::array()}};
    for (const auto& input : rc.inputs) {
        const Date date = rc.date ? *rc.date : parse_date_arg(input.stem().string(), "snapshot file name");
        std::ifstream in(input, std::ios::binary);
        if (!in) throw Error(Errc::IoFailure, "cannot read " + input.string());
        Snapshot snap;
        try {
            snap = parse_snapshot_file(in, date);
        } catch (const Error& e) {
            throw Error(e.code(), input.string() + ": " + e.what());
        }
        store.persist(snap);
        report["snapshots"].push_back({{"date", date.iso()}, {"apps", snap.records.size()}});
    }
    // Auxiliary streams are tolerant: bad lines are reported, good ones stored canonically.
    auto ingest_stream = [&](const fs::path& src, const char* name, auto parse, auto write) {
        if (src.empty()) return;
        std::ifstream in(src, std::ios::binary);
        if (!in) throw Error(Errc::IoFailure, "cannot read " + src.string());
        const auto result = parse(in);
        auto out = open_out(store.root() / (std::string(name) + ".jsonl"));
        write(out, result.items);
        json errors = json::array();
        for (const auto& e : result.errors) {
            errors.push_back({{"line", e.line_no}, {"code", to_string(e.code)}, {"reason", e.reason}});
        }
        report[name] = {{"lines", result.lines}, {"accepted", result.items.size()}, {"errors", errors}};
    };
    ingest_stream(rc.reviews_in, "reviews", parse_reviews,
                  [](std::ostream& o, const std::vector<Review>& v) { write_reviews(o, v); });
    ingest_stream(rc.keywords_in, "keywords", parse_keywords,
                  [](std::ostream& o, const std::vector<KeywordObservation>& v) { write_keywords(o, v); });
    ingest_stream(rc.rankings_in, "rankings", parse_rankings,
                  [](std::ostream& o, const std::vector<RankingObservation>& v) { write_rankings(o, v); });
    std::cout << report.dump() << '\n';
    return 0;
}

int cmd_diff(const RunConfig& rc)
{
    const Market m = load_market(rc);
    {
        auto out = open_out(rc.out / "events.csv");
        write_event_log(out, m.events);
    }
    auto out = open_out(rc.out / "intervals.csv");
    out << "app_id,update_to_removal,release_to_removal,removal_to_relaunch\n";
    for (const auto& [id, t] : m.timelines) {
        if (!t.ever_removed()) continue;
        const auto iv = lifespan_intervals(t);
        std::string relaunch;
        for (long d : iv.removal_to_relaunch) relaunch += (relaunch.empty() ? "" : ";") + std::to_string(d);
        out << csv::field(id) << ',' << opt_number(iv.update_to_removal) << ','
            << opt_number(iv.release_to_removal) << ',' << relaunch << '\n';
    }
    std::cout << json{{"snapshots", m.dates.size()}, {"events", m.events.size()}}.dump() << '\n';
    return 0;
}

void write_ecdf(const fs::path& path, const std::vector<double>& samples)
{
    auto out = open_out(path);
    out << "value,fraction\n";
    if (samples.empty()) return;
    const Ecdf cdf(samples);
    for (const auto& [v, f] : cdf.steps()) out << csv::number(v) << ',' << csv::number(f) << '\n';
}

int cmd_analyze(const RunConfig& rc)
{
    const Market m = load_market(rc);
    const auto series = daily_removal_series(m.events, {m.dates.front(), m.dates.back()});
    {
        auto out = open_out(rc.out / "daily_removals.csv");
        out << "date,removals\n";
        for (Eigen::Index i = 0; i < series.size(); ++i) {
            out << series.date_at(i).iso() << ',' << csv::number(series.values(i)) << '\n';
        }
    }
    const auto peaks = detect_peaks(series);
    {
        auto out = open_out(rc.out / "peaks.csv");
        out << "date,removals,days_since_previous_peak\n";
        for (std::size_t i = 0; i < peaks.peak_dates.size(); ++i) {
            const Date d = peaks.peak_dates[i];
            out << d.iso() << ',' << csv::number(series.values(d - series.start)) << ','
                << (i == 0 ? std::string() : std::to_string(peaks.interpeak_days[i - 1])) << '\n';
        }
    }
    {
        const auto cb = category_breakdown(m.events, m.category_of);
        auto out = open_out(rc.out / "category_breakdown.csv");
        out << "date,category,removals_share\n";
        for (std::size_t r = 0; r < cb.days.size(); ++r) {
            for (std::size_t c = 0; c < cb.categories.size(); ++c) {
                const double v = cb.daily_fractions(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                if (v > 0) out << cb.days[r].iso() << ',' << csv::field(cb.categories[c]) << ',' << csv::number(v) << '\n';
            }
        }
        for (std::size_t c = 0; c < cb.categories.size(); ++c) {
            out << "all," << csv::field(cb.categories[c]) << ',' << csv::number(cb.overall(static_cast<Eigen::Index>(c)))
                << '\n';
        }
    }
    const auto devs = developer_stats(m.timelines, apps_by_developer(m.timelines));
    {
        auto out = open_out(rc.out / "developer_stats.csv");
        out << "developer,apps_total,apps_removed,removed_fraction\n";
        for (const auto& d : devs.stats) {
            out << csv::field(d.developer_name) << ',' << d.apps_total << ',' << d.apps_removed << ','
                << csv::number(d.removed_fraction) << '\n';
        }
    }
    {
        auto out = open_out(rc.out / "concentration.csv");
        out << "developer_fraction,removal_share\n";
        if (std::any_of(devs.stats.begin(), devs.stats.end(), [](const auto& d) { return d.apps_removed > 0; })) {
            for (const auto& [x, y] : concentration_curve(devs.stats)) {
                out << csv::number(x) << ',' << csv::number(y) << '\n';
            }
        }
    }
    {
        const auto rankings = load_rankings(rc);
        std::map<std::string, std::vector<RankingObservation>> by_app;
        for (const auto& r : rankings) by_app[r.app_id].push_back(r);
        auto out = open_out(rc.out / "popularity.csv");
        out << "app_id,removed,popular,best_rank,last_rank_before_removal\n";
        for (const auto& [id, t] : m.timelines) {
            const auto it = by_app.find(id);
            const std::span<const RankingObservation> obs =
                it == by_app.end() ? std::span<const RankingObservation>{} : std::span(it->second);
            const auto flag = popularity_flag(id, obs, rc.popular_rank, t.first_removal());
            const auto rank = [](const std::optional<int>& r) { return r ? std::to_string(*r) : std::string(); };
            out << csv::field(id) << ',' << t.ever_removed() << ',' << flag.ever_top_k << ',' << rank(flag.best_rank)
                << ',' << (t.ever_removed() ? rank(flag.last_rank_before) : std::string()) << '\n';
        }
    }
    std::vector<double> update_gap, release_gap, relaunch_gap;
    for (const auto& [id, t] : m.timelines) {
        const auto iv = lifespan_intervals(t);
        if (iv.update_to_removal) update_gap.push_back(static_cast<double>(*iv.update_to_removal));
        if (iv.release_to_removal) release_gap.push_back(static_cast<double>(*iv.release_to_removal));
        for (long d : iv.removal_to_relaunch) relaunch_gap.push_back(static_cast<double>(d));
    }
    write_ecdf(rc.out / "ecdf_update_to_removal.csv", update_gap);
    write_ecdf(rc.out / "ecdf_release_to_removal.csv", release_gap);
    write_ecdf(rc.out / "ecdf_removal_to_relaunch.csv", relaunch_gap);
    std::cout << json{{"removal_days", series.size()},
                      {"peaks", peaks.peak_dates.size()},
                      {"median_interpeak", peaks.median_interpeak ? json(*peaks.median_interpeak) : json(nullptr)}}
                     .dump()
              << '\n';
    return 0;
}

int cmd_signals(const RunConfig& rc)
{
    const int k = single_k(rc);
    const auto bundles = load_bundles(rc);
    std::vector<AppBundle> cut;
    cut.reserve(bundles.size());
    for (const auto& b : bundles) cut.push_back(truncate_bundle(b, k));
    AbnormalReviewTable table;
    for (const auto& b : cut) table.add(b.reviews);

    auto rev = open_out(rc.out / "review_signals.csv");
    rev << "app_id,label,window_start,window_end,dup_count,dup_frac,star1,star2,star3,star4,star5,"
           "abnormal_users_M5N10,abnormal_users_M10N20,abnormal_users,review_mean,review_stddev\n";
    auto aso = open_out(rc.out / "aso_signals.csv");
    aso << "app_id,label,window_start,window_end,kw_stddev,weekly_surge,avg_kw_count,distinct_keywords,"
           "coverage_count,coverage_frac,eligible\n";
    for (const auto& b : cut) {
        const Window rw{b.data_cutoff, rc.features.review_window_days};
        const auto r = review_signals(b.app.app_id, b.reviews, rw, table);
        std::vector<Review> in_window;
        for (const auto& x : b.reviews) {
            if (rw.contains(x.date)) in_window.push_back(x);
        }
        rev << csv::field(b.app.app_id) << ',' << b.label << ',' << rw.first().iso() << ',' << rw.end.iso() << ','
            << r.duplicates.count << ',' << csv::number(r.duplicates.fraction);
        for (double f : r.stars.fractions) rev << ',' << csv::number(f);
        rev << ',' << r.abnormal_users_loose << ',' << r.abnormal_users_strict << ','
            << table.abnormal_user_count(in_window, rc.features.abnormal) << ',' << csv::number(r.daily.mean) << ','
            << csv::number(r.daily.stddev) << '\n';

        const Window kw{b.data_cutoff, rc.features.keyword_window_days};
        const auto a = aso_signals(b.app.app_id, b.app.description, b.keywords, kw, rc.surge_threshold,
                                   rc.min_avg_keywords);
        aso << csv::field(b.app.app_id) << ',' << b.label << ',' << kw.first().iso() << ',' << kw.end.iso() << ','
            << csv::number(a.keyword_stddev) << ',' << a.weekly_surge << ','
            << csv::number(a.coverage.average_keyword_count) << ',' << a.coverage.distinct_keywords << ','
            << a.coverage.coverage_count << ',' << csv::number(a.coverage.coverage_fraction) << ','
            << a.coverage.eligible << '\n';
    }
    std::cout << json{{"apps", cut.size()}, {"k", k}}.dump() << '\n';
    return 0;
}

int cmd_features(const RunConfig& rc)
{
    const int k = single_k(rc);
    const auto bundles = load_bundles(rc);
    const auto ds = build_dataset(bundles, rc.features, k);
    {
        auto out = open_out(rc.out / "dataset.csv");
        write_dataset_csv(out, ds.data);
    }
    write_text(rc.out / "dataset.json", ds.sidecar().dump(2) + "\n");
    std::cout << json{{"rows", ds.data.rows()}, {"positives", ds.data.positives()}, {"k", k},
                      {"single_class", ds.single_class}}
                     .dump()
              << '\n';
    return 0;
}

int cmd_train(const RunConfig& rc)
{
    const auto data = load_dataset(rc, single_k(rc));
    for (const auto& spec : model_specs(rc)) {
        const auto model = learners::train(data, spec.with_seed(rc.seed));
        write_text(rc.out / "models" / (spec.name() + ".json"), model.to_json().dump(2) + "\n");
    }
    std::cout << json{{"rows", data.rows()}, {"models", model_specs(rc).size()}}.dump() << '\n';
    return 0;
}

int cmd_evaluate(const RunConfig& rc)
{
    const int k = single_k(rc);
    const auto data = load_dataset(rc, k);
    std::vector<learners::SweepRow> rows;
    for (const auto& spec : model_specs(rc)) {
        rows.push_back({spec.name(), k, learners::cross_validate(data, spec, rc.folds, rc.seed).mean});
    }
    auto out = open_out(rc.out / "metrics.csv");
    learners::write_metrics_csv(out, rows);
    std::cout << json{{"rows", data.rows()}, {"models", rows.size()}, {"folds", rc.folds}}.dump() << '\n';
    return 0;
}

int cmd_sweep(const RunConfig& rc)
{
    const auto ks = parse_k_range(rc.k_range.empty() ? "0..6" : rc.k_range);
    const auto specs = model_specs(rc);
    const auto bundles = load_bundles(rc);
    const auto rows = learners::advance_sweep(bundles, rc.features, ks, specs, rc.folds, rc.seed);
    auto out = open_out(rc.out / "sweep.csv");
    learners::write_metrics_csv(out, rows);
    std::cout << json{{"k_values", ks.size()}, {"models", specs.size()}}.dump() << '\n';
    return 0;
}

int cmd_report(const RunConfig& rc)
{
    const Market m = load_market(rc);
    const auto series = daily_removal_series(m.events, {m.dates.front(), m.dates.back()});
    const auto peaks = detect_peaks(series);
    const auto devs = developer_stats(m.timelines, apps_by_developer(m.timelines));
    std::size_t removed = 0, relaunched = 0;
    for (const auto& e : m.events) {
        removed += e.kind == EventKind::Removed;
        relaunched += e.kind == EventKind::Relaunched;
    }
    std::size_t removed_apps = 0;
    for (const auto& [id, t] : m.timelines) removed_apps += t.ever_removed();

    json report{{"first_snapshot", m.dates.front().iso()},
                {"last_snapshot", m.dates.back().iso()},
                {"snapshots", m.dates.size()},
                {"apps", m.timelines.size()},
                {"removed_apps", removed_apps},
                {"removal_events", removed},
                {"relaunch_events", relaunched},
                {"peaks", peaks.peak_dates.size()},
                {"median_interpeak_days", peaks.median_interpeak ? json(*peaks.median_interpeak) : json(nullptr)},
                {"developers", devs.stats.size()},
                {"fraction_developers_all_removed", devs.fraction_developers_all_removed}};
    if (removed_apps > 0) {
        const auto curve = concentration_curve(devs.stats);
        report["removal_share_top_1pct_developers"] = concentration_at(curve, 0.01);
        report["removal_share_top_10pct_developers"] = concentration_at(curve, 0.10);
    }
    // Index of report files already produced in --out by other commands.
    json files = json::array();
    std::error_code ec;
    if (fs::is_directory(rc.out, ec)) {
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(rc.out)) {
            const auto ext = e.path().extension();
            if (e.is_regular_file() && (ext == ".csv" || ext == ".json") && e.path().filename() != "report.json") {
                names.push_back(e.path().filename().string());
            }
        }
        std::sort(names.begin(), names.end());
        for (const auto& n : names) files.push_back(n);
    }
    report["files"] = files;
    write_text(rc.out / "report.json", report.dump(2) + "\n");
    std::cout << report.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"appwatch: app-market removal analytics"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--store", f.store, "snapshot store root");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--from", f.from, "first snapshot date (YYYY-MM-DD)");
    app.add_option("--to", f.to, "last snapshot date (YYYY-MM-DD)");
    app.add_option("--config", f.config, "JSON config file; flags win");
    app.add_option("--seed", f.seed, "seed (default 42)");
    app.add_option("--k", f.k, "advance days: N, a,b,c or lo..hi");
    app.add_option("--models", f.models, std::string("comma-separated models (default ") + kAllModels + ")");
    app.add_option("--folds", f.folds, "cross-validation folds (default 10)");
    app.add_option("--m-words", f.m_words, "abnormal review: more than M words (default 5)");
    app.add_option("--n-occurrences", f.n_occurrences, "abnormal review: at least N copies (default 10)");
    app.add_option("--popular-rank", f.popular_rank, "popular = ever ranked within this (default 1500)");
    app.add_option("--surge-threshold", f.surge_threshold, "weekly keyword surge threshold (default 1000)");
    app.add_option("--min-avg-keywords", f.min_avg_keywords, "coverage eligibility (default 100)");
    app.add_option("--labels", f.labels, "labels CSV app_id,label");
    app.add_option("--input", f.inputs, "input file(s)");
    app.add_option("--date", f.date, "snapshot date for a single --input");
    app.add_option("--reviews", f.reviews, "review stream to ingest");
    app.add_option("--keywords", f.keywords, "keyword stream to ingest");
    app.add_option("--rankings", f.rankings, "ranking stream to ingest");

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"ingest", "validate snapshot files into the store"},
        {"diff", "lifecycle events and intervals"},
        {"analyze", "removal series, peaks, categories, developers, ECDFs"},
        {"signals", "review and keyword signals per app"},
        {"features", "feature matrix for a given --k"},
        {"train", "fit models on the full dataset"},
        {"evaluate", "cross-validated metrics"},
        {"sweep", "metrics across advance days"},
        {"simulate", "write a synthetic market into --store"},
        {"report", "summary of the store and produced reports"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const RunConfig rc = resolve(app, f);
        if (command == "simulate") return cmd_simulate(rc, app);
        if (command == "ingest") return cmd_ingest(rc);
        if (command == "diff") return cmd_diff(rc);
        if (command == "analyze") return cmd_analyze(rc);
        if (command == "signals") return cmd_signals(rc);
        if (command == "features") return cmd_features(rc);
        if (command == "train") return cmd_train(rc);
        if (command == "evaluate") return cmd_evaluate(rc);
        if (command == "sweep") return cmd_sweep(rc);
        return cmd_report(rc);
    } catch (const Error& e) {
        std::cerr << json{{"command", command}, {"error", to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
        // A bad flag or config value is a usage problem, not a pipeline failure.
        return e.code() == Errc::ConfigInvalid ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"command", command}, {"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
}
