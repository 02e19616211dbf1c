// Acceptance gate: one PASS/FAIL line per criterion; non-zero exit on any failure.
#include "appwatch/aso_signals.hpp"
#include "appwatch/diff_engine.hpp"
#include "appwatch/feature_builder.hpp"
#include "appwatch/learners/metrics.hpp"
#include "appwatch/learners/model.hpp"
#include "appwatch/learners/validation.hpp"
#include "appwatch/lifecycle_analytics.hpp"
#include "appwatch/market_io.hpp"
#include "appwatch/review_signals.hpp"
#include "appwatch/synthgen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstring>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

using namespace appwatch;
using namespace appwatch::learners;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

Date day(int n)
{
    return Date::from_ymd(2019, 1, 1) + n;
}

AppRecord plain_record(const std::string& id)
{
    AppRecord r;
    r.app_id = id;
    r.app_name = id;
    r.developer_name = "d";
    r.category = Category{"Games"};
    r.release_date = r.update_date = Date::from_ymd(2018, 1, 1);
    return r;
}

std::vector<AppBundle> bundles_for(const synth::GeneratedMarket& m)
{
    TimelineBuilder b;
    for (const auto& s : m.snapshots) b.add(s);
    auto latest = b.latest_records();
    auto timelines = std::move(b).finish();
    return assemble_bundles(timelines, latest, m.labels, m.reviews, m.keywords);
}

// 1
Outcome diff_oracle()
{
    std::mt19937_64 rng(1001);
    bool ok = true;
    double elapsed = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        Snapshot prev{day(0), {}}, curr{day(1), {}};
        std::set<std::string> seen;
        const int universe = 1 + static_cast<int>(rng() % 700);
        for (int i = 0; i < universe; ++i) {
            const std::string id = fmt::format("app{:04}", i);
            if (rng() % 2 && prev.records.size() < 500) prev.records.emplace(id, plain_record(id));
            if (rng() % 2 && curr.records.size() < 500) curr.records.emplace(id, plain_record(id));
            if (rng() % 4 == 0) seen.insert(id);
        }
        const auto t0 = Clock::now();
        auto events = diff_snapshots(prev, curr, seen);
        elapsed += seconds_since(t0);

        std::map<std::string, EventKind> expected;
        for (const auto& [id, r] : prev.records) {
            if (!curr.records.contains(id)) expected[id] = EventKind::Removed;
        }
        for (const auto& [id, r] : curr.records) {
            if (!prev.records.contains(id)) expected[id] = seen.contains(id) ? EventKind::Relaunched : EventKind::Appeared;
        }
        std::map<std::string, EventKind> got;
        for (const auto& e : events) {
            ok = ok && e.date == curr.date && got.emplace(e.app_id, e.kind).second;
        }
        ok = ok && got == expected;
    }
    return {ok && elapsed < 1.0, fmt::format("100 pairs exact={}, diff time {:.4f}s", ok, elapsed)};
}

// 2
Outcome timeline_reconstruction()
{
    std::mt19937_64 rng(1002);
    long mismatches = 0;
    for (int rep = 0; rep < 500; ++rep) {
        const double p_present = 0.2 + 0.6 * static_cast<double>(rng() % 100) / 100.0;
        std::bernoulli_distribution present(p_present);
        std::vector<std::vector<bool>> bits(50, std::vector<bool>(30));
        for (auto& row : bits) {
            for (std::size_t d = 0; d < 30; ++d) row[d] = present(rng);
        }
        std::vector<Snapshot> snaps;
        for (int d = 0; d < 30; ++d) {
            Snapshot s{day(d), {}};
            for (int a = 0; a < 50; ++a) {
                if (bits[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)]) {
                    const std::string id = fmt::format("a{}", a);
                    s.records.emplace(id, plain_record(id));
                }
            }
            snaps.push_back(std::move(s));
        }
        auto timelines = build_timelines(snaps);
        for (int a = 0; a < 50; ++a) {
            auto it = timelines.find(fmt::format("a{}", a));
            for (int d = 0; d < 30; ++d) {
                const bool truth = bits[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)];
                const bool replayed = it != timelines.end() && it->second.present_at(day(d));
                mismatches += truth != replayed;
            }
        }
    }
    return {mismatches == 0, fmt::format("500 matrices 30x50, {} presence mismatches", mismatches)};
}

// 3
Outcome auc_oracle()
{
    std::mt19937_64 rng(1003);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 49);
        Eigen::VectorXi y(n);
        Eigen::VectorXd s(n);
        for (int i = 0; i < n; ++i) {
            y(i) = static_cast<int>(rng() % 2);
            s(i) = static_cast<double>(rng() % 10) / 10.0;  // coarse grid forces ties
        }
        y(0) = 1;
        y(n - 1) = 0;
        double wins = 0, pairs = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (y(i) == 1 && y(j) == 0) {
                    pairs += 1;
                    wins += s(i) > s(j) ? 1.0 : (s(i) == s(j) ? 0.5 : 0.0);
                }
            }
        }
        worst = std::max(worst, std::abs(*evaluate_metrics(y, s).auc - wins / pairs));
    }
    return {worst <= 1e-9, fmt::format("200 instances, max |auc - pairwise| = {:.3g}", worst)};
}

// 4
Outcome gradient_check()
{
    std::mt19937_64 rng(1004);
    std::normal_distribution<double> g(0, 1);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 10 + static_cast<int>(rng() % 50), d = 1 + static_cast<int>(rng() % 8);
        Eigen::MatrixXd x(n, d);
        Eigen::VectorXi y(n);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
        for (int i = 0; i < n; ++i) y(i) = static_cast<int>(rng() % 2);
        Eigen::VectorXd w(d);
        for (auto& v : w) v = g(rng);
        const double b = g(rng), l2 = 1e-3;
        const auto at = logistic_objective(x, y, w, b, l2);
        const double h = 1e-5;
        for (int j = 0; j <= d; ++j) {
            Eigen::VectorXd wp = w, wm = w;
            double bp = b, bm = b;
            if (j < d) {
                wp(j) += h;
                wm(j) -= h;
            } else {
                bp += h;
                bm -= h;
            }
            const double numeric =
                (logistic_objective(x, y, wp, bp, l2).loss - logistic_objective(x, y, wm, bm, l2).loss) / (2 * h);
            const double analytic = j < d ? at.grad_weights(j) : at.grad_bias;
            worst = std::max(worst, std::abs(numeric - analytic) / std::max(std::abs(analytic), 1e-8));
        }
    }
    return {worst <= 1e-5, fmt::format("20 problems, max relative error {:.3g}", worst)};
}

// 5
Outcome gbdt_monotone()
{
    std::mt19937_64 rng(1005);
    std::normal_distribution<double> g(0, 1);
    double worst_rise = -1e300;
    for (int rep = 0; rep < 10; ++rep) {
        LabeledDataset ds;
        const int n = 60 + 20 * rep, d = 2 + rep % 5;
        ds.features.resize(n, d);
        ds.labels.resize(n);
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int j = 0; j < d; ++j) {
                ds.features(i, j) = g(rng);
                s += ds.features(i, j);
            }
            ds.labels(i) = s + 1.5 * g(rng) > 0 ? 1 : 0;
        }
        ds.labels(0) = 1;
        ds.labels(1) = 0;
        TrainingTrace trace;
        train_gbdt(ds, GbdtParams{50, 0.1, 3, 1, static_cast<std::uint64_t>(rep)}, &trace);
        for (std::size_t i = 1; i < trace.loss.size(); ++i) worst_rise = std::max(worst_rise, trace.loss[i] - trace.loss[i - 1]);
    }
    return {worst_rise <= 1e-12, fmt::format("10 datasets x 50 rounds, max per-round loss change {:.3g}", worst_rise)};
}

// 6
Outcome signal_oracles()
{
    std::mt19937_64 rng(1006);
    bool dup_ok = true;
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Review> rs;
        const int n = 1 + static_cast<int>(rng() % 300);
        for (int i = 0; i < n; ++i) {
            std::string t;
            for (int k = 0, len = 1 + static_cast<int>(rng() % 3); k < len; ++k) t.push_back(static_cast<char>('a' + rng() % 4));
            rs.push_back({"a", "u", day(0), 5, t});
        }
        std::size_t expected = 0;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            bool twin = false;
            for (std::size_t j = 0; j < rs.size() && !twin; ++j) twin = i != j && rs[i].text == rs[j].text;
            expected += twin;
        }
        dup_ok = dup_ok && duplicate_stats(rs).count == expected;
    }

    bool lattice_ok = true;
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<std::string> pool;
        for (int i = 0; i < 20; ++i) {
            std::string t;
            for (int w = 0, words = 1 + static_cast<int>(rng() % 15); w < words; ++w) t += fmt::format("{}w{}_{} ", w ? " " : "", i, w);
            pool.push_back(t);
        }
        std::vector<Review> rs;
        for (int i = 0; i < 800; ++i) {
            rs.push_back({fmt::format("app{}", rng() % 30), fmt::format("u{}", rng() % 200), day(0), 5, pool[rng() % pool.size()]});
        }
        const std::array<int, 3> ms{1, 5, 10}, ns{2, 10, 20};
        std::map<std::pair<int, int>, std::set<std::string>> users;
        for (int m : ms) {
            for (int n : ns) users[{m, n}] = abnormal_users(rs, AbnormalParams{m, n}).abnormal_users;
        }
        for (int m : ms) {
            for (int n : ns) {
                for (int m2 : ms) {
                    for (int n2 : ns) {
                        if (m2 < m || n2 < n) continue;
                        const auto& big = users[{m, n}];
                        for (const auto& u : users[{m2, n2}]) lattice_ok = lattice_ok && big.contains(u);
                    }
                }
            }
        }
    }

    double worst = 0.0;
    std::uniform_real_distribution<double> u(0, 10000);
    for (int rep = 0; rep < 50; ++rep) {
        DailySeries s{day(0), Eigen::ArrayXd(1 + static_cast<Eigen::Index>(rng() % 90))};
        for (auto& v : s.values) v = std::floor(u(rng));
        double mean = 0;
        for (double v : s.values) mean += v;
        mean /= static_cast<double>(s.size());
        double ss = 0;
        for (double v : s.values) ss += (v - mean) * (v - mean);
        const double oracle = std::sqrt(ss / static_cast<double>(s.size()));
        worst = std::max(worst, std::abs(series_stddev(s) - oracle));
    }
    return {dup_ok && lattice_ok && worst <= 1e-9,
            fmt::format("duplicates exact={}, lattice monotone={}, stddev max error {:.3g}", dup_ok, lattice_ok, worst)};
}

// 7
Outcome no_leakage()
{
    long differing = 0, comparisons = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        synth::MarketConfig cfg;
        cfg.n_apps = 40;
        cfg.days = 40;
        cfg.removal_cycle_days = 10;
        cfg.seed = 500 + seed;
        const auto bundles = bundles_for(synth::generate_market(cfg));
        std::mt19937_64 rng(seed);
        for (int k = 1; k <= 6; ++k) {
            const auto clean = build_dataset(bundles, FeatureConfig{}, k);
            auto poisoned = bundles;
            for (auto& b : poisoned) {
                const Date cutoff = b.reference_date - k;
                for (auto& r : b.reviews) {
                    if (r.date > cutoff) {
                        r.text = "same abnormal text repeated by many fake accounts today";
                        r.stars = 1 + static_cast<int>(rng() % 5);
                        r.user_id = "poison";
                    }
                }
                for (auto& o : b.keywords) {
                    if (o.date > cutoff) o = KeywordObservation::make(o.app_id, o.date, {"poison", "zzz"});
                }
                for (int j = 0; j < 12; ++j) {
                    b.reviews.push_back({b.app.app_id, fmt::format("p{}", j), cutoff + 1, 5,
                                         "same abnormal text repeated by many fake accounts today"});
                }
                std::vector<std::string> many;
                for (int j = 0; j < 3000; ++j) many.push_back(fmt::format("junk{}", j));
                b.keywords.push_back(KeywordObservation::make(b.app.app_id, cutoff + 1, many));
            }
            const auto dirty = build_dataset(poisoned, FeatureConfig{}, k);
            ++comparisons;
            const bool same = clean.data.features.rows() == dirty.data.features.rows() &&
                              std::memcmp(clean.data.features.data(), dirty.data.features.data(),
                                          sizeof(double) * static_cast<std::size_t>(clean.data.features.size())) == 0 &&
                              clean.data.labels == dirty.data.labels;
            differing += !same;
        }
    }
    return {differing == 0, fmt::format("{} (seed, k) datasets compared bitwise, {} differ", comparisons, differing)};
}

struct Benchmark {
    std::vector<AppBundle> bundles;
    FeatureDataset k0;
    double build_seconds = 0.0;
};

Benchmark& benchmark()
{
    static Benchmark b = [] {
        Benchmark out;
        const auto t0 = Clock::now();
        out.bundles = bundles_for(synth::generate_market(synth::MarketConfig{}));
        out.k0 = build_dataset(out.bundles, FeatureConfig{}, 0);
        out.build_seconds = seconds_since(t0);
        return out;
    }();
    return b;
}

// 8
Outcome end_to_end()
{
    const auto t0 = Clock::now();
    auto& b = benchmark();
    const auto cv = cross_validate(b.k0.data, ModelSpec::defaults("gbdt"), 10, 42);
    const double total = seconds_since(t0);
    const double auc = cv.mean.auc.value_or(0.0);
    return {auc >= 0.90 && cv.mean.f1 >= 0.80 && total < 120.0,
            fmt::format("{} apps, GBDT 10-fold AUC {:.4f} F1 {:.4f}, {:.1f}s", b.k0.data.rows(), auc, cv.mean.f1, total)};
}

// 9
Outcome advance_degradation()
{
    auto& b = benchmark();
    const std::vector<int> ks = {0, 6};
    const std::vector<ModelSpec> specs = {ModelSpec::defaults("gbdt")};
    const auto rows = advance_sweep(b.bundles, FeatureConfig{}, ks, specs, 10, 42);
    const double f0 = rows[0].metrics.f1, f6 = rows[1].metrics.f1;
    return {f6 >= f0 - 0.15, fmt::format("GBDT F1 k=0 {:.4f}, k=6 {:.4f}", f0, f6)};
}

// 10
Outcome periodicity()
{
    bool ok = true;
    std::string medians;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        synth::MarketConfig cfg;
        cfg.seed = seed;
        cfg.removal_cycle_days = 30;
        const auto m = synth::generate_market(cfg);
        TimelineBuilder tb;
        for (const auto& s : m.snapshots) tb.add(s);
        const auto series = daily_removal_series(tb.events(), {m.snapshots.front().date, m.snapshots.back().date});
        const auto peaks = detect_peaks(series);
        const double med = peaks.median_interpeak.value_or(-1.0);
        ok = ok && med >= 28.0 && med <= 32.0;
        medians += fmt::format("{}{}", medians.empty() ? "" : ",", med);
    }
    return {ok, "median interpeak per seed: " + medians};
}

// 11
Outcome calibration()
{
    const synth::MarketConfig cfg;
    const auto m = synth::generate_market(cfg);
    const auto bundles = bundles_for(m);
    const auto ds = build_dataset(bundles, FeatureConfig{}, 0);
    const auto& names = ds.data.feature_names;
    const auto col = [&](const char* n) { return std::find(names.begin(), names.end(), n) - names.begin(); };
    double dup[2] = {0, 0}, five[2] = {0, 0}, count[2] = {0, 0};
    for (Eigen::Index i = 0; i < ds.data.rows(); ++i) {
        const int c = ds.data.labels(i);
        dup[c] += ds.data.features(i, col("duplicate_fraction"));
        five[c] += ds.data.features(i, col("rating_5_fraction"));
        count[c] += 1;
    }
    const double dup_f = dup[1] / count[1], dup_n = dup[0] / count[0];
    const double five_f = five[1] / count[1], five_n = five[0] / count[0];
    const bool rates_ok = std::abs(dup_f - cfg.fraud.dup_rate) <= 0.05 && std::abs(dup_n - cfg.normal.dup_rate) <= 0.05 &&
                          std::abs(five_f - cfg.fraud.five_star_rate) <= 0.05 &&
                          std::abs(five_n - cfg.normal.five_star_rate) <= 0.05;

    std::map<std::string, const AppBundle*> by_id;
    for (const auto& b : bundles) by_id[b.app.app_id] = &b;
    int spiked = 0, flagged = 0;
    for (const auto& a : m.planted.apps) {
        if (!a.fraud || !a.spike_date || a.spike_magnitude < 1000) continue;
        ++spiked;
        const AppBundle& b = *by_id.at(a.app_id);
        const auto aso = aso_signals(a.app_id, b.app.description, b.keywords, Window{b.data_cutoff, kSurgeWindowDays});
        flagged += aso.weekly_surge;
    }
    return {rates_ok && spiked > 0 && flagged == spiked,
            fmt::format("dup fraud {:.3f}/{} normal {:.3f}/{}; five-star fraud {:.3f}/{} normal {:.3f}/{}; surge {}/{}",
                        dup_f, cfg.fraud.dup_rate, dup_n, cfg.normal.dup_rate, five_f, cfg.fraud.five_star_rate, five_n,
                        cfg.normal.five_star_rate, flagged, spiked)};
}

// 12
Outcome determinism()
{
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / fmt::format("appwatch_acceptance_{}", ::getpid());
    fs::remove_all(base);
    synth::MarketConfig cfg;
    cfg.n_apps = 200;
    cfg.days = 60;
    cfg.seed = 77;

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    auto report_text = [&](const synth::GeneratedMarket& m) {
        const auto bundles = bundles_for(m);
        const auto ds = build_dataset(bundles, FeatureConfig{}, 0);
        std::ostringstream out;
        write_dataset_csv(out, ds.data);
        out << ds.sidecar().dump();
        const std::vector<int> ks = {0, 2};
        const std::vector<ModelSpec> specs = {ModelSpec::defaults("gbdt"), ModelSpec::defaults("rf")};
        write_metrics_csv(out, advance_sweep(bundles, FeatureConfig{}, ks, specs, 5, 3));
        std::vector<Snapshot> snaps = m.snapshots;
        TimelineBuilder tb;
        for (const auto& s : snaps) tb.add(s);
        write_event_log(out, tb.events());
        return std::make_pair(out.str(), ds);
    };

    const auto m1 = synth::generate_market(cfg);
    const auto m2 = synth::generate_market(cfg);
    synth::write_market(m1, base / "a");
    synth::write_market(m2, base / "b");
    bool files_same = true;
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(base / "a")) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(entry.path(), base / "a");
        files_same = files_same && slurp(entry.path()) == slurp(base / "b" / rel);
    }

    const auto [r1, ds1] = report_text(m1);
    const auto [r2, ds2] = report_text(m2);
    const bool reports_same = r1 == r2;

    const auto model1 = train(ds1.data, ModelSpec::defaults("gbdt").with_seed(5));
    const auto model2 = train(ds2.data, ModelSpec::defaults("gbdt").with_seed(5));
    const std::string text1 = model1.to_json().dump();
    const bool models_same = text1 == model2.to_json().dump();

    bool model_round_trip = true;
    for (const char* name : {"lr", "svm", "knn", "tree", "rf", "gbdt"}) {
        const auto m = train(ds1.data, ModelSpec::defaults(name));
        const auto back = Model::from_json(nlohmann::json::parse(m.to_json().dump()));
        model_round_trip = model_round_trip && back.to_json().dump() == m.to_json().dump() &&
                           back.predict_scores(ds1.data.features) == m.predict_scores(ds1.data.features);
    }

    SnapshotStore store(base / "a");
    bool snapshot_round_trip = true;
    for (const auto& s : m1.snapshots) snapshot_round_trip = snapshot_round_trip && store.load(s.date) == s;

    fs::remove_all(base);
    const bool ok = files_same && files > 0 && reports_same && models_same && model_round_trip && snapshot_round_trip;
    return {ok, fmt::format("{} files identical={}, reports={}, models={}, model round-trip={}, snapshot round-trip={}",
                            files, files_same, reports_same, models_same, model_round_trip, snapshot_round_trip)};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"diff oracle", diff_oracle},
        {"timeline reconstruction", timeline_reconstruction},
        {"AUC oracle", auc_oracle},
        {"logistic gradient check", gradient_check},
        {"GBDT loss monotonicity", gbdt_monotone},
        {"signal oracles", signal_oracles},
        {"no leakage", no_leakage},
        {"end-to-end benchmark", end_to_end},
        {"advance sweep degradation", advance_degradation},
        {"periodicity recovery", periodicity},
        {"ground-truth calibration", calibration},
        {"determinism and round-trips", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << fmt::format("{} criterion {:>2} {}: {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail)
                  << std::endl;
    }
    std::cout << fmt::format("{}/{} criteria passed", criteria.size() - static_cast<std::size_t>(failures), criteria.size())
              << std::endl;
    return failures == 0 ? 0 : 1;
}
