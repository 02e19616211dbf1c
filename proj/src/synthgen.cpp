#include "appwatch/synthgen.hpp"

#include "appwatch/error.hpp"
#include "appwatch/market_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

namespace appwatch::synth {

using nlohmann::json;

namespace {

constexpr int kReviewHistoryDays = 45;
constexpr int kKeywordHistoryDays = 20;
constexpr int kFakeUserPool = 400;
constexpr int kNormalDupPhrases = 40;

constexpr std::array<std::string_view, 5> kFraudHeavyCategories = {
    "Games", "Business", "Lifestyle", "Utilities", "Education"};

/// Deterministic 6-letter pseudo-word for an index in [0, 512000).
std::string vocab_word(std::uint64_t i)
{
    static constexpr char consonants[] = "bdfghjklmnprstvz";
    static constexpr char vowels[] = "aeiou";
    std::string w(6, ' ');
    for (int k = 0; k < 3; ++k) {
        w[2 * k] = consonants[i % 16];
        i /= 16;
        w[2 * k + 1] = vowels[i % 5];
        i /= 5;
    }
    return w;
}

constexpr std::uint64_t kVocabSize = 16ULL * 5 * 16 * 5 * 16 * 5;

class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(std::clamp(p, 0.0, 1.0))(rng_); }
    int poisson(double mean) { return mean <= 0 ? 0 : std::poisson_distribution<int>(mean)(rng_); }
    int geometric(double p) { return std::geometric_distribution<int>(p)(rng_); }
    double normal(double mu, double sigma) { return std::normal_distribution<double>(mu, sigma)(rng_); }
    std::string word() { return vocab_word(std::uniform_int_distribution<std::uint64_t>(0, kVocabSize - 1)(rng_)); }

    std::string sentence(int words)
    {
        std::string s;
        for (int i = 0; i < words; ++i) {
            if (i) s.push_back(' ');
            s += word();
        }
        return s;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) { std::shuffle(v.begin(), v.end(), rng_); }

private:
    std::mt19937_64 rng_;
};

double jitter(Draw& draw, double centre, double half_width)
{
    // Symmetric around the centre, narrowed near the [0,1] edges so the mean is kept.
    const double w = std::min({half_width, centre, 1.0 - centre});
    return w > 0 ? draw.uniform(centre - w, centre + w) : centre;
}

std::string id_for(const char* prefix, int i, int width)
{
    std::string n = std::to_string(i);
    return prefix + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(n.size()))), '0') + n;
}

struct AppPlan {
    PlantedApp planted;
    AppRecord record;
    int appear_day = 0;
    std::optional<int> removal_day;
    std::optional<int> relaunch_day;
    int reference_day = 0;
    std::vector<std::string> description_words;
    double coverage = 0.0;
};

bool present_on(const AppPlan& a, int day)
{
    if (day < a.appear_day) return false;
    if (!a.removal_day || day < *a.removal_day) return true;
    return a.relaunch_day && day >= *a.relaunch_day;
}

json date_or_null(const std::optional<Date>& d)
{
    return d ? json(d->iso()) : json(nullptr);
}

}  // namespace

void MarketConfig::validate() const
{
    auto rate = [](double r, const char* name) {
        if (!(r >= 0.0 && r <= 1.0)) throw Error(Errc::ConfigInvalid, std::string(name) + " must be in [0,1]");
    };
    if (n_apps < 20) throw Error(Errc::ConfigInvalid, "n_apps must be >= 20");
    if (days < 14) throw Error(Errc::ConfigInvalid, "days must be >= 14");
    if (removal_cycle_days < 2 || removal_cycle_days >= days) {
        throw Error(Errc::ConfigInvalid, "removal_cycle_days must be in [2, days)");
    }
    rate(fraud_fraction, "fraud_fraction");
    rate(fraud.dup_rate, "fraud.dup_rate");
    rate(fraud.five_star_rate, "fraud.five_star_rate");
    rate(fraud.kw_spike_probability, "fraud.kw_spike_probability");
    rate(fraud.coverage_low, "fraud.coverage_low");
    rate(normal.dup_rate, "normal.dup_rate");
    rate(normal.five_star_rate, "normal.five_star_rate");
    rate(normal.coverage_high, "normal.coverage_high");
    rate(developers.all_removed_dev_fraction, "developers.all_removed_dev_fraction");
    rate(relaunch_probability, "relaunch_probability");
    if (fraud.abnormal_text_pool_size < 1) throw Error(Errc::ConfigInvalid, "abnormal_text_pool_size must be >= 1");
    if (fraud.kw_spike_magnitude < 0) throw Error(Errc::ConfigInvalid, "kw_spike_magnitude must be >= 0");
    if (normal.kw_stddev_low < 0) throw Error(Errc::ConfigInvalid, "kw_stddev_low must be >= 0");
    if (developers.mean_apps_per_fraud_dev < 1.0) {
        throw Error(Errc::ConfigInvalid, "mean_apps_per_fraud_dev must be >= 1");
    }
    if (!(reviews_per_day > 0.0)) throw Error(Errc::ConfigInvalid, "reviews_per_day must be > 0");
}

json MarketConfig::to_json() const
{
    return json{{"n_apps", n_apps},
                {"fraud_fraction", fraud_fraction},
                {"days", days},
                {"removal_cycle_days", removal_cycle_days},
                {"start_date", start_date.iso()},
                {"fraud",
                 {{"dup_rate", fraud.dup_rate},
                  {"five_star_rate", fraud.five_star_rate},
                  {"abnormal_text_pool_size", fraud.abnormal_text_pool_size},
                  {"kw_spike_magnitude", fraud.kw_spike_magnitude},
                  {"kw_spike_probability", fraud.kw_spike_probability},
                  {"coverage_low", fraud.coverage_low}}},
                {"normal",
                 {{"dup_rate", normal.dup_rate},
                  {"five_star_rate", normal.five_star_rate},
                  {"kw_stddev_low", normal.kw_stddev_low},
                  {"coverage_high", normal.coverage_high}}},
                {"developers",
                 {{"all_removed_dev_fraction", developers.all_removed_dev_fraction},
                  {"mean_apps_per_fraud_dev", developers.mean_apps_per_fraud_dev}}},
                {"relaunch_probability", relaunch_probability},
                {"reviews_per_day", reviews_per_day},
                {"seed", seed}};
}

MarketConfig MarketConfig::from_json(const json& j)
{
    MarketConfig c;
    try {
        c.n_apps = j.value("n_apps", c.n_apps);
        c.fraud_fraction = j.value("fraud_fraction", c.fraud_fraction);
        c.days = j.value("days", c.days);
        c.removal_cycle_days = j.value("removal_cycle_days", c.removal_cycle_days);
        if (j.contains("start_date")) c.start_date = Date::parse(j.at("start_date").get<std::string>());
        if (auto f = j.find("fraud"); f != j.end()) {
            c.fraud.dup_rate = f->value("dup_rate", c.fraud.dup_rate);
            c.fraud.five_star_rate = f->value("five_star_rate", c.fraud.five_star_rate);
            c.fraud.abnormal_text_pool_size = f->value("abnormal_text_pool_size", c.fraud.abnormal_text_pool_size);
            c.fraud.kw_spike_magnitude = f->value("kw_spike_magnitude", c.fraud.kw_spike_magnitude);
            c.fraud.kw_spike_probability = f->value("kw_spike_probability", c.fraud.kw_spike_probability);
            c.fraud.coverage_low = f->value("coverage_low", c.fraud.coverage_low);
        }
        if (auto n = j.find("normal"); n != j.end()) {
            c.normal.dup_rate = n->value("dup_rate", c.normal.dup_rate);
            c.normal.five_star_rate = n->value("five_star_rate", c.normal.five_star_rate);
            c.normal.kw_stddev_low = n->value("kw_stddev_low", c.normal.kw_stddev_low);
            c.normal.coverage_high = n->value("coverage_high", c.normal.coverage_high);
        }
        if (auto d = j.find("developers"); d != j.end()) {
            c.developers.all_removed_dev_fraction =
                d->value("all_removed_dev_fraction", c.developers.all_removed_dev_fraction);
            c.developers.mean_apps_per_fraud_dev =
                d->value("mean_apps_per_fraud_dev", c.developers.mean_apps_per_fraud_dev);
        }
        c.relaunch_probability = j.value("relaunch_probability", c.relaunch_probability);
        c.reviews_per_day = j.value("reviews_per_day", c.reviews_per_day);
        c.seed = j.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigInvalid, e.what());
    }
    c.validate();
    return c;
}

GeneratedMarket generate_market(const MarketConfig& cfg)
{
    cfg.validate();
    Draw draw(cfg.seed);
    const Date day0 = cfg.start_date;
    const int n_fraud = static_cast<int>(std::lround(cfg.n_apps * cfg.fraud_fraction));

    // Which apps are fraud: a shuffled prefix so ids of both classes interleave.
    std::vector<int> order(static_cast<std::size_t>(cfg.n_apps));
    std::iota(order.begin(), order.end(), 0);
    draw.shuffle(order);
    std::vector<AppPlan> apps(static_cast<std::size_t>(cfg.n_apps));
    std::vector<int> fraud_idx(order.begin(), order.begin() + n_fraud);
    std::vector<int> normal_idx(order.begin() + n_fraud, order.end());
    for (int i = 0; i < cfg.n_apps; ++i) {
        apps[static_cast<std::size_t>(i)].planted.app_id = id_for("app", i + 1, 5);
    }
    for (int i : fraud_idx) apps[static_cast<std::size_t>(i)].planted.fraud = true;

    // Developers: all-fraud developers vs developers holding normal apps.
    GeneratedMarket market;
    std::size_t dev_counter = 0;
    std::size_t fraud_devs = 0;
    {
        const double p = 1.0 / cfg.developers.mean_apps_per_fraud_dev;
        std::size_t i = 0;
        while (i < fraud_idx.size()) {
            const std::size_t size = 1 + static_cast<std::size_t>(p >= 1.0 ? 0 : draw.geometric(p));
            const std::string dev = id_for("dev", static_cast<int>(++dev_counter), 5);
            for (std::size_t k = 0; k < size && i < fraud_idx.size(); ++k, ++i) {
                apps[static_cast<std::size_t>(fraud_idx[i])].planted.developer = dev;
            }
            ++fraud_devs;
        }
        std::size_t normal_devs = 0;
        if (!normal_idx.empty()) {
            const double f = cfg.developers.all_removed_dev_fraction;
            const double wanted = f >= 1.0 ? 1.0
                                           : static_cast<double>(fraud_devs) * (1.0 - f) / f;
            normal_devs = std::clamp<std::size_t>(
                static_cast<std::size_t>(std::lround(fraud_devs == 0 ? normal_idx.size() / 3.0 : wanted)), 1,
                normal_idx.size());
        }
        for (std::size_t k = 0; k < normal_idx.size(); ++k) {
            apps[static_cast<std::size_t>(normal_idx[k])].planted.developer =
                id_for("dev", static_cast<int>(dev_counter + 1 + k % normal_devs), 5);
        }
        market.planted.all_removed_dev_fraction =
            fraud_devs + normal_devs == 0
                ? 0.0
                : static_cast<double>(fraud_devs) / static_cast<double>(fraud_devs + normal_devs);
    }

    // Removal grid: clusters every cycle, first one half a cycle in.
    std::vector<int> grid;
    for (int g = cfg.removal_cycle_days / 2; g <= cfg.days - 2; g += cfg.removal_cycle_days) {
        if (g >= 1) grid.push_back(g);
    }
    if (grid.empty()) grid.push_back(cfg.days / 2);
    for (int g : grid) market.planted.cycle_grid.push_back(day0 + g);

    // Lifecycle plan.
    for (std::size_t slot = 0; slot < fraud_idx.size(); ++slot) {
        AppPlan& a = apps[static_cast<std::size_t>(fraud_idx[slot])];
        const int g = grid[slot % grid.size()];
        a.removal_day = std::min(cfg.days - 1, g + std::min(draw.geometric(0.5), 3));
        a.appear_day = (*a.removal_day > 8 && draw.chance(0.2)) ? draw.integer(1, *a.removal_day - 7) : 0;
        if (draw.chance(cfg.relaunch_probability)) {
            const int back = *a.removal_day + 1 + draw.integer(0, 9);
            if (back < cfg.days) a.relaunch_day = back;
        }
        a.reference_day = *a.removal_day;
    }
    for (int i : normal_idx) {
        AppPlan& a = apps[static_cast<std::size_t>(i)];
        a.appear_day = draw.chance(0.8) ? 0 : draw.integer(1, cfg.days / 2);
        a.reference_day = cfg.days - 1;
    }

    // Records.
    for (int i = 0; i < cfg.n_apps; ++i) {
        AppPlan& a = apps[static_cast<std::size_t>(i)];
        const bool fraud = a.planted.fraud;
        AppRecord& r = a.record;
        r.app_id = a.planted.app_id;
        std::string name = draw.word() + " " + draw.word();
        name[0] = static_cast<char>(name[0] - 'a' + 'A');
        r.app_name = name;
        r.developer_name = a.planted.developer;
        if (fraud && draw.chance(0.6)) {
            r.category = Category{std::string(kFraudHeavyCategories[static_cast<std::size_t>(draw.integer(0, 4))])};
        } else {
            r.category = Category{std::string(Category::known()[static_cast<std::size_t>(draw.integer(0, 24))])};
        }
        r.price = draw.chance(0.8) ? 0.0 : std::array{0.99, 1.99, 4.99}[static_cast<std::size_t>(draw.integer(0, 2))];
        if (a.appear_day == 0) {
            r.release_date = day0 - draw.integer(30, 700);
            r.update_date = r.release_date + draw.integer(0, static_cast<int>(day0 - r.release_date));
        } else {
            r.release_date = day0 + a.appear_day;
            r.update_date = r.release_date;
        }
        r.rating_count = static_cast<long long>(std::floor(std::exp(draw.normal(3.0, 2.0))));

        a.planted.dup_rate = jitter(draw, fraud ? cfg.fraud.dup_rate : cfg.normal.dup_rate, fraud ? 0.1 : 0.05);
        a.planted.five_star_rate =
            jitter(draw, fraud ? cfg.fraud.five_star_rate : cfg.normal.five_star_rate, fraud ? 0.04 : 0.15);
        a.coverage = jitter(draw, fraud ? cfg.fraud.coverage_low : cfg.normal.coverage_high, fraud ? 0.05 : 0.1);
        if (a.removal_day) a.planted.removal_date = day0 + *a.removal_day;
        if (a.relaunch_day) a.planted.relaunch_date = day0 + *a.relaunch_day;
    }

    // Shared text pools.
    std::unordered_set<std::string> used_texts;
    std::vector<std::string> abnormal_pool;
    while (abnormal_pool.size() < static_cast<std::size_t>(cfg.fraud.abnormal_text_pool_size)) {
        std::string t = draw.sentence(draw.integer(8, 14));
        if (used_texts.insert(t).second) abnormal_pool.push_back(std::move(t));
    }
    std::vector<std::string> short_pool;
    while (short_pool.size() < static_cast<std::size_t>(kNormalDupPhrases)) {
        std::string t = draw.sentence(draw.integer(2, 4));
        if (used_texts.insert(t).second) short_pool.push_back(std::move(t));
    }

    // Reviews.
    for (int i = 0; i < cfg.n_apps; ++i) {
        AppPlan& a = apps[static_cast<std::size_t>(i)];
        const bool fraud = a.planted.fraud;
        const int first_day = std::max(a.reference_day - kReviewHistoryDays, a.appear_day - 1);
        std::vector<Review> reviews;
        for (int d = first_day; d < a.reference_day; ++d) {
            double rate = cfg.reviews_per_day;
            if (fraud && draw.chance(0.15)) rate *= 4.0;
            const int count = draw.poisson(rate);
            for (int c = 0; c < count; ++c) {
                Review r;
                r.app_id = a.planted.app_id;
                r.date = day0 + d;
                r.stars = draw.chance(a.planted.five_star_rate) ? 5 : draw.integer(1, 4);
                reviews.push_back(std::move(r));
            }
        }
        // Duplicate groups of 2-4 consecutive marked reviews; a leftover single joins the last group.
        std::vector<std::size_t> marked;
        for (std::size_t k = 0; k < reviews.size(); ++k) {
            if (draw.chance(a.planted.dup_rate)) marked.push_back(k);
        }
        if (marked.size() == 1) marked.clear();
        std::vector<int> group_of(reviews.size(), -1);
        int groups = 0;
        for (std::size_t k = 0; k < marked.size();) {
            std::size_t size = static_cast<std::size_t>(draw.integer(2, 4));
            if (marked.size() - k - size == 1 || k + size > marked.size()) size = marked.size() - k;
            for (std::size_t m = k; m < k + size; ++m) group_of[marked[m]] = groups;
            ++groups;
            k += size;
        }
        std::vector<std::string> group_text(static_cast<std::size_t>(groups));
        for (auto& t : group_text) {
            const auto& pool = fraud ? abnormal_pool : short_pool;
            t = pool[static_cast<std::size_t>(draw.integer(0, static_cast<int>(pool.size()) - 1))];
        }
        int user_serial = 0;
        for (std::size_t k = 0; k < reviews.size(); ++k) {
            Review& r = reviews[k];
            if (group_of[k] >= 0) {
                r.text = group_text[static_cast<std::size_t>(group_of[k])];
                r.user_id = fraud ? id_for("fake", draw.integer(1, kFakeUserPool), 4)
                                  : a.planted.app_id + "-u" + std::to_string(++user_serial);
            } else {
                std::string t;
                do {
                    t = draw.sentence(draw.integer(3, 12));
                } while (!used_texts.insert(t).second);
                r.text = std::move(t);
                r.user_id = a.planted.app_id + "-u" + std::to_string(++user_serial);
            }
        }
        market.reviews.insert(market.reviews.end(), std::make_move_iterator(reviews.begin()),
                              std::make_move_iterator(reviews.end()));
    }

    // Keywords and descriptions.
    for (int i = 0; i < cfg.n_apps; ++i) {
        AppPlan& a = apps[static_cast<std::size_t>(i)];
        const bool fraud = a.planted.fraud;
        const int base = fraud ? draw.integer(60, 200) : draw.integer(100, 220);
        const int relevant = static_cast<int>(std::lround(base * a.coverage));

        std::vector<std::string> description;
        std::set<std::string> desc_words;
        while (static_cast<int>(desc_words.size()) < relevant + 10) desc_words.insert(draw.word());
        std::vector<std::string> spare(desc_words.begin(), desc_words.end());
        draw.shuffle(spare);
        for (int f = 0; f < 20; ++f) description.push_back(draw.word());
        description.insert(description.end(), spare.begin(), spare.end());
        draw.shuffle(description);
        std::string text;
        for (const auto& w : description) {
            if (!text.empty()) text.push_back(' ');
            text += w;
        }
        a.record.description = std::move(text);

        int serial = 0;
        const std::string stem = draw.word();
        auto irrelevant = [&] { return stem + std::to_string(++serial); };

        std::vector<std::string> current(spare.begin(), spare.begin() + relevant);
        spare.erase(spare.begin(), spare.begin() + relevant);
        while (static_cast<int>(current.size()) < base) current.push_back(irrelevant());

        std::optional<int> spike_day;
        int spike_size = 0;
        if (fraud && draw.chance(cfg.fraud.kw_spike_probability)) {
            spike_day = a.reference_day - (1 + std::min(draw.geometric(0.5), 4));
            spike_size = cfg.fraud.kw_spike_magnitude + draw.integer(0, 500);
            a.planted.spike_date = day0 + *spike_day;
            a.planted.spike_magnitude = spike_size;
        }

        const int first_day = a.reference_day - kKeywordHistoryDays;
        for (int d = first_day; d < a.reference_day; ++d) {
            bool changed = d == first_day;
            if (!fraud && d > first_day && draw.chance(0.3)) {
                const int delta = static_cast<int>(std::lround(draw.normal(0.0, cfg.normal.kw_stddev_low)));
                if (delta > 0) {
                    for (int k = 0; k < delta; ++k) {
                        if (!spare.empty() && draw.chance(a.coverage)) {
                            current.push_back(spare.back());
                            spare.pop_back();
                        } else {
                            current.push_back(irrelevant());
                        }
                    }
                } else if (delta < 0) {
                    for (int k = 0; k < -delta && current.size() > 1; ++k) {
                        const auto victim = static_cast<std::size_t>(draw.integer(0, static_cast<int>(current.size()) - 1));
                        current.erase(current.begin() + static_cast<std::ptrdiff_t>(victim));
                    }
                }
                changed = delta != 0;
            }
            if (spike_day && d == *spike_day) {
                for (int k = 0; k < spike_size; ++k) current.push_back(irrelevant());
                changed = true;
            }
            if (changed) market.keywords.push_back(KeywordObservation::make(a.planted.app_id, day0 + d, current));
        }
    }

    // Rankings for a minority of apps, weekly while present.
    for (int i = 0; i < cfg.n_apps; ++i) {
        const AppPlan& a = apps[static_cast<std::size_t>(i)];
        if (!draw.chance(0.15)) continue;
        const int centre = draw.integer(1, 3000);
        for (int d = a.appear_day; d < cfg.days; d += 7) {
            if (!present_on(a, d)) continue;
            const int rank = std::max(1, centre + draw.integer(-200, 200));
            market.rankings.push_back({a.planted.app_id, day0 + d, a.record.category, rank});
        }
    }

    // Snapshots.
    for (int d = 0; d < cfg.days; ++d) {
        Snapshot s{day0 + d, {}};
        for (const auto& a : apps) {
            if (present_on(a, d)) s.records.emplace(a.planted.app_id, a.record);
        }
        market.snapshots.push_back(std::move(s));
    }

    for (const auto& a : apps) {
        market.labels[a.planted.app_id] = a.planted.fraud;
        market.planted.apps.push_back(a.planted);
    }
    std::sort(market.planted.apps.begin(), market.planted.apps.end(),
              [](const PlantedApp& x, const PlantedApp& y) { return x.app_id < y.app_id; });
    market.planted.config = cfg;
    return market;
}

json describe_plant(const PlantedParameters& planted)
{
    json apps = json::array();
    std::size_t fraud = 0;
    for (const auto& a : planted.apps) {
        fraud += a.fraud ? 1 : 0;
        apps.push_back({{"app_id", a.app_id},
                        {"developer", a.developer},
                        {"profile", a.fraud ? "fraud" : "normal"},
                        {"dup_rate", a.dup_rate},
                        {"five_star_rate", a.five_star_rate},
                        {"removal_date", date_or_null(a.removal_date)},
                        {"relaunch_date", date_or_null(a.relaunch_date)},
                        {"spike_date", date_or_null(a.spike_date)},
                        {"spike_magnitude", a.spike_magnitude}});
    }
    json grid = json::array();
    for (Date d : planted.cycle_grid) grid.push_back(d.iso());
    return json{{"config", planted.config.to_json()},
                {"n_apps", planted.apps.size()},
                {"n_fraud", fraud},
                {"cycle_grid", grid},
                {"all_removed_dev_fraction", planted.all_removed_dev_fraction},
                {"apps", apps}};
}

void write_market(const GeneratedMarket& market, const std::filesystem::path& root)
{
    std::filesystem::create_directories(root);
    SnapshotStore store(root);
    for (const auto& s : market.snapshots) store.persist(s);

    auto open = [&](const char* name) {
        std::ofstream out(root / name, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoFailure, "cannot write " + (root / name).string());
        return out;
    };
    {
        auto out = open("reviews.jsonl");
        write_reviews(out, market.reviews);
    }
    {
        auto out = open("keywords.jsonl");
        write_keywords(out, market.keywords);
    }
    {
        auto out = open("rankings.jsonl");
        write_rankings(out, market.rankings);
    }
    {
        auto out = open("labels.csv");
        out << "app_id,label\n";
        for (const auto& [id, label] : market.labels) out << id << ',' << (label ? 1 : 0) << '\n';
    }
    {
        auto out = open("ground_truth.json");
        out << describe_plant(market.planted).dump(2) << '\n';
    }
}

}  // namespace appwatch::synth
