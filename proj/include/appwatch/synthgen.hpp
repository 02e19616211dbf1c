#pragma once

#include "appwatch/date.hpp"
#include "appwatch/market_model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace appwatch::synth {

struct FraudProfile {
    double dup_rate = 0.6;
    double five_star_rate = 0.95;
    int abnormal_text_pool_size = 20;
    int kw_spike_magnitude = 1500;
    double kw_spike_probability = 0.7;
    double coverage_low = 0.1;
};

struct NormalProfile {
    double dup_rate = 0.05;
    double five_star_rate = 0.45;
    double kw_stddev_low = 5.0;
    double coverage_high = 0.6;
};

struct DeveloperMix {
    double all_removed_dev_fraction = 0.7;
    double mean_apps_per_fraud_dev = 1.5;
};

/// Knobs of the synthetic market. Rates are per-class means; individual apps
/// jitter around them symmetrically.
struct MarketConfig {
    int n_apps = 800;
    double fraud_fraction = 0.5;
    int days = 120;
    int removal_cycle_days = 30;
    Date start_date = Date::from_ymd(2019, 1, 1);
    FraudProfile fraud;
    NormalProfile normal;
    DeveloperMix developers;
    double relaunch_probability = 0.1;
    double reviews_per_day = 3.0;
    std::uint64_t seed = 42;

    /// Throws ConfigInvalid.
    void validate() const;

    nlohmann::json to_json() const;
    /// Missing keys keep their defaults.
    static MarketConfig from_json(const nlohmann::json& j);
};

struct PlantedApp {
    std::string app_id;
    std::string developer;
    bool fraud = false;
    double dup_rate = 0.0;
    double five_star_rate = 0.0;
    std::optional<Date> removal_date;
    std::optional<Date> relaunch_date;
    std::optional<Date> spike_date;
    int spike_magnitude = 0;
};

struct PlantedParameters {
    MarketConfig config;
    std::vector<PlantedApp> apps;  ///< sorted by app_id
    std::vector<Date> cycle_grid;  ///< removal cluster centres
    double all_removed_dev_fraction = 0.0;  ///< as realised
};

struct GeneratedMarket {
    std::vector<Snapshot> snapshots;
    std::vector<Review> reviews;
    std::vector<KeywordObservation> keywords;
    std::vector<RankingObservation> rankings;
    std::map<std::string, bool> labels;
    PlantedParameters planted;
};

/// Deterministic for a given config (including seed).
GeneratedMarket generate_market(const MarketConfig& config);

/// Ground-truth sidecar (`ground_truth.json`).
nlohmann::json describe_plant(const PlantedParameters& planted);

/// Writes the store layout plus `reviews.jsonl`, `keywords.jsonl`,
/// `rankings.jsonl`, `labels.csv` and `ground_truth.json` under `root`.
void write_market(const GeneratedMarket& market, const std::filesystem::path& root);

}  // namespace appwatch::synth
