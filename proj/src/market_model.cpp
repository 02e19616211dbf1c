#include "appwatch/market_model.hpp"

#include "appwatch/error.hpp"
#include "appwatch/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace appwatch {

namespace {

constexpr std::array<std::string_view, 25> kKnownCategories = {
    "Books",         "Business",          "Developer Tools", "Education",
    "Entertainment", "Finance",           "Food & Drink",    "Games",
    "Graphics & Design", "Health & Fitness", "Lifestyle",    "Magazines & Newspapers",
    "Medical",       "Music",             "Navigation",      "News",
    "Photo & Video", "Productivity",      "Reference",       "Shopping",
    "Social Networking", "Sports",        "Travel",          "Utilities",
    "Weather",
};

}  // namespace

bool Category::is_known() const
{
    return std::find(kKnownCategories.begin(), kKnownCategories.end(), name_) !=
           kKnownCategories.end();
}

std::span<const std::string_view> Category::known()
{
    return kKnownCategories;
}

const Category& Category::unknown()
{
    static const Category c{"unknown"};
    return c;
}

void validate(const AppRecord& r)
{
    if (r.app_id.empty()) throw Error(Errc::InvalidRecord, "empty app_id");
    if (r.update_date < r.release_date) {
        throw Error(Errc::InvalidRecord, r.app_id + ": update_date before release_date");
    }
    if (r.rating_count < 0) throw Error(Errc::InvalidRecord, r.app_id + ": negative rating_count");
    if (!(r.price >= 0.0) || !std::isfinite(r.price)) {
        throw Error(Errc::InvalidRecord, r.app_id + ": price must be a non-negative number");
    }
}

KeywordObservation KeywordObservation::make(std::string app_id, Date date,
                                            std::vector<std::string> raw)
{
    KeywordObservation obs{std::move(app_id), date, {}};
    obs.keywords.reserve(raw.size());
    for (const auto& k : raw) {
        std::string n = text::normalize_keyword(k);
        if (!n.empty()) obs.keywords.push_back(std::move(n));
    }
    std::sort(obs.keywords.begin(), obs.keywords.end());
    obs.keywords.erase(std::unique(obs.keywords.begin(), obs.keywords.end()), obs.keywords.end());
    return obs;
}

}  // namespace appwatch
