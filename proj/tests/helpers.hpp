#pragma once

#include "appwatch/date.hpp"
#include "appwatch/error.hpp"
#include "appwatch/market_model.hpp"

#include <functional>
#include <optional>
#include <string>

namespace testing_support {

using appwatch::Date;

inline Date day(int offset)
{
    return Date::from_ymd(2019, 1, 1) + offset;
}

inline appwatch::AppRecord record(const std::string& id, Date release = Date::from_ymd(2018, 6, 1))
{
    appwatch::AppRecord r;
    r.app_id = id;
    r.app_name = "App " + id;
    r.developer_name = "dev-" + id;
    r.category = appwatch::Category{"Games"};
    r.price = 0.0;
    r.release_date = release;
    r.update_date = release;
    r.rating_count = 10;
    r.description = "";
    return r;
}

inline appwatch::Review review(const std::string& app, const std::string& user, Date date, int stars,
                               const std::string& text)
{
    return appwatch::Review{app, user, date, stars, text};
}

/// Runs `fn` and returns the error code it throws; fails the caller's expectation otherwise.
inline std::optional<appwatch::Errc> error_code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const appwatch::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

}  // namespace testing_support
