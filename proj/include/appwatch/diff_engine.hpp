#pragma once

#include "appwatch/date.hpp"
#include "appwatch/market_model.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace appwatch {

enum class EventKind { Appeared, Removed, Relaunched };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

struct LifecycleEvent {
    std::string app_id;
    Date date;
    EventKind kind = EventKind::Appeared;

    friend bool operator==(const LifecycleEvent&, const LifecycleEvent&) = default;
};

/// Per-app event history. Events strictly increase in date and follow
/// Appeared -> Removed -> Relaunched -> Removed -> ...
struct AppTimeline {
    std::string app_id;
    std::vector<LifecycleEvent> events;
    Date release_date;
    Date last_update_date;
    Category category;
    std::string developer_name;
    Date first_seen;
    Date last_seen;  ///< last snapshot date the app was present

    /// Presence implied by replaying events up to and including `date`.
    bool present_at(Date date) const;
    std::optional<Date> first_removal() const;
    bool ever_removed() const { return first_removal().has_value(); }
    /// Date of the last event that left the app present, if it is present at the end.
    std::optional<Date> last_present_since() const;
};

/// Classifies the symmetric difference of two snapshots. Output is sorted by
/// app_id. Throws InvalidOrder unless prev.date < curr.date.
std::vector<LifecycleEvent> diff_snapshots(const Snapshot& prev, const Snapshot& curr,
                                           const std::set<std::string>& seen_before);

/// Incremental fold over date-ordered snapshots, so callers can stream a store
/// without holding every snapshot in memory.
class TimelineBuilder {
public:
    void add(const Snapshot& snapshot);

    std::map<std::string, AppTimeline> finish() &&;
    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<LifecycleEvent>& events() const { return events_; }
    /// Most recent record of every app ever seen.
    const std::map<std::string, AppRecord>& latest_records() const { return latest_; }

private:
    void record(const LifecycleEvent& event);

    std::vector<Date> dates_;
    std::set<std::string> present_;
    std::set<std::string> seen_;
    std::map<std::string, AppTimeline> timelines_;
    std::map<std::string, AppRecord> latest_;
    std::vector<LifecycleEvent> events_;
};

/// Throws InvalidOrder for unsorted input and EmptyInput for no snapshots.
std::map<std::string, AppTimeline> build_timelines(std::span<const Snapshot> snapshots);

struct IntervalSet {
    std::optional<long> update_to_removal;
    std::optional<long> release_to_removal;
    std::vector<long> removal_to_relaunch;
};

IntervalSet lifespan_intervals(const AppTimeline& timeline);

/// All events of all timelines sorted by (date, app_id).
std::vector<LifecycleEvent> collect_events(const std::map<std::string, AppTimeline>& timelines);

/// CSV `app_id,date,kind`, rows sorted by (date, app_id).
void write_event_log(std::ostream& out, std::span<const LifecycleEvent> events);

}  // namespace appwatch
