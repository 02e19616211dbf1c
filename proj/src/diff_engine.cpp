#include "appwatch/diff_engine.hpp"

#include "appwatch/csv.hpp"
#include "appwatch/error.hpp"

#include <algorithm>
#include <ostream>

namespace appwatch {

std::string_view to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::Appeared: return "Appeared";
    case EventKind::Removed: return "Removed";
    case EventKind::Relaunched: return "Relaunched";
    }
    return "?";
}

EventKind parse_event_kind(std::string_view s)
{
    if (s == "Appeared") return EventKind::Appeared;
    if (s == "Removed") return EventKind::Removed;
    if (s == "Relaunched") return EventKind::Relaunched;
    throw Error(Errc::InvalidArgument, "unknown event kind '" + std::string(s) + "'");
}

bool AppTimeline::present_at(Date date) const
{
    bool present = false;
    for (const auto& e : events) {
        if (e.date > date) break;
        present = e.kind != EventKind::Removed;
    }
    return present;
}

std::optional<Date> AppTimeline::first_removal() const
{
    for (const auto& e : events) {
        if (e.kind == EventKind::Removed) return e.date;
    }
    return std::nullopt;
}

std::optional<Date> AppTimeline::last_present_since() const
{
    if (events.empty() || events.back().kind == EventKind::Removed) return std::nullopt;
    return events.back().date;
}

std::vector<LifecycleEvent> diff_snapshots(const Snapshot& prev, const Snapshot& curr,
                                           const std::set<std::string>& seen_before)
{
    if (!(prev.date < curr.date)) {
        throw Error(Errc::InvalidOrder, prev.date.iso() + " is not before " + curr.date.iso());
    }
    std::vector<LifecycleEvent> events;
    // Both maps are ordered, so a merge walk yields events sorted by app_id.
    auto p = prev.records.begin();
    auto c = curr.records.begin();
    while (p != prev.records.end() || c != curr.records.end()) {
        if (c == curr.records.end() || (p != prev.records.end() && p->first < c->first)) {
            events.push_back({p->first, curr.date, EventKind::Removed});
            ++p;
        } else if (p == prev.records.end() || c->first < p->first) {
            const bool known = seen_before.contains(c->first);
            events.push_back(
                {c->first, curr.date, known ? EventKind::Relaunched : EventKind::Appeared});
            ++c;
        } else {
            ++p;
            ++c;
        }
    }
    return events;
}

void TimelineBuilder::record(const LifecycleEvent& event)
{
    events_.push_back(event);
    timelines_[event.app_id].events.push_back(event);
}

void TimelineBuilder::add(const Snapshot& snapshot)
{
    if (!dates_.empty() && !(dates_.back() < snapshot.date)) {
        throw Error(Errc::InvalidOrder,
                    snapshot.date.iso() + " does not follow " + dates_.back().iso());
    }
    if (dates_.empty()) {
        for (const auto& [id, rec] : snapshot.records) {
            record({id, snapshot.date, EventKind::Appeared});
        }
    } else {
        // Apps absent from the latest snapshot still count as seen for relaunch purposes.
        Snapshot prev_ids{dates_.back(), {}};
        for (const auto& id : present_) prev_ids.records.emplace(id, AppRecord{});
        for (const auto& e : diff_snapshots(prev_ids, snapshot, seen_)) record(e);
    }

    present_.clear();
    for (const auto& [id, rec] : snapshot.records) {
        present_.insert(id);
        seen_.insert(id);
        latest_[id] = rec;
        AppTimeline& t = timelines_[id];
        if (t.app_id.empty()) t.first_seen = snapshot.date;
        t.app_id = id;
        t.release_date = rec.release_date;
        t.last_update_date = rec.update_date;
        t.category = rec.category;
        t.developer_name = rec.developer_name;
        t.last_seen = snapshot.date;
    }
    dates_.push_back(snapshot.date);
}

std::map<std::string, AppTimeline> TimelineBuilder::finish() &&
{
    return std::move(timelines_);
}

std::map<std::string, AppTimeline> build_timelines(std::span<const Snapshot> snapshots)
{
    if (snapshots.empty()) throw Error(Errc::EmptyInput, "no snapshots");
    TimelineBuilder builder;
    for (const auto& s : snapshots) builder.add(s);
    return std::move(builder).finish();
}

IntervalSet lifespan_intervals(const AppTimeline& timeline)
{
    IntervalSet out;
    if (auto removed = timeline.first_removal()) {
        out.update_to_removal = *removed - timeline.last_update_date;
        out.release_to_removal = *removed - timeline.release_date;
    }
    for (std::size_t i = 1; i < timeline.events.size(); ++i) {
        const auto& a = timeline.events[i - 1];
        const auto& b = timeline.events[i];
        if (a.kind == EventKind::Removed && b.kind == EventKind::Relaunched) {
            out.removal_to_relaunch.push_back(b.date - a.date);
        }
    }
    return out;
}

std::vector<LifecycleEvent> collect_events(const std::map<std::string, AppTimeline>& timelines)
{
    std::vector<LifecycleEvent> all;
    for (const auto& [id, t] : timelines) all.insert(all.end(), t.events.begin(), t.events.end());
    std::sort(all.begin(), all.end(), [](const LifecycleEvent& a, const LifecycleEvent& b) {
        return std::tie(a.date, a.app_id) < std::tie(b.date, b.app_id);
    });
    return all;
}

void write_event_log(std::ostream& out, std::span<const LifecycleEvent> events)
{
    std::vector<const LifecycleEvent*> sorted;
    sorted.reserve(events.size());
    for (const auto& e : events) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const LifecycleEvent* a, const LifecycleEvent* b) {
        return std::tie(a->date, a->app_id) < std::tie(b->date, b->app_id);
    });
    out << "app_id,date,kind\n";
    for (const auto* e : sorted) out << csv::field(e->app_id) << ',' << e->date.iso() << ',' << to_string(e->kind) << '\n';
}

}  // namespace appwatch
