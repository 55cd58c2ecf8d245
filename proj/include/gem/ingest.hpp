#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <gem/types.hpp>

namespace gem {

// ordered list of device-type names; the position of a name defines the
// type index d used by per-type adjacency, V_d and alpha_d
class DeviceTypeRegistry {
public:
    DeviceTypeRegistry() = default;
    explicit DeviceTypeRegistry(std::vector<std::string> names);

    static DeviceTypeRegistry standard();  // {UMID, PhoneNumber, MAC, APDID, IMSI, TID}
    static DeviceTypeRegistry generic(int n_types);  // {type0, type1, ...}

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int d) const { return names_.at(d); }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<int> find(const std::string& name) const;
    int require(const std::string& name) const;  // SchemaError if unknown

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

enum class EventKind : std::uint8_t { signup, login };

std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

struct Event {
    std::string account_id;
    std::string device_id;
    int device_type = 0;  // index into the registry
    EventKind kind = EventKind::login;
    std::int64_t timestamp = 0;  // seconds since epoch
};

bool operator==(const Event& a, const Event& b);

struct TimeWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::int64_t slot_width = 3600;

    // throws ConfigError on invalid bounds
    TimeWindow(std::int64_t start, std::int64_t end, std::int64_t slot_width = 3600);
    TimeWindow() = default;

    int slots() const { return static_cast<int>((end - start) / slot_width); }
    bool contains(std::int64_t t) const { return t >= start && t < end; }
    int slot_of(std::int64_t t) const {
        return static_cast<int>((t - start) / slot_width);
    }
};

enum class EventFormat { csv, jsonl };

std::vector<Event> parse_events(std::istream& in, EventFormat format,
                                const DeviceTypeRegistry& registry);

void write_events(std::ostream& out, const std::vector<Event>& events,
                  EventFormat format, const DeviceTypeRegistry& registry);

std::vector<Event> window_filter(const std::vector<Event>& events,
                                 const TimeWindow& window);

// drops every account whose devices are all unshared (single pass);
// fixpoint=true iterates until no account is removed
std::vector<Event> prune_isolated(const std::vector<Event>& events,
                                  bool fixpoint = false);

}  // namespace gem
