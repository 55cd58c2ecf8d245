#include <gem/ingest.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace gem {

DeviceTypeRegistry::DeviceTypeRegistry(std::vector<std::string> names)
    : names_(std::move(names)) {
    if (names_.empty())
        throw ConfigError("device type registry must contain at least one type");
    for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
        if (names_[i].empty())
            throw ConfigError("device type name must be non-empty");
        if (!index_.emplace(names_[i], i).second)
            throw ConfigError("duplicate device type name: " + names_[i]);
    }
}

DeviceTypeRegistry DeviceTypeRegistry::standard() {
    return DeviceTypeRegistry(
        {"UMID", "PhoneNumber", "MAC", "APDID", "IMSI", "TID"});
}

DeviceTypeRegistry DeviceTypeRegistry::generic(int n_types) {
    std::vector<std::string> names;
    names.reserve(n_types);
    for (int i = 0; i < n_types; ++i)
        names.push_back("type" + std::to_string(i));
    return DeviceTypeRegistry(std::move(names));
}

std::optional<int> DeviceTypeRegistry::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

int DeviceTypeRegistry::require(const std::string& name) const {
    auto d = find(name);
    if (!d)
        throw SchemaError("unregistered device type: \"" + name + "\"");
    return *d;
}

std::string to_string(EventKind k) {
    return k == EventKind::signup ? "signup" : "login";
}

EventKind event_kind_from_string(const std::string& s) {
    if (s == "signup")
        return EventKind::signup;
    if (s == "login")
        return EventKind::login;
    throw SchemaError("unknown event kind: \"" + s + "\"");
}

bool operator==(const Event& a, const Event& b) {
    return a.account_id == b.account_id && a.device_id == b.device_id &&
           a.device_type == b.device_type && a.kind == b.kind &&
           a.timestamp == b.timestamp;
}

TimeWindow::TimeWindow(std::int64_t start_, std::int64_t end_,
                       std::int64_t slot_width_)
    : start(start_), end(end_), slot_width(slot_width_) {
    if (start >= end)
        throw ConfigError("time window start must precede end");
    if (slot_width <= 0)
        throw ConfigError("slot width must be positive");
    if ((end - start) % slot_width != 0)
        throw ConfigError("window length must be divisible by slot width");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

Event make_event(const std::string& account_id, const std::string& device_id,
                 const std::string& type_name, const std::string& kind,
                 std::int64_t timestamp, const DeviceTypeRegistry& registry,
                 std::size_t line_no) {
    if (account_id.empty() || device_id.empty())
        throw ParseError("line " + std::to_string(line_no) +
                         ": empty account_id or device_id");
    if (timestamp < 0)
        throw ParseError("line " + std::to_string(line_no) +
                         ": negative timestamp");
    Event e;
    e.account_id = account_id;
    e.device_id = device_id;
    e.device_type = registry.require(type_name);
    e.kind = event_kind_from_string(kind);
    e.timestamp = timestamp;
    return e;
}

std::int64_t parse_timestamp(const std::string& s, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        std::int64_t t = std::stoll(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return t;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": bad timestamp \"" + s + "\"");
    }
}

}  // namespace

std::vector<Event> parse_events(std::istream& in, EventFormat format,
                                const DeviceTypeRegistry& registry) {
    std::vector<Event> events;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (format == EventFormat::csv) {
            auto fields = split_csv_line(line);
            if (!header_seen) {
                header_seen = true;
                if (fields.size() >= 1 && fields[0] == "account_id")
                    continue;  // optional header row
            }
            if (fields.size() != 5)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": expected 5 fields, got " +
                                 std::to_string(fields.size()));
            events.push_back(make_event(fields[0], fields[1], fields[2],
                                        fields[3],
                                        parse_timestamp(fields[4], line_no),
                                        registry, line_no));
        } else {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError("line " + std::to_string(line_no) + ": " +
                                 e.what());
            }
            try {
                events.push_back(make_event(
                    obj.at("account_id").get<std::string>(),
                    obj.at("device_id").get<std::string>(),
                    obj.at("device_type").get<std::string>(),
                    obj.at("kind").get<std::string>(),
                    obj.at("timestamp").get<std::int64_t>(), registry, line_no));
            } catch (const nlohmann::json::exception& e) {
                throw ParseError("line " + std::to_string(line_no) + ": " +
                                 e.what());
            }
        }
    }
    return events;
}

void write_events(std::ostream& out, const std::vector<Event>& events,
                  EventFormat format, const DeviceTypeRegistry& registry) {
    if (format == EventFormat::csv) {
        out << "account_id,device_id,device_type,kind,timestamp\n";
        for (const auto& e : events)
            out << e.account_id << ',' << e.device_id << ','
                << registry.name(e.device_type) << ',' << to_string(e.kind)
                << ',' << e.timestamp << '\n';
    } else {
        for (const auto& e : events) {
            nlohmann::json obj{{"account_id", e.account_id},
                               {"device_id", e.device_id},
                               {"device_type", registry.name(e.device_type)},
                               {"kind", to_string(e.kind)},
                               {"timestamp", e.timestamp}};
            out << obj.dump() << '\n';
        }
    }
}

std::vector<Event> window_filter(const std::vector<Event>& events,
                                 const TimeWindow& window) {
    std::vector<Event> out;
    out.reserve(events.size());
    for (const auto& e : events)
        if (window.contains(e.timestamp))
            out.push_back(e);
    return out;
}

namespace {

// one pruning pass; returns true if any account was removed
bool prune_pass(std::vector<Event>& events) {
    // device key is (id, type)
    struct DeviceAccounts {
        std::unordered_set<std::string> accounts;
    };
    std::unordered_map<std::string, DeviceAccounts> devices;
    for (const auto& e : events)
        devices[e.device_id + "\x1f" + std::to_string(e.device_type)]
            .accounts.insert(e.account_id);

    std::unordered_set<std::string> keep;
    for (const auto& e : events) {
        auto key = e.device_id + "\x1f" + std::to_string(e.device_type);
        if (devices[key].accounts.size() > 1)
            keep.insert(e.account_id);
    }

    std::vector<Event> filtered;
    filtered.reserve(events.size());
    for (auto& e : events)
        if (keep.count(e.account_id))
            filtered.push_back(std::move(e));
    bool changed = filtered.size() != events.size();
    events = std::move(filtered);
    return changed;
}

}  // namespace

std::vector<Event> prune_isolated(const std::vector<Event>& events,
                                  bool fixpoint) {
    std::vector<Event> out = events;
    if (!fixpoint) {
        prune_pass(out);
    } else {
        while (prune_pass(out)) {
        }
    }
    return out;
}

}  // namespace gem
