#include <doctest.h>

#include <gem/subgraph.hpp>
#include <gem/synthgen.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

using namespace gem;

namespace {

SynthConfig small_config(std::uint64_t seed = 7) {
    SynthConfig c;
    c.seed = seed;
    c.n_normal = 200;
    c.n_gangs = 5;
    c.gang_size = 15;
    c.devices_per_type = 120;
    c.p = 168;
    return c;
}

std::map<std::string, int> label_map(const SynthDataset& d) {
    return {d.labels.begin(), d.labels.end()};
}

}  // namespace

TEST_CASE("dataset shape and label bookkeeping") {
    auto d = generate(small_config());
    CHECK(d.labels.size() == 200 + 5 * 15);
    // every event's account is labeled
    auto labels = label_map(d);
    for (const auto& e : d.events)
        CHECK(labels.count(e.account_id) == 1);
    // first event per account is a signup
    std::unordered_set<std::string> seen;
    for (const auto& e : d.events)
        if (seen.insert(e.account_id).second)
            CHECK(e.kind == EventKind::signup);
    // all timestamps inside the configured window
    auto w = d.config.window();
    for (const auto& e : d.events) {
        CHECK(e.timestamp >= w.start);
        CHECK(e.timestamp < w.end);
    }
    CHECK(!d.test_accounts.empty());
}

TEST_CASE("no gangs means no positive labels") {
    auto cfg = small_config();
    cfg.n_gangs = 0;
    auto d = generate(cfg);
    for (const auto& [id, y] : d.labels)
        CHECK(y == -1);
}

TEST_CASE("generation is a pure function of its config") {
    auto a = generate(small_config(11));
    auto b = generate(small_config(11));
    CHECK(a.events == b.events);
    CHECK(a.labels == b.labels);
    CHECK(a.test_accounts == b.test_accounts);

    auto c = generate(small_config(12));
    CHECK(a.events != c.events);
}

TEST_CASE("gangs surface as large connected components") {
    auto cfg = small_config(21);
    cfg.contamination_rate = 0.0;  // isolate the gang structure
    auto d = generate(cfg);
    auto g = build_graph(d.events, d.registry());
    auto labels = label_map(d);

    auto comp = components(project(g));
    for (const auto& [id, y] : labels) {
        auto v = g.index.find_account(id);
        if (!v)
            continue;
        if (y == 1)
            CHECK(comp.size[*v] >= 10);  // gang members clump together
    }
}

TEST_CASE("malicious devices aggregate many more accounts than benign ones") {
    auto d = generate(small_config(31));
    auto labels = label_map(d);
    // distinct accounts per (device, type) key, split by who touches it
    std::map<std::pair<std::string, int>, std::set<std::string>> users;
    for (const auto& e : d.events)
        users[{e.device_id, e.device_type}].insert(e.account_id);

    Scalar gang_sum = 0, gang_n = 0, normal_sum = 0, normal_n = 0;
    for (const auto& [key, accs] : users) {
        bool any_gang = std::any_of(accs.begin(), accs.end(),
                                    [&](const std::string& a) {
                                        return labels.at(a) == 1;
                                    });
        bool all_gang = std::all_of(accs.begin(), accs.end(),
                                    [&](const std::string& a) {
                                        return labels.at(a) == 1;
                                    });
        if (all_gang && any_gang) {
            gang_sum += accs.size();
            ++gang_n;
        } else if (!any_gang) {
            normal_sum += accs.size();
            ++normal_n;
        }
    }
    REQUIRE(gang_n > 0);
    REQUIRE(normal_n > 0);
    CHECK(gang_sum / gang_n >= 5.0 * (normal_sum / normal_n));
}

TEST_CASE("malicious activity is temporally concentrated") {
    auto d = generate(small_config(41));
    auto labels = label_map(d);
    // span of login timestamps per account, in seconds
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> span;
    std::map<std::string, int> n_logins;
    for (const auto& e : d.events) {
        if (e.kind != EventKind::login)
            continue;
        auto [it, fresh] =
            span.emplace(e.account_id, std::pair{e.timestamp, e.timestamp});
        if (!fresh) {
            it->second.first = std::min(it->second.first, e.timestamp);
            it->second.second = std::max(it->second.second, e.timestamp);
        }
        ++n_logins[e.account_id];
    }
    const std::int64_t burst = d.config.burst_window_hours * 3600;
    Scalar normal_sum = 0, normal_n = 0;
    for (const auto& [id, mm] : span) {
        std::int64_t width = mm.second - mm.first;
        if (labels.at(id) == 1) {
            CHECK(width <= burst);  // every gang account acts in one burst
        } else if (n_logins[id] >= 2) {
            normal_sum += static_cast<Scalar>(width);
            ++normal_n;
        }
    }
    REQUIRE(normal_n > 0);
    // ordinary activity spreads over days, not one burst window
    CHECK(normal_sum / normal_n > 2.0 * burst);
}

TEST_CASE("test accounts are exactly those registered in the last day") {
    auto d = generate(small_config(51));
    auto w = d.config.window();
    std::int64_t cutoff = w.end - 24 * 3600;
    std::map<std::string, std::int64_t> reg_time;
    for (const auto& e : d.events)
        if (e.kind == EventKind::signup)
            reg_time[e.account_id] = e.timestamp;
    std::set<std::string> expected;
    for (const auto& [id, t] : reg_time)
        if (t >= cutoff)
            expected.insert(id);
    CHECK(std::set<std::string>(d.test_accounts.begin(),
                                d.test_accounts.end()) == expected);
}

TEST_CASE("label noise flips roughly the requested fraction") {
    auto cfg = small_config(61);
    cfg.label_noise_fraction = 0.2;
    auto clean = generate(small_config(61));
    auto noisy = generate(cfg);
    REQUIRE(clean.labels.size() == noisy.labels.size());
    int flipped = 0;
    for (std::size_t i = 0; i < clean.labels.size(); ++i) {
        CHECK(clean.labels[i].first == noisy.labels[i].first);
        if (clean.labels[i].second != noisy.labels[i].second)
            ++flipped;
    }
    Scalar fraction = static_cast<Scalar>(flipped) / clean.labels.size();
    CHECK(fraction > 0.1);
    CHECK(fraction < 0.3);
}

TEST_CASE("noise types never host gang sharing") {
    auto cfg = small_config(71);
    cfg.noise_types = {4, 5};
    auto d = generate(cfg);
    auto signal = cfg.signal_types();
    CHECK(std::find(signal.begin(), signal.end(), 4) == signal.end());
    CHECK(std::find(signal.begin(), signal.end(), 5) == signal.end());
    // contamination defaults must dodge the noise types too
    for (int t : cfg.effective_contamination_types()) {
        CHECK(t != 4);
        CHECK(t != 5);
    }
}

TEST_CASE("impossible configurations are rejected") {
    auto cfg = small_config();
    cfg.n_normal = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.gang_size = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.burst_window_hours = cfg.p + 1;  // burst longer than the window
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.noise_types = {99};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.noise_types = {0, 1, 2, 3, 4, 5};  // nowhere left for gang devices
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("split_weeks yields disjoint, reproducible populations") {
    auto cfg = small_config(81);
    auto weeks1 = split_weeks(cfg, 3);
    auto weeks2 = split_weeks(cfg, 3);
    REQUIRE(weeks1.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(weeks1[i].events == weeks2[i].events);
        CHECK(weeks1[i].labels == weeks2[i].labels);
    }
    // account ids never collide across weeks
    std::set<std::string> all;
    std::size_t total = 0;
    for (const auto& w : weeks1) {
        for (const auto& [id, y] : w.labels)
            all.insert(id);
        total += w.labels.size();
    }
    CHECK(all.size() == total);
    // weeks are distinct draws, not copies
    CHECK(weeks1[0].events.size() != weeks1[1].events.size());
}

TEST_CASE("manifest records the headline counts") {
    auto d = generate(small_config(91));
    auto m = manifest_json(d);
    CHECK(m.find("\"n_normal\"") != std::string::npos);
    CHECK(m.find("\"n_gangs\"") != std::string::npos);
    CHECK(m.find("\"seed\"") != std::string::npos);
    CHECK(m.find("\"n_events\"") != std::string::npos);
}
