#include <gem/synthgen.hpp>

#include <gem/rng.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

namespace gem {

void SynthConfig::validate() const {
    if (n_normal < 0 || n_gangs < 0 || gang_size < 0)
        throw ConfigError("population counts must be >= 0");
    if (n_types < 1)
        throw ConfigError("need at least one device type");
    if (p < 1)
        throw ConfigError("p must be >= 1");
    if (q < 0)
        throw ConfigError("q must be >= 0");
    if (burst_window_hours < 1 || burst_window_hours > p)
        throw ConfigError("burst window must be in [1, p] hours");
    if (normal_activity_rate < 0 || malicious_burst_rate < 0)
        throw ConfigError("rates must be >= 0");
    if (devices_per_type < 1)
        throw ConfigError("device pool must be non-empty");
    if (n_gangs > 0 && gang_size > 0 && attacker_device_budget < 1)
        throw ConfigError("gangs need a positive device budget");
    if (label_noise_fraction < 0 || label_noise_fraction > 1)
        throw ConfigError("label noise fraction must be in [0, 1]");
    if (contamination_rate < 0)
        throw ConfigError("contamination rate must be >= 0");
    for (int t : contamination_types)
        if (t < 0 || t >= n_types)
            throw ConfigError("contamination type index out of range");
    for (int t : noise_types)
        if (t < 0 || t >= n_types)
            throw ConfigError("noise type index out of range");
    if (noise_devices_per_account < 0 || noise_pool_size < 0)
        throw ConfigError("noise device settings must be >= 0");
    if (signal_types().empty() && n_gangs > 0 && gang_size > 0)
        throw ConfigError("no device type left to carry the gang signal");
}

TimeWindow SynthConfig::window() const {
    return TimeWindow(window_start, window_start + static_cast<std::int64_t>(p) * 3600,
                      3600);
}

std::vector<int> SynthConfig::effective_contamination_types() const {
    if (!contamination_types.empty())
        return contamination_types;
    std::vector<int> out;
    std::set<int> noise(noise_types.begin(), noise_types.end());
    for (int t = n_types - 1; t >= 0 && static_cast<int>(out.size()) < 2; --t)
        if (!noise.count(t))
            out.push_back(t);
    return out;
}

std::vector<int> SynthConfig::signal_types() const {
    std::set<int> excluded(noise_types.begin(), noise_types.end());
    for (int t : effective_contamination_types())
        excluded.insert(t);
    std::vector<int> out;
    for (int t = 0; t < n_types; ++t)
        if (!excluded.count(t))
            out.push_back(t);
    if (out.empty()) {
        // contamination ate every type; fall back to all non-noise types
        std::set<int> noise(noise_types.begin(), noise_types.end());
        for (int t = 0; t < n_types; ++t)
            if (!noise.count(t))
                out.push_back(t);
    }
    return out;
}

DeviceTypeRegistry SynthDataset::registry() const {
    return config.n_types == 6 ? DeviceTypeRegistry::standard()
                               : DeviceTypeRegistry::generic(config.n_types);
}

namespace {

struct DeviceRef {
    std::string id;
    int type;
};

long poisson_at_least(Rng& rng, Scalar mean, long minimum) {
    if (mean <= 0)
        return minimum;
    std::poisson_distribution<long> dist(mean);
    return std::max(minimum, dist(rng));
}

}  // namespace

SynthDataset generate(const SynthConfig& config) {
    config.validate();

    SynthDataset ds;
    ds.config = config;
    const auto window = config.window();
    const std::int64_t day = 24 * 3600;
    const std::int64_t last_day_start = window.end - day;
    const auto contamination = config.effective_contamination_types();
    const auto signal = config.signal_types();
    std::set<int> noise(config.noise_types.begin(), config.noise_types.end());

    Rng rng(derive_seed(config.seed, "synth"));
    std::uniform_int_distribution<int> pool_pick(0, config.devices_per_type - 1);

    auto pool_device = [&](int type) {
        return DeviceRef{config.id_prefix + "n" + std::to_string(type) + "_" +
                             std::to_string(pool_pick(rng)),
                         type};
    };

    // non-noise types a normal account may draw structured devices from
    std::vector<int> normal_types;
    for (int t = 0; t < config.n_types; ++t)
        if (!noise.count(t))
            normal_types.push_back(t);
    if (normal_types.empty())
        normal_types = {0};

    auto emit_account = [&](const std::string& id, bool malicious,
                            const std::vector<DeviceRef>& devices) {
        std::int64_t reg_max = window.end - 3600;
        std::uniform_int_distribution<std::int64_t> reg_dist(window.start,
                                                             reg_max);
        std::int64_t reg = reg_dist(rng);
        if (reg >= last_day_start)
            ds.test_accounts.push_back(id);

        std::int64_t active_start = reg, active_end = window.end;
        Scalar rate = config.normal_activity_rate;
        if (malicious) {
            std::int64_t width =
                std::min<std::int64_t>(config.burst_window_hours * 3600,
                                       window.end - reg);
            std::uniform_int_distribution<std::int64_t> burst_dist(
                reg, window.end - width);
            active_start = burst_dist(rng);
            active_end = active_start + width;
            rate = config.malicious_burst_rate;
        }
        Scalar hours = static_cast<Scalar>(active_end - active_start) / 3600.0;
        long n_events = poisson_at_least(rng, rate * hours, 1);

        std::uniform_int_distribution<std::int64_t> time_dist(active_start,
                                                              active_end - 1);
        std::uniform_int_distribution<std::size_t> dev_dist(0,
                                                            devices.size() - 1);
        for (long e = 0; e < n_events; ++e) {
            const auto& dev = devices[dev_dist(rng)];
            Event ev;
            ev.account_id = id;
            ev.device_id = dev.id;
            ev.device_type = dev.type;
            // the signup marks the registration instant; logins follow
            // inside the active window
            ev.kind = e == 0 ? EventKind::signup : EventKind::login;
            ev.timestamp = e == 0 ? reg : time_dist(rng);
            ds.events.push_back(std::move(ev));
        }
    };

    std::uniform_real_distribution<Scalar> unit(0.0, 1.0);
    auto record_label = [&](const std::string& id, bool malicious) {
        int y = malicious ? 1 : -1;
        if (unit(rng) < config.label_noise_fraction)
            y = -y;
        ds.labels.emplace_back(id, y);
    };

    const int noise_pool = config.noise_pool_size > 0 ? config.noise_pool_size
                                                      : config.devices_per_type;
    std::uniform_int_distribution<int> noise_pick(0, noise_pool - 1);
    auto attach_noise_devices = [&](std::vector<DeviceRef>& devices) {
        for (int t : config.noise_types)
            for (int j = 0; j < config.noise_devices_per_account; ++j)
                devices.push_back(
                    {config.id_prefix + "n" + std::to_string(t) + "_" +
                         std::to_string(noise_pick(rng)),
                     t});
    };

    auto make_demographics = [&](const std::string& id) {
        if (config.q == 0)
            return;
        Rng drng(derive_seed(config.seed, "demo." + id));
        std::normal_distribution<Scalar> normal(0.0, 1.0);
        Vector v(config.q);
        for (int i = 0; i < config.q; ++i)
            v[i] = normal(drng);
        ds.demographics.emplace(id, std::move(v));
    };

    // normal population: devices drawn near-uniformly from large pools
    for (int a = 0; a < config.n_normal; ++a) {
        std::string id = config.id_prefix + "acct" + std::to_string(a);
        std::vector<DeviceRef> devices;
        std::uniform_int_distribution<std::size_t> type_pick(
            0, normal_types.size() - 1);
        for (int j = 0; j < config.normal_devices_per_account; ++j)
            devices.push_back(pool_device(normal_types[type_pick(rng)]));
        attach_noise_devices(devices);
        if (devices.empty())
            devices.push_back(pool_device(normal_types[0]));
        emit_account(id, false, devices);
        record_label(id, false);
        make_demographics(id);
    }

    // gangs: every member shares the gang's small device set
    for (int g = 0; g < config.n_gangs; ++g) {
        std::vector<DeviceRef> gang_devices;
        for (int j = 0; j < config.attacker_device_budget; ++j)
            gang_devices.push_back(
                {config.id_prefix + "gang" + std::to_string(g) + "_" +
                     std::to_string(j),
                 signal[j % signal.size()]});
        for (int m = 0; m < config.gang_size; ++m) {
            std::string id = config.id_prefix + "mal" + std::to_string(g) +
                             "_" + std::to_string(m);
            std::vector<DeviceRef> devices = gang_devices;
            if (!contamination.empty() && config.contamination_rate > 0) {
                std::poisson_distribution<int> extra(config.contamination_rate);
                int n_extra = std::min(extra(rng), 2);
                std::uniform_int_distribution<std::size_t> ct_pick(
                    0, contamination.size() - 1);
                for (int e = 0; e < n_extra; ++e)
                    devices.push_back(pool_device(contamination[ct_pick(rng)]));
            }
            attach_noise_devices(devices);
            emit_account(id, true, devices);
            record_label(id, true);
            make_demographics(id);
        }
    }
    return ds;
}

std::vector<SynthDataset> split_weeks(const SynthConfig& config, int n_weeks) {
    if (n_weeks < 1)
        throw ConfigError("n_weeks must be >= 1");
    std::vector<SynthDataset> weeks;
    weeks.reserve(n_weeks);
    for (int w = 0; w < n_weeks; ++w) {
        SynthConfig c = config;
        c.seed = derive_seed(config.seed, "week", static_cast<std::uint64_t>(w));
        c.id_prefix = config.id_prefix + "w" + std::to_string(w) + "_";
        weeks.push_back(generate(c));
    }
    return weeks;
}

std::string manifest_json(const SynthDataset& dataset) {
    const auto& c = dataset.config;
    nlohmann::json j;
    j["config"] = {{"seed", c.seed},
                   {"n_normal", c.n_normal},
                   {"n_gangs", c.n_gangs},
                   {"gang_size", c.gang_size},
                   {"devices_per_type", c.devices_per_type},
                   {"normal_devices_per_account", c.normal_devices_per_account},
                   {"attacker_device_budget", c.attacker_device_budget},
                   {"burst_window_hours", c.burst_window_hours},
                   {"normal_activity_rate", c.normal_activity_rate},
                   {"malicious_burst_rate", c.malicious_burst_rate},
                   {"p", c.p},
                   {"q", c.q},
                   {"n_types", c.n_types},
                   {"label_noise_fraction", c.label_noise_fraction},
                   {"contamination_rate", c.contamination_rate},
                   {"contamination_types", c.effective_contamination_types()},
                   {"noise_types", c.noise_types},
                   {"noise_devices_per_account", c.noise_devices_per_account},
                   {"noise_pool_size", c.noise_pool_size},
                   {"window_start", c.window_start},
                   {"id_prefix", c.id_prefix}};
    j["n_events"] = dataset.events.size();
    j["n_accounts"] = dataset.labels.size();
    j["n_test_accounts"] = dataset.test_accounts.size();
    return j.dump(2);
}

}  // namespace gem
