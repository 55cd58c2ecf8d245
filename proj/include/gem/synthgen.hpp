#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <gem/ingest.hpp>
#include <gem/types.hpp>

namespace gem {

// generator for the two attacker patterns: gangs share a small device set
// (device aggregation) and act in one short burst (activity aggregation)
struct SynthConfig {
    std::uint64_t seed = 42;
    int n_normal = 5000;
    int n_gangs = 50;
    int gang_size = 20;
    int devices_per_type = 2000;  // benign pool size per type
    int normal_devices_per_account = 2;
    int attacker_device_budget = 2;  // shared devices per gang
    int burst_window_hours = 6;
    Scalar normal_activity_rate = 0.05;  // events/hour while active
    Scalar malicious_burst_rate = 2.0;   // events/hour inside the burst
    int p = 168;                         // hour slots in the window
    int q = 0;                           // demographic feature count
    int n_types = 6;
    Scalar label_noise_fraction = 0.0;
    // gang accounts also touch benign-pool devices of these types, which
    // entangles normal and malicious accounts; defaults to the last two types
    Scalar contamination_rate = 0.3;  // expected contaminating devices/account
    std::vector<int> contamination_types;
    // types with no group structure at all: every account draws devices of
    // these types uniformly at random
    std::vector<int> noise_types;
    int noise_devices_per_account = 1;
    int noise_pool_size = 0;  // 0 -> devices_per_type; small pools make the
                              // random wiring dense enough to mislead
    std::int64_t window_start = 0;
    std::string id_prefix;  // namespaces account/device ids across weeks

    void validate() const;  // ConfigError on impossible settings
    TimeWindow window() const;
    std::vector<int> effective_contamination_types() const;
    std::vector<int> signal_types() const;  // where gang devices live
};

struct SynthDataset {
    std::vector<Event> events;
    std::unordered_map<std::string, Vector> demographics;
    std::vector<std::pair<std::string, int>> labels;  // ground truth, +-1
    std::vector<std::string> test_accounts;  // registered in the last day
    SynthConfig config;

    DeviceTypeRegistry registry() const;
};

SynthDataset generate(const SynthConfig& config);

// independent per-week populations with derived sub-seeds and disjoint ids
std::vector<SynthDataset> split_weeks(const SynthConfig& config, int n_weeks);

std::string manifest_json(const SynthDataset& dataset);

}  // namespace gem
