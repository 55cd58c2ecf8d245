#pragma once

#include <map>
#include <string>
#include <vector>

#include <gem/synthgen.hpp>
#include <gem/trainer.hpp>
#include <gem/types.hpp>

namespace gem {

// flat key = value text format, '#' comments; unknown keys are rejected at
// the typed conversion layer so typos fail loudly
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::istream& in);
ConfigMap load_config_file(const std::string& path);

class ConfigReader {
public:
    explicit ConfigReader(ConfigMap map) : map_(std::move(map)) {}

    bool has(const std::string& key) const { return map_.count(key) > 0; }
    std::string get_str(const std::string& key, const std::string& fallback);
    long get_int(const std::string& key, long fallback);
    Scalar get_real(const std::string& key, Scalar fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::vector<int> get_int_list(const std::string& key,
                                  std::vector<int> fallback);

    // ConfigError on keys that were present but never read
    void check_consumed() const;

private:
    ConfigMap map_;
    mutable std::map<std::string, bool> consumed_;
};

SynthConfig synth_config_from(ConfigReader& reader);
TrainConfig train_config_from(ConfigReader& reader);

}  // namespace gem
