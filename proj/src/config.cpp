#include <gem/config.hpp>

#include <fstream>
#include <istream>
#include <sstream>

namespace gem {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos)
        return "";
    auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigMap parse_config(std::istream& in) {
    ConfigMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": empty key");
        map[key] = value;
    }
    return map;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

std::string ConfigReader::get_str(const std::string& key,
                                  const std::string& fallback) {
    consumed_[key] = true;
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
}

long ConfigReader::get_int(const std::string& key, long fallback) {
    consumed_[key] = true;
    auto it = map_.find(key);
    if (it == map_.end())
        return fallback;
    try {
        std::size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size())
            throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": bad integer \"" +
                          it->second + "\"");
    }
}

Scalar ConfigReader::get_real(const std::string& key, Scalar fallback) {
    consumed_[key] = true;
    auto it = map_.find(key);
    if (it == map_.end())
        return fallback;
    try {
        std::size_t pos = 0;
        Scalar v = std::stod(it->second, &pos);
        if (pos != it->second.size())
            throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": bad number \"" +
                          it->second + "\"");
    }
}

bool ConfigReader::get_bool(const std::string& key, bool fallback) {
    consumed_[key] = true;
    auto it = map_.find(key);
    if (it == map_.end())
        return fallback;
    if (it->second == "true" || it->second == "1")
        return true;
    if (it->second == "false" || it->second == "0")
        return false;
    throw ConfigError("config key " + key + ": bad boolean \"" + it->second +
                      "\"");
}

std::vector<int> ConfigReader::get_int_list(const std::string& key,
                                            std::vector<int> fallback) {
    consumed_[key] = true;
    auto it = map_.find(key);
    if (it == map_.end())
        return fallback;
    std::vector<int> out;
    std::stringstream ss(it->second);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (token.empty())
            continue;
        try {
            out.push_back(std::stoi(token));
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": bad list entry \"" +
                              token + "\"");
        }
    }
    return out;
}

void ConfigReader::check_consumed() const {
    for (const auto& [key, value] : map_)
        if (!consumed_.count(key))
            throw ConfigError("unknown config key: " + key);
}

SynthConfig synth_config_from(ConfigReader& reader) {
    SynthConfig c;
    c.seed = static_cast<std::uint64_t>(reader.get_int("seed", 42));
    c.n_normal = static_cast<int>(reader.get_int("n_normal", c.n_normal));
    c.n_gangs = static_cast<int>(reader.get_int("n_gangs", c.n_gangs));
    c.gang_size = static_cast<int>(reader.get_int("gang_size", c.gang_size));
    c.devices_per_type =
        static_cast<int>(reader.get_int("devices_per_type", c.devices_per_type));
    c.normal_devices_per_account = static_cast<int>(reader.get_int(
        "normal_devices_per_account", c.normal_devices_per_account));
    c.attacker_device_budget = static_cast<int>(
        reader.get_int("attacker_device_budget", c.attacker_device_budget));
    c.burst_window_hours = static_cast<int>(
        reader.get_int("burst_window_hours", c.burst_window_hours));
    c.normal_activity_rate =
        reader.get_real("normal_activity_rate", c.normal_activity_rate);
    c.malicious_burst_rate =
        reader.get_real("malicious_burst_rate", c.malicious_burst_rate);
    c.p = static_cast<int>(reader.get_int("p", c.p));
    c.q = static_cast<int>(reader.get_int("q", c.q));
    c.n_types = static_cast<int>(reader.get_int("n_types", c.n_types));
    c.label_noise_fraction =
        reader.get_real("label_noise_fraction", c.label_noise_fraction);
    c.contamination_rate =
        reader.get_real("contamination_rate", c.contamination_rate);
    c.contamination_types =
        reader.get_int_list("contamination_types", c.contamination_types);
    c.noise_types = reader.get_int_list("noise_types", c.noise_types);
    c.noise_devices_per_account = static_cast<int>(reader.get_int(
        "noise_devices_per_account", c.noise_devices_per_account));
    c.noise_pool_size =
        static_cast<int>(reader.get_int("noise_pool_size", c.noise_pool_size));
    c.window_start = reader.get_int("window_start", c.window_start);
    return c;
}

TrainConfig train_config_from(ConfigReader& reader) {
    TrainConfig c;
    c.epochs = static_cast<int>(reader.get_int("epochs", c.epochs));
    c.learning_rate = reader.get_real("learning_rate", c.learning_rate);
    std::string opt = reader.get_str("optimizer", "adam");
    if (opt == "adam")
        c.optimizer = Optimizer::adam;
    else if (opt == "sgd")
        c.optimizer = Optimizer::sgd;
    else
        throw ConfigError("optimizer must be adam or sgd");
    c.clip_norm = reader.get_real("clip_norm", c.clip_norm);
    c.seed = static_cast<std::uint64_t>(reader.get_int("seed", 42));
    c.validation_fraction =
        reader.get_real("validation_fraction", c.validation_fraction);
    c.early_stop_patience = static_cast<int>(
        reader.get_int("early_stop_patience", c.early_stop_patience));
    c.alternating = reader.get_bool("alternating", c.alternating);
    return c;
}

}  // namespace gem
