#pragma once

#include <iosfwd>
#include <string>

#include <gem/ingest.hpp>
#include <gem/model.hpp>

namespace gem {

// model checkpoint: registry order, shapes, mode, depth, raw 64-bit params;
// loading validates the registry order against the caller's expectation
struct Checkpoint {
    DeviceTypeRegistry registry;
    GemParams params;
    int depth = 5;
};

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::istream& in);

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint_file(const std::string& path);

// DimensionError when the checkpoint registry does not match
void require_registry_match(const Checkpoint& ckpt,
                            const DeviceTypeRegistry& registry);

}  // namespace gem
