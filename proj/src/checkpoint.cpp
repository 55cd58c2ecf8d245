#include <gem/checkpoint.hpp>

#include <gem/detail/binary_io.hpp>

#include <cstring>
#include <fstream>

namespace gem {

using namespace detail;

namespace {

constexpr char kMagic[8] = {'G', 'E', 'M', 'C', 'K', 'P', 'T', '\x01'};

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    out.write(kMagic, 8);
    put_u64(out, static_cast<std::uint64_t>(ckpt.registry.size()));
    for (const auto& name : ckpt.registry.names())
        put_str(out, name);
    put_u64(out, static_cast<std::uint64_t>(ckpt.params.feature_dim()));
    put_u64(out, static_cast<std::uint64_t>(ckpt.params.embedding_dim()));
    put_u64(out, static_cast<std::uint64_t>(ckpt.depth));
    out.put(static_cast<char>(ckpt.params.mode));
    put_matrix(out, ckpt.params.W);
    for (const auto& v : ckpt.params.V)
        put_matrix(out, v);
    put_matrix(out, ckpt.params.u);
    put_matrix(out, ckpt.params.alpha);
}

Checkpoint load_checkpoint(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ParseError("not a checkpoint file (bad magic or version)");

    Checkpoint ckpt;
    auto n_types = get_u64(in);
    std::vector<std::string> names;
    names.reserve(n_types);
    for (std::uint64_t i = 0; i < n_types; ++i)
        names.push_back(get_str(in));
    ckpt.registry = DeviceTypeRegistry(std::move(names));

    get_u64(in);  // P, implied by W below
    get_u64(in);  // k
    ckpt.depth = static_cast<int>(get_u64(in));
    int mode = in.get();
    if (mode != 0 && mode != 1)
        throw ParseError("checkpoint has unknown aggregation mode");
    ckpt.params.mode = static_cast<AggregationMode>(mode);
    ckpt.params.W = get_matrix(in);
    ckpt.params.V.reserve(n_types);
    for (std::uint64_t d = 0; d < n_types; ++d)
        ckpt.params.V.push_back(get_matrix(in));
    ckpt.params.u = get_matrix(in).col(0);
    ckpt.params.alpha = get_matrix(in).col(0);
    return ckpt;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot open for writing: " + path);
    save_checkpoint(out, ckpt);
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open: " + path);
    return load_checkpoint(in);
}

void require_registry_match(const Checkpoint& ckpt,
                            const DeviceTypeRegistry& registry) {
    if (ckpt.registry.names() != registry.names())
        throw DimensionError(
            "checkpoint device type registry does not match the graph's");
}

}  // namespace gem
