#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <gem/ingest.hpp>
#include <gem/types.hpp>

namespace gem {

// contiguous vertex numbering: accounts first [0, n_accounts), then devices;
// a device is keyed by (device_id, device_type)
class VertexIndex {
public:
    VertexIndex() = default;
    VertexIndex(std::vector<std::string> account_ids,
                std::vector<std::pair<std::string, int>> devices);

    Index n_accounts() const { return static_cast<Index>(account_ids_.size()); }
    Index n_devices() const { return static_cast<Index>(devices_.size()); }
    Index n_vertices() const { return n_accounts() + n_devices(); }

    const std::string& account_id(Index i) const { return account_ids_.at(i); }
    const std::pair<std::string, int>& device(Index i) const {
        return devices_.at(i - n_accounts());
    }
    const std::vector<std::string>& account_ids() const { return account_ids_; }

    std::optional<Index> find_account(const std::string& id) const;
    std::optional<Index> find_device(const std::string& id, int type) const;

    bool is_account(Index v) const { return v >= 0 && v < n_accounts(); }

private:
    std::vector<std::string> account_ids_;
    std::vector<std::pair<std::string, int>> devices_;
    std::unordered_map<std::string, Index> account_lookup_;
    std::map<std::pair<std::string, int>, Index> device_lookup_;
};

// bipartite account-device graph with one symmetric 0/1 adjacency per type
struct HeteroGraph {
    DeviceTypeRegistry registry;
    VertexIndex index;
    std::vector<SpMatrix> adj;  // one N x N structure per device type

    Index n_vertices() const { return index.n_vertices(); }
    Index n_accounts() const { return index.n_accounts(); }
    Index edge_count(int d) const {
        return static_cast<Index>(adj.at(d).nonZeros() / 2);
    }
    Index edge_count() const;
    SpMatrix full_adjacency() const;  // union over all types
};

HeteroGraph build_graph(const std::vector<Event>& events,
                        const DeviceTypeRegistry& registry);

// rows: [activity histogram (p) | demographics (q) | device one-hot (|D|)]
Matrix build_features(
    const std::vector<Event>& events, const HeteroGraph& graph,
    const TimeWindow& window,
    const std::unordered_map<std::string, Vector>* demographics = nullptr,
    int q = 0);

Index degree(const HeteroGraph& graph, Index vertex,
             std::optional<int> type = std::nullopt);

struct LabelSet {
    // account vertex index -> label in {-1, +1}, ordered for determinism
    std::map<Index, int> labels;

    std::size_t size() const { return labels.size(); }
};

// resolve account_id -> vertex labels against a graph; unknown accounts are
// skipped (pruning may have removed them)
LabelSet resolve_labels(const std::vector<std::pair<std::string, int>>& raw,
                        const HeteroGraph& graph);

std::vector<std::pair<std::string, int>> read_label_csv(std::istream& in);
void write_label_csv(std::ostream& out,
                     const std::vector<std::pair<std::string, int>>& labels);

// account/device block permutations for equivariance checks; perm_accounts[i]
// is the new position of account i, likewise for devices
HeteroGraph permute_graph(const HeteroGraph& graph,
                          const std::vector<Index>& perm_accounts,
                          const std::vector<Index>& perm_devices);
Matrix permute_features(const Matrix& X, const HeteroGraph& graph,
                        const std::vector<Index>& perm_accounts,
                        const std::vector<Index>& perm_devices);

}  // namespace gem
