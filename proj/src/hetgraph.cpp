#include <gem/hetgraph.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace gem {

VertexIndex::VertexIndex(std::vector<std::string> account_ids,
                         std::vector<std::pair<std::string, int>> devices)
    : account_ids_(std::move(account_ids)), devices_(std::move(devices)) {
    for (Index i = 0; i < static_cast<Index>(account_ids_.size()); ++i)
        account_lookup_.emplace(account_ids_[i], i);
    Index base = static_cast<Index>(account_ids_.size());
    for (Index i = 0; i < static_cast<Index>(devices_.size()); ++i)
        device_lookup_.emplace(devices_[i], base + i);
}

std::optional<Index> VertexIndex::find_account(const std::string& id) const {
    auto it = account_lookup_.find(id);
    if (it == account_lookup_.end())
        return std::nullopt;
    return it->second;
}

std::optional<Index> VertexIndex::find_device(const std::string& id,
                                              int type) const {
    auto it = device_lookup_.find({id, type});
    if (it == device_lookup_.end())
        return std::nullopt;
    return it->second;
}

Index HeteroGraph::edge_count() const {
    Index m = 0;
    for (int d = 0; d < registry.size(); ++d)
        m += edge_count(d);
    return m;
}

SpMatrix HeteroGraph::full_adjacency() const {
    SpMatrix a(n_vertices(), n_vertices());
    for (const auto& ad : adj)
        a += ad;
    // collapse any accumulated multiplicity back to 0/1; per-type edge sets
    // are disjoint so this is a no-op unless invariants were violated
    a = a.unaryExpr([](Scalar v) { return v != 0.0 ? 1.0 : 0.0; });
    return a;
}

HeteroGraph build_graph(const std::vector<Event>& events,
                        const DeviceTypeRegistry& registry) {
    // first-appearance order for accounts and devices keeps builds stable
    std::vector<std::string> accounts;
    std::unordered_map<std::string, Index> account_lookup;
    std::vector<std::pair<std::string, int>> devices;
    std::map<std::pair<std::string, int>, Index> device_lookup;

    for (const auto& e : events) {
        if (e.device_type < 0 || e.device_type >= registry.size())
            throw SchemaError("event device type index out of range");
        if (account_lookup.emplace(e.account_id, accounts.size()).second)
            accounts.push_back(e.account_id);
        std::pair<std::string, int> key{e.device_id, e.device_type};
        if (device_lookup.emplace(key, devices.size()).second)
            devices.push_back(key);
    }

    HeteroGraph g;
    g.registry = registry;
    g.index = VertexIndex(std::move(accounts), std::move(devices));

    Index n = g.index.n_vertices();
    std::vector<std::set<std::pair<Index, Index>>> edges(registry.size());
    for (const auto& e : events) {
        Index a = *g.index.find_account(e.account_id);
        Index v = *g.index.find_device(e.device_id, e.device_type);
        edges[e.device_type].insert({a, v});  // multiplicity collapsed here
    }

    g.adj.resize(registry.size());
    for (int d = 0; d < registry.size(); ++d) {
        std::vector<Eigen::Triplet<Scalar>> trips;
        trips.reserve(edges[d].size() * 2);
        for (const auto& [a, v] : edges[d]) {
            trips.emplace_back(a, v, 1.0);
            trips.emplace_back(v, a, 1.0);
        }
        g.adj[d].resize(n, n);
        g.adj[d].setFromTriplets(trips.begin(), trips.end());
    }
    return g;
}

Matrix build_features(const std::vector<Event>& events,
                      const HeteroGraph& graph, const TimeWindow& window,
                      const std::unordered_map<std::string, Vector>* demographics,
                      int q) {
    const int p = window.slots();
    const int n_types = graph.registry.size();
    const Index n = graph.n_vertices();
    Matrix x = Matrix::Zero(n, p + q + n_types);

    for (const auto& e : events) {
        if (!window.contains(e.timestamp))
            throw DimensionError("event timestamp outside feature window");
        auto a = graph.index.find_account(e.account_id);
        if (a)
            x(*a, window.slot_of(e.timestamp)) += 1.0;
    }

    if (demographics) {
        for (Index i = 0; i < graph.n_accounts(); ++i) {
            auto it = demographics->find(graph.index.account_id(i));
            if (it == demographics->end())
                continue;  // zero-filled when absent
            if (it->second.size() != q)
                throw DimensionError(
                    "demographics vector for " + graph.index.account_id(i) +
                    " has length " + std::to_string(it->second.size()) +
                    ", expected " + std::to_string(q));
            x.block(i, p, 1, q) = it->second.transpose();
        }
    }

    for (Index v = graph.n_accounts(); v < n; ++v)
        x(v, p + q + graph.index.device(v).second) = 1.0;
    return x;
}

Index degree(const HeteroGraph& graph, Index vertex, std::optional<int> type) {
    if (vertex < 0 || vertex >= graph.n_vertices())
        throw DimensionError("vertex index out of range: " +
                             std::to_string(vertex));
    auto count = [&](const SpMatrix& a) {
        Index c = 0;
        for (SpMatrix::InnerIterator it(a, vertex); it; ++it)
            ++c;
        return c;
    };
    if (type) {
        if (*type < 0 || *type >= graph.registry.size())
            throw DimensionError("device type index out of range");
        return count(graph.adj[*type]);
    }
    Index c = 0;
    for (const auto& a : graph.adj)
        c += count(a);
    return c;
}

LabelSet resolve_labels(const std::vector<std::pair<std::string, int>>& raw,
                        const HeteroGraph& graph) {
    LabelSet ls;
    for (const auto& [id, y] : raw) {
        if (y != 1 && y != -1)
            throw SchemaError("label for " + id + " must be -1 or 1");
        auto v = graph.index.find_account(id);
        if (v)
            ls.labels[*v] = y;
    }
    return ls;
}

std::vector<std::pair<std::string, int>> read_label_csv(std::istream& in) {
    std::vector<std::pair<std::string, int>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line == "account_id,label")
            continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("label line " + std::to_string(line_no) +
                             ": expected account_id,label");
        std::string id = line.substr(0, comma);
        int y = 0;
        try {
            y = std::stoi(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw ParseError("label line " + std::to_string(line_no) +
                             ": bad label value");
        }
        if (y != 1 && y != -1)
            throw SchemaError("label line " + std::to_string(line_no) +
                              ": label must be -1 or 1");
        out.emplace_back(std::move(id), y);
    }
    return out;
}

void write_label_csv(std::ostream& out,
                     const std::vector<std::pair<std::string, int>>& labels) {
    out << "account_id,label\n";
    for (const auto& [id, y] : labels)
        out << id << ',' << y << '\n';
}

namespace {

std::vector<Index> full_perm(const HeteroGraph& graph,
                             const std::vector<Index>& perm_accounts,
                             const std::vector<Index>& perm_devices) {
    Index na = graph.n_accounts();
    std::vector<Index> perm(graph.n_vertices());
    for (Index i = 0; i < na; ++i)
        perm[i] = perm_accounts.at(i);
    for (Index i = 0; i < graph.index.n_devices(); ++i)
        perm[na + i] = na + perm_devices.at(i);
    return perm;
}

}  // namespace

HeteroGraph permute_graph(const HeteroGraph& graph,
                          const std::vector<Index>& perm_accounts,
                          const std::vector<Index>& perm_devices) {
    Index na = graph.n_accounts();
    std::vector<std::string> accounts(na);
    for (Index i = 0; i < na; ++i)
        accounts[perm_accounts.at(i)] = graph.index.account_id(i);
    std::vector<std::pair<std::string, int>> devices(graph.index.n_devices());
    for (Index i = 0; i < graph.index.n_devices(); ++i)
        devices[perm_devices.at(i)] = graph.index.device(na + i);

    auto perm = full_perm(graph, perm_accounts, perm_devices);
    HeteroGraph out;
    out.registry = graph.registry;
    out.index = VertexIndex(std::move(accounts), std::move(devices));
    out.adj.resize(graph.adj.size());
    for (std::size_t d = 0; d < graph.adj.size(); ++d) {
        std::vector<Eigen::Triplet<Scalar>> trips;
        trips.reserve(graph.adj[d].nonZeros());
        for (Index k = 0; k < graph.adj[d].outerSize(); ++k)
            for (SpMatrix::InnerIterator it(graph.adj[d], k); it; ++it)
                trips.emplace_back(perm[it.row()], perm[it.col()], it.value());
        out.adj[d].resize(graph.n_vertices(), graph.n_vertices());
        out.adj[d].setFromTriplets(trips.begin(), trips.end());
    }
    return out;
}

Matrix permute_features(const Matrix& X, const HeteroGraph& graph,
                        const std::vector<Index>& perm_accounts,
                        const std::vector<Index>& perm_devices) {
    auto perm = full_perm(graph, perm_accounts, perm_devices);
    Matrix out(X.rows(), X.cols());
    for (Index i = 0; i < X.rows(); ++i)
        out.row(perm[i]) = X.row(i);
    return out;
}

}  // namespace gem
