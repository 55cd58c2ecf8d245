#include <gem/subgraph.hpp>

#include <gem/metrics.hpp>

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

namespace gem {

AccountGraph project(const HeteroGraph& graph) {
    AccountGraph ag;
    ag.n_accounts = graph.n_accounts();

    // accounts incident to each device, across all types
    std::set<std::pair<Index, Index>> edges;
    for (const auto& adj : graph.adj) {
        for (Index v = graph.n_accounts(); v < graph.n_vertices(); ++v) {
            std::vector<Index> accounts;
            for (SpMatrix::InnerIterator it(adj, v); it; ++it)
                accounts.push_back(it.row());
            // clique expansion; O(deg^2) on hub devices, exact by contract
            for (std::size_t a = 0; a < accounts.size(); ++a)
                for (std::size_t b = a + 1; b < accounts.size(); ++b) {
                    Index i = std::min(accounts[a], accounts[b]);
                    Index j = std::max(accounts[a], accounts[b]);
                    edges.insert({i, j});
                }
        }
    }
    ag.edges.assign(edges.begin(), edges.end());
    return ag;
}

AccountGraph prune(const AccountGraph& ag, const Matrix& X, int p,
                   Scalar theta) {
    if (p < 0 || p > X.cols())
        throw DimensionError("activity block width exceeds feature count");
    AccountGraph out;
    out.n_accounts = ag.n_accounts;
    const auto activity = X.leftCols(p);
    for (const auto& [i, j] : ag.edges)
        if (activity.row(i).dot(activity.row(j)) >= theta)
            out.edges.emplace_back(i, j);
    return out;
}

namespace {

class UnionFind {
public:
    explicit UnionFind(Index n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), Index{0});
    }

    Index find(Index x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (rank_[a] < rank_[b])
            std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b])
            ++rank_[a];
    }

private:
    std::vector<Index> parent_;
    std::vector<Index> rank_;
};

}  // namespace

ComponentScore components(const AccountGraph& ag) {
    UnionFind uf(ag.n_accounts);
    for (const auto& [i, j] : ag.edges)
        uf.unite(i, j);

    std::vector<Index> count(ag.n_accounts, 0);
    for (Index i = 0; i < ag.n_accounts; ++i)
        ++count[uf.find(i)];
    ComponentScore cs;
    cs.size.resize(ag.n_accounts);
    for (Index i = 0; i < ag.n_accounts; ++i)
        cs.size[i] = count[uf.find(i)];
    return cs;
}

Scalar tune_theta(const AccountGraph& ag, const Matrix& X, int p,
                  const LabelSet& labels, const std::vector<Scalar>& candidates,
                  TuneMetric metric) {
    if (candidates.empty())
        throw UsageError("tune_theta requires at least one candidate");
    if (labels.labels.empty())
        throw UsageError("tune_theta requires labels");

    std::vector<Scalar> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());

    Scalar best_theta = sorted.front();
    Scalar best_value = -1.0;
    for (Scalar theta : sorted) {
        auto cs = components(prune(ag, X, p, theta));
        std::vector<Scalar> scores;
        std::vector<int> ys;
        for (const auto& [account, y] : labels.labels) {
            scores.push_back(cs.score(account));
            ys.push_back(y);
        }
        // a component of size 1 means the account shares nothing; use a
        // threshold between 1 and 2 for the F-1 decision on raw sizes
        Scalar value = metric == TuneMetric::auc
                           ? auc(scores, ys)
                           : f1_at(scores, ys, 1.5).f1;
        if (value > best_value) {  // ties keep the smallest theta
            best_value = value;
            best_theta = theta;
        }
    }
    return best_theta;
}

}  // namespace gem
