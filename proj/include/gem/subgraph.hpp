#pragma once

#include <map>
#include <vector>

#include <gem/hetgraph.hpp>
#include <gem/types.hpp>

namespace gem {

// undirected account-account graph; each pair stored once with i < j
struct AccountGraph {
    Index n_accounts = 0;
    std::vector<std::pair<Index, Index>> edges;
};

// component-size score per account
struct ComponentScore {
    std::vector<Index> size;  // indexed by account

    Scalar score(Index account) const {
        return static_cast<Scalar>(size.at(account));
    }
};

// links accounts sharing at least one device of any type
AccountGraph project(const HeteroGraph& graph);

// keeps edges whose activity inner product (first p feature coordinates)
// is >= theta
AccountGraph prune(const AccountGraph& ag, const Matrix& X, int p,
                   Scalar theta);

ComponentScore components(const AccountGraph& ag);

enum class TuneMetric { f1, auc };

Scalar tune_theta(const AccountGraph& ag, const Matrix& X, int p,
                  const LabelSet& labels, const std::vector<Scalar>& candidates,
                  TuneMetric metric);

}  // namespace gem
