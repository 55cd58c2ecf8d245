#pragma once

#include <cstdint>
#include <vector>

#include <gem/hetgraph.hpp>
#include <gem/model.hpp>

namespace gem {

enum class Optimizer : std::uint8_t { sgd, adam };

struct TrainConfig {
    int epochs = 200;
    Scalar learning_rate = 0.01;
    Optimizer optimizer = Optimizer::adam;
    Scalar clip_norm = 5.0;  // global-norm gradient clip; <= 0 disables
    std::uint64_t seed = 0;
    Scalar validation_fraction = 0.2;
    int early_stop_patience = 20;
    // literal alternating variant: update only u while embeddings stay
    // fixed within an epoch pair; off by default (end-to-end backprop)
    bool alternating = false;

    void validate() const;  // ConfigError on bad values
};

struct EpochStats {
    Scalar train_loss = 0;
    Scalar val_auc = 0;
    double wall_seconds = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;  // index into epochs
    GemParams params;    // parameters at the best validation epoch
};

TrainReport train_gem(const HeteroGraph& graph, const Matrix& X,
                      const LabelSet& labels, const GemParams& params0,
                      const ForwardOptions& opts, const TrainConfig& config);

struct GcnTrainReport {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;
    GcnParams params;
};

GcnTrainReport train_gcn(const SpMatrix& a_norm, const Matrix& X,
                         Index n_accounts, const LabelSet& labels,
                         const GcnParams& params0, const TrainConfig& config);

// forward-only scoring; parameters are graph-independent so a later-window
// graph with the same feature layout is a valid input
Vector predict(const GemParams& params, const HeteroGraph& graph,
               const Matrix& X, int depth);

// deterministic train/validation split of labeled accounts
void split_labels(const LabelSet& labels, Scalar validation_fraction,
                  std::uint64_t seed, LabelSet& train, LabelSet& validation);

}  // namespace gem
