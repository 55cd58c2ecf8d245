#pragma once

#include <map>
#include <string>
#include <vector>

#include <gem/graph_io.hpp>
#include <gem/hetgraph.hpp>
#include <gem/subgraph.hpp>
#include <gem/synthgen.hpp>
#include <gem/trainer.hpp>

namespace gem {

// a generated week turned into model inputs: windowed, pruned, built,
// featurized, with labels split into train (first six days) and test
// (accounts registered in the last day)
struct PreparedDataset {
    HeteroGraph graph;
    Matrix features;
    TimeWindow window;
    LabelSet train_labels;
    LabelSet test_labels;
};

PreparedDataset prepare_dataset(const SynthDataset& ds,
                                bool prune_fixpoint = false);

struct MethodMetrics {
    Scalar f1 = 0;
    Scalar auc = 0;
};

struct BenchSettings {
    int n_weeks = 4;
    Index embedding_dim = 16;
    int depth = 5;
    TrainConfig train;
    std::vector<Scalar> theta_grid = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};

    BenchSettings() {
        train.epochs = 60;
        train.learning_rate = 0.05;
        train.early_stop_patience = 15;
    }
};

// per-week rows of method -> metrics, method names fixed:
// ConnectedSubgraph, GCN, GEM, GEM-attention
struct BenchResult {
    std::vector<std::map<std::string, MethodMetrics>> weeks;
};

// when attention_models is non-null it receives the trained GEM-attention
// parameters, one entry per week, for checkpointing
BenchResult run_bench(const SynthConfig& synth, const BenchSettings& settings,
                      std::vector<GemParams>* attention_models = nullptr);

// fixed-precision text rendering, byte-stable across identical runs
std::string bench_table(const BenchResult& result);

// trains one GEM per depth with a shared seed; returns depth -> test F1
std::map<int, Scalar> depth_sweep(const SynthConfig& synth,
                                  const std::vector<int>& depths,
                                  const BenchSettings& settings);

// single-method runs used by bench and by the CLI
MethodMetrics run_connected_subgraph(const PreparedDataset& data,
                                     const std::vector<Scalar>& theta_grid);
MethodMetrics run_gcn(const PreparedDataset& data,
                      const BenchSettings& settings);
// returns trained parameters through *out_params when non-null
MethodMetrics run_gem(const PreparedDataset& data,
                      const BenchSettings& settings, AggregationMode mode,
                      GemParams* out_params = nullptr);

}  // namespace gem
