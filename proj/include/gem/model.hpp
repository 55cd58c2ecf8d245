#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gem/hetgraph.hpp>
#include <gem/types.hpp>

namespace gem {

enum class AggregationMode : std::uint8_t { mean, attention };

// identity activation is a test hook for the walk-counting semantics
enum class Activation : std::uint8_t { relu, identity };

struct ForwardOptions {
    int depth = 5;  // T, number of propagation layers
    Activation activation = Activation::relu;
    // divide each aggregated row by max(1, degree in A^(d)); off by default,
    // the faithful aggregator is the plain sum
    bool degree_scaled = false;
};

struct GemParams {
    Matrix W;               // P x k
    std::vector<Matrix> V;  // one k x k per device type
    Vector u;               // k
    Vector alpha;           // |D| attention logits, used in attention mode
    AggregationMode mode = AggregationMode::mean;

    Index feature_dim() const { return W.rows(); }
    Index embedding_dim() const { return W.cols(); }
    int n_types() const { return static_cast<int>(V.size()); }

    static GemParams init(Index P, Index k, int n_types, AggregationMode mode,
                          std::uint64_t seed);
};

struct GemGradients {
    Matrix W;
    std::vector<Matrix> V;
    Vector u;
    Vector alpha;  // zero in mean mode
};

// H[0..T] with H[0] = 0, and pre-activations Z[0..T-1] (layer t stores Z^(t+1))
struct EmbeddingTrace {
    std::vector<Matrix> H;
    std::vector<Matrix> Z;

    int depth() const { return static_cast<int>(Z.size()); }
    const Matrix& final_embedding() const { return H.back(); }
};

struct ForwardResult {
    EmbeddingTrace trace;
    Vector scores;  // per account, sigmoid(u . h_i)
};

// stable softmax over attention logits; sums to 1
Vector attention_weights(const Vector& alpha);

ForwardResult gem_forward(const GemParams& params, const HeteroGraph& graph,
                          const Matrix& X, const ForwardOptions& opts = {});

Scalar gem_loss(const GemParams& params, const EmbeddingTrace& trace,
                const LabelSet& labels);

GemGradients gem_backward(const GemParams& params, const EmbeddingTrace& trace,
                          const HeteroGraph& graph, const Matrix& X,
                          const LabelSet& labels,
                          const ForwardOptions& opts = {});

// ---- homogeneous GCN baseline ----

struct GcnParams {
    std::vector<Matrix> W;  // layer-specific: W[0] is P x k, the rest k x k
    Vector u;

    static GcnParams init(Index P, Index k, int depth, std::uint64_t seed);
};

struct GcnGradients {
    std::vector<Matrix> W;
    Vector u;
};

struct GcnTrace {
    std::vector<Matrix> H;  // H[0] = X
    std::vector<Matrix> Z;
};

struct GcnForwardResult {
    GcnTrace trace;
    Vector scores;
};

// D^{-1/2} (A + I) D^{-1/2}
SpMatrix normalized_adjacency(const SpMatrix& a);

GcnForwardResult gcn_forward(const GcnParams& params, const SpMatrix& a_norm,
                             const Matrix& X, Index n_accounts,
                             Activation activation = Activation::relu);

Scalar gcn_loss(const GcnParams& params, const GcnTrace& trace,
                const LabelSet& labels);

GcnGradients gcn_backward(const GcnParams& params, const GcnTrace& trace,
                          const SpMatrix& a_norm, const LabelSet& labels,
                          Activation activation = Activation::relu);

}  // namespace gem
