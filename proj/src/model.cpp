#include <gem/model.hpp>

#include <gem/rng.hpp>

#include <cmath>
#include <random>

namespace gem {

namespace {

Matrix glorot_uniform(Index rows, Index cols, Rng& rng) {
    Scalar s = std::sqrt(6.0 / static_cast<Scalar>(rows + cols));
    std::uniform_real_distribution<Scalar> dist(-s, s);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = dist(rng);
    return m;
}

Matrix activate(const Matrix& z, Activation act) {
    if (act == Activation::identity)
        return z;
    return z.cwiseMax(0.0);
}

// subgradient at 0 is 0
Matrix activate_grad(const Matrix& z, Activation act) {
    if (act == Activation::identity)
        return Matrix::Ones(z.rows(), z.cols());
    return (z.array() > 0.0).cast<Scalar>().matrix();
}

Scalar sigmoid(Scalar x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

Scalar softplus(Scalar x) {  // log(1 + exp(x)) without overflow
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void check_shapes(const GemParams& params, const HeteroGraph& graph,
                  const Matrix& X) {
    if (params.n_types() != graph.registry.size())
        throw DimensionError("parameter type count does not match graph");
    if (X.cols() != params.feature_dim())
        throw DimensionError("feature width " + std::to_string(X.cols()) +
                             " does not match W rows " +
                             std::to_string(params.feature_dim()));
    if (X.rows() != graph.n_vertices())
        throw DimensionError("feature rows do not match vertex count");
    Index k = params.embedding_dim();
    if (params.u.size() != k)
        throw DimensionError("u length does not match embedding size");
    for (const auto& v : params.V)
        if (v.rows() != k || v.cols() != k)
            throw DimensionError("V_d shape does not match embedding size");
    if (params.alpha.size() != params.n_types())
        throw DimensionError("alpha length does not match type count");
}

// per-type mixing weights and the global scale of the aggregation term
struct Mixing {
    Vector w;
    Scalar c;
};

Mixing mixing_of(const GemParams& params) {
    if (params.mode == AggregationMode::attention)
        return {attention_weights(params.alpha), 1.0};
    return {Vector::Ones(params.n_types()),
            1.0 / static_cast<Scalar>(params.n_types())};
}

// A^(d) H, optionally row-scaled by 1/max(1, deg_d)
Matrix aggregate(const SpMatrix& adj, const Matrix& h, bool degree_scaled) {
    Matrix out = adj * h;
    if (degree_scaled) {
        for (Index v = 0; v < adj.outerSize(); ++v) {
            Index deg = 0;
            for (SpMatrix::InnerIterator it(adj, v); it; ++it)
                ++deg;
            if (deg > 1)
                out.row(v) /= static_cast<Scalar>(deg);
        }
    }
    return out;
}

Vector account_scores(const Matrix& h_final, const Vector& u,
                      Index n_accounts) {
    Vector scores(n_accounts);
    for (Index i = 0; i < n_accounts; ++i)
        scores[i] = sigmoid(u.dot(h_final.row(i)));
    return scores;
}

void check_labelset(const LabelSet& labels, Index n_accounts) {
    if (labels.labels.empty())
        throw UsageError("empty label set");
    for (const auto& [i, y] : labels.labels) {
        if (i < 0 || i >= n_accounts)
            throw DimensionError("label index out of account range");
        if (y != 1 && y != -1)
            throw UsageError("labels must be -1 or 1");
    }
}

}  // namespace

GemParams GemParams::init(Index P, Index k, int n_types, AggregationMode mode,
                          std::uint64_t seed) {
    GemParams p;
    p.mode = mode;
    {
        Rng rng(derive_seed(seed, "gem.W"));
        p.W = glorot_uniform(P, k, rng);
    }
    p.V.reserve(n_types);
    for (int d = 0; d < n_types; ++d) {
        Rng rng(derive_seed(seed, "gem.V", static_cast<std::uint64_t>(d)));
        p.V.push_back(glorot_uniform(k, k, rng));
    }
    {
        Rng rng(derive_seed(seed, "gem.u"));
        p.u = glorot_uniform(k, 1, rng).col(0);
    }
    p.alpha = Vector::Zero(n_types);  // uniform attention at start
    return p;
}

Vector attention_weights(const Vector& alpha) {
    if (alpha.size() == 0)
        throw DimensionError("attention weights of empty alpha");
    Vector shifted = alpha.array() - alpha.maxCoeff();
    Vector e = shifted.array().exp();
    return e / e.sum();
}

ForwardResult gem_forward(const GemParams& params, const HeteroGraph& graph,
                          const Matrix& X, const ForwardOptions& opts) {
    if (opts.depth < 1)
        throw ConfigError("propagation depth must be >= 1");
    check_shapes(params, graph, X);

    const Index n = graph.n_vertices();
    const Index k = params.embedding_dim();
    const auto [w, c] = mixing_of(params);

    ForwardResult r;
    r.trace.H.reserve(opts.depth + 1);
    r.trace.Z.reserve(opts.depth);
    r.trace.H.push_back(Matrix::Zero(n, k));

    const Matrix xw = X * params.W;  // shared across layers
    for (int t = 1; t <= opts.depth; ++t) {
        Matrix z = xw;
        const Matrix& prev = r.trace.H.back();
        for (int d = 0; d < params.n_types(); ++d)
            z.noalias() += (c * w[d]) *
                           (aggregate(graph.adj[d], prev, opts.degree_scaled) *
                            params.V[d]);
        if (!z.allFinite())
            throw NumericError("non-finite values at layer " +
                               std::to_string(t));
        r.trace.Z.push_back(z);
        r.trace.H.push_back(activate(z, opts.activation));
    }

    r.scores = account_scores(r.trace.final_embedding(), params.u,
                              graph.n_accounts());
    return r;
}

Scalar gem_loss(const GemParams& params, const EmbeddingTrace& trace,
                const LabelSet& labels) {
    check_labelset(labels, trace.final_embedding().rows());
    const Matrix& h = trace.final_embedding();
    Scalar loss = 0;
    for (const auto& [i, y] : labels.labels) {
        Scalar margin = static_cast<Scalar>(y) * params.u.dot(h.row(i));
        loss += softplus(-margin);  // -log sigmoid(margin)
    }
    return loss;
}

GemGradients gem_backward(const GemParams& params, const EmbeddingTrace& trace,
                          const HeteroGraph& graph, const Matrix& X,
                          const LabelSet& labels, const ForwardOptions& opts) {
    check_shapes(params, graph, X);
    if (trace.depth() != opts.depth ||
        trace.final_embedding().rows() != graph.n_vertices() ||
        trace.final_embedding().cols() != params.embedding_dim())
        throw DimensionError("trace does not match params/graph");
    check_labelset(labels, graph.n_accounts());

    const Index n = graph.n_vertices();
    const Index k = params.embedding_dim();
    const int n_types = params.n_types();
    const auto [w, c] = mixing_of(params);

    GemGradients g;
    g.W = Matrix::Zero(params.W.rows(), k);
    g.V.assign(n_types, Matrix::Zero(k, k));
    g.u = Vector::Zero(k);
    g.alpha = Vector::Zero(n_types);

    // head: loss margins into dL/dH^(T) and du
    const Matrix& h_final = trace.final_embedding();
    Matrix grad_h = Matrix::Zero(n, k);
    for (const auto& [i, y] : labels.labels) {
        Scalar margin = static_cast<Scalar>(y) * params.u.dot(h_final.row(i));
        Scalar coeff = -static_cast<Scalar>(y) * sigmoid(-margin);
        g.u += coeff * h_final.row(i).transpose();
        grad_h.row(i) = coeff * params.u.transpose();
    }

    Vector grad_w_mix = Vector::Zero(n_types);  // d loss / d (c * w_d) carrier
    Matrix grad_z_sum = Matrix::Zero(n, k);     // for dW = X^T sum_t dZ^t

    for (int t = opts.depth; t >= 1; --t) {
        Matrix grad_z =
            grad_h.cwiseProduct(activate_grad(trace.Z[t - 1], opts.activation));
        grad_z_sum += grad_z;

        const Matrix& prev = trace.H[t - 1];
        Matrix grad_prev = Matrix::Zero(n, k);
        for (int d = 0; d < n_types; ++d) {
            Matrix agg = aggregate(graph.adj[d], prev, opts.degree_scaled);
            g.V[d].noalias() += (c * w[d]) * (agg.transpose() * grad_z);
            if (params.mode == AggregationMode::attention)
                grad_w_mix[d] +=
                    c * ((agg * params.V[d]).cwiseProduct(grad_z)).sum();
            Matrix back = grad_z * params.V[d].transpose();
            if (opts.degree_scaled) {
                // adjoint of D^{-1} A H is A D^{-1} (A symmetric): scale the
                // incoming gradient rows before propagating back
                for (Index v = 0; v < graph.adj[d].outerSize(); ++v) {
                    Index deg = 0;
                    for (SpMatrix::InnerIterator it(graph.adj[d], v); it; ++it)
                        ++deg;
                    if (deg > 1)
                        back.row(v) /= static_cast<Scalar>(deg);
                }
            }
            grad_prev.noalias() += (c * w[d]) * (graph.adj[d] * back);
        }
        grad_h = std::move(grad_prev);
    }

    g.W.noalias() = X.transpose() * grad_z_sum;

    if (params.mode == AggregationMode::attention) {
        // softmax jacobian: dalpha_i = w_i (g_i - sum_j w_j g_j)
        Scalar dot = w.dot(grad_w_mix);
        g.alpha = w.array() * (grad_w_mix.array() - dot);
    }
    return g;
}

// ---- GCN ----

GcnParams GcnParams::init(Index P, Index k, int depth, std::uint64_t seed) {
    if (depth < 1)
        throw ConfigError("GCN depth must be >= 1");
    GcnParams p;
    p.W.reserve(depth);
    for (int t = 0; t < depth; ++t) {
        Rng rng(derive_seed(seed, "gcn.W", static_cast<std::uint64_t>(t)));
        p.W.push_back(glorot_uniform(t == 0 ? P : k, k, rng));
    }
    Rng rng(derive_seed(seed, "gcn.u"));
    p.u = glorot_uniform(k, 1, rng).col(0);
    return p;
}

SpMatrix normalized_adjacency(const SpMatrix& a) {
    const Index n = a.rows();
    SpMatrix hat = a;
    SpMatrix eye(n, n);
    eye.setIdentity();
    hat += eye;

    Vector inv_sqrt_deg(n);
    for (Index v = 0; v < n; ++v) {
        Scalar deg = 0;
        for (SpMatrix::InnerIterator it(hat, v); it; ++it)
            deg += it.value();
        inv_sqrt_deg[v] = 1.0 / std::sqrt(deg);  // deg >= 1 via self-loop
    }

    for (Index v = 0; v < hat.outerSize(); ++v)
        for (SpMatrix::InnerIterator it(hat, v); it; ++it)
            it.valueRef() *= inv_sqrt_deg[it.row()] * inv_sqrt_deg[it.col()];
    return hat;
}

GcnForwardResult gcn_forward(const GcnParams& params, const SpMatrix& a_norm,
                             const Matrix& X, Index n_accounts,
                             Activation activation) {
    if (params.W.empty())
        throw ConfigError("GCN needs at least one layer");
    if (X.cols() != params.W[0].rows())
        throw DimensionError("feature width does not match first GCN layer");
    if (X.rows() != a_norm.rows())
        throw DimensionError("feature rows do not match adjacency");

    GcnForwardResult r;
    r.trace.H.push_back(X);
    for (std::size_t t = 0; t < params.W.size(); ++t) {
        Matrix z = a_norm * (r.trace.H.back() * params.W[t]);
        if (!z.allFinite())
            throw NumericError("non-finite values at GCN layer " +
                               std::to_string(t + 1));
        r.trace.Z.push_back(z);
        r.trace.H.push_back(activate(z, activation));
    }
    r.scores = account_scores(r.trace.H.back(), params.u, n_accounts);
    return r;
}

Scalar gcn_loss(const GcnParams& params, const GcnTrace& trace,
                const LabelSet& labels) {
    check_labelset(labels, trace.H.back().rows());
    const Matrix& h = trace.H.back();
    Scalar loss = 0;
    for (const auto& [i, y] : labels.labels) {
        Scalar margin = static_cast<Scalar>(y) * params.u.dot(h.row(i));
        loss += softplus(-margin);
    }
    return loss;
}

GcnGradients gcn_backward(const GcnParams& params, const GcnTrace& trace,
                          const SpMatrix& a_norm, const LabelSet& labels,
                          Activation activation) {
    const int depth = static_cast<int>(params.W.size());
    if (static_cast<int>(trace.Z.size()) != depth)
        throw DimensionError("trace does not match GCN params");
    const Matrix& h_final = trace.H.back();
    check_labelset(labels, h_final.rows());

    GcnGradients g;
    g.W.reserve(depth);
    for (const auto& w : params.W)
        g.W.push_back(Matrix::Zero(w.rows(), w.cols()));
    g.u = Vector::Zero(params.u.size());

    Matrix grad_h = Matrix::Zero(h_final.rows(), h_final.cols());
    for (const auto& [i, y] : labels.labels) {
        Scalar margin = static_cast<Scalar>(y) * params.u.dot(h_final.row(i));
        Scalar coeff = -static_cast<Scalar>(y) * sigmoid(-margin);
        g.u += coeff * h_final.row(i).transpose();
        grad_h.row(i) = coeff * params.u.transpose();
    }

    for (int t = depth; t >= 1; --t) {
        Matrix grad_z =
            grad_h.cwiseProduct(activate_grad(trace.Z[t - 1], activation));
        Matrix propagated = a_norm * grad_z;  // a_norm is symmetric
        g.W[t - 1].noalias() = trace.H[t - 1].transpose() * propagated;
        if (t > 1)
            grad_h.noalias() = propagated * params.W[t - 1].transpose();
    }
    return g;
}

}  // namespace gem
