#include <gem/trainer.hpp>

#include <gem/metrics.hpp>
#include <gem/rng.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace gem {

void TrainConfig::validate() const {
    if (epochs < 1)
        throw ConfigError("epochs must be >= 1");
    if (!(learning_rate > 0))
        throw ConfigError("learning rate must be positive");
    if (validation_fraction < 0 || validation_fraction >= 1)
        throw ConfigError("validation fraction must be in [0, 1)");
    if (early_stop_patience < 1)
        throw ConfigError("early stop patience must be >= 1");
}

void split_labels(const LabelSet& labels, Scalar validation_fraction,
                  std::uint64_t seed, LabelSet& train, LabelSet& validation) {
    std::vector<std::pair<Index, int>> items(labels.labels.begin(),
                                             labels.labels.end());
    Rng rng(derive_seed(seed, "label-split"));
    std::shuffle(items.begin(), items.end(), rng);
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(validation_fraction * static_cast<Scalar>(items.size())));
    train.labels.clear();
    validation.labels.clear();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i < n_val)
            validation.labels.insert(items[i]);
        else
            train.labels.insert(items[i]);
    }
    if (train.labels.empty())
        std::swap(train.labels, validation.labels);
}

namespace {

bool degenerate(const LabelSet& ls) {
    bool pos = false, neg = false;
    for (const auto& [i, y] : ls.labels)
        (y == 1 ? pos : neg) = true;
    return !(pos && neg);
}

Scalar auc_on(const Vector& scores, const LabelSet& ls) {
    std::vector<Scalar> s;
    std::vector<int> y;
    s.reserve(ls.labels.size());
    for (const auto& [i, label] : ls.labels) {
        s.push_back(scores[i]);
        y.push_back(label);
    }
    return auc(s, y);
}

// flatten parameter blocks into one vector so the optimizer is shared by
// both model families
Vector pack_gem(const GemParams& p) {
    Index n = p.W.size() + p.u.size() + p.alpha.size();
    for (const auto& v : p.V)
        n += v.size();
    Vector out(n);
    Index at = 0;
    auto put = [&](const Scalar* data, Index count) {
        out.segment(at, count) = Eigen::Map<const Vector>(data, count);
        at += count;
    };
    put(p.W.data(), p.W.size());
    for (const auto& v : p.V)
        put(v.data(), v.size());
    put(p.u.data(), p.u.size());
    put(p.alpha.data(), p.alpha.size());
    return out;
}

void unpack_gem(const Vector& flat, GemParams& p) {
    Index at = 0;
    auto take = [&](Scalar* data, Index count) {
        Eigen::Map<Vector>(data, count) = flat.segment(at, count);
        at += count;
    };
    take(p.W.data(), p.W.size());
    for (auto& v : p.V)
        take(v.data(), v.size());
    take(p.u.data(), p.u.size());
    take(p.alpha.data(), p.alpha.size());
}

Vector pack_gem_grad(const GemGradients& g) {
    GemParams tmp;
    tmp.W = g.W;
    tmp.V = g.V;
    tmp.u = g.u;
    tmp.alpha = g.alpha;
    return pack_gem(tmp);
}

Vector pack_gcn(const GcnParams& p) {
    Index n = p.u.size();
    for (const auto& w : p.W)
        n += w.size();
    Vector out(n);
    Index at = 0;
    for (const auto& w : p.W) {
        out.segment(at, w.size()) = Eigen::Map<const Vector>(w.data(), w.size());
        at += w.size();
    }
    out.segment(at, p.u.size()) = p.u;
    return out;
}

void unpack_gcn(const Vector& flat, GcnParams& p) {
    Index at = 0;
    for (auto& w : p.W) {
        Eigen::Map<Vector>(w.data(), w.size()) = flat.segment(at, w.size());
        at += w.size();
    }
    p.u = flat.segment(at, p.u.size());
}

class StepRule {
public:
    StepRule(const TrainConfig& config, Index n_params)
        : config_(config),
          m_(Vector::Zero(n_params)),
          v_(Vector::Zero(n_params)) {}

    Vector step(const Vector& grad) {
        Vector g = grad;
        if (config_.clip_norm > 0) {
            Scalar norm = g.norm();
            if (norm > config_.clip_norm)
                g *= config_.clip_norm / norm;
        }
        if (config_.optimizer == Optimizer::sgd)
            return -config_.learning_rate * g;
        ++t_;
        m_ = beta1_ * m_ + (1 - beta1_) * g;
        v_ = beta2_ * v_.array() + (1 - beta2_) * g.array().square();
        Scalar bc1 = 1 - std::pow(beta1_, t_);
        Scalar bc2 = 1 - std::pow(beta2_, t_);
        return (-config_.learning_rate * (m_ / bc1).array() /
                ((v_ / bc2).array().sqrt() + eps_))
            .matrix();
    }

private:
    static constexpr Scalar beta1_ = 0.9;
    static constexpr Scalar beta2_ = 0.999;
    static constexpr Scalar eps_ = 1e-8;
    const TrainConfig& config_;
    Vector m_;
    Vector v_;
    long t_ = 0;
};

}  // namespace

TrainReport train_gem(const HeteroGraph& graph, const Matrix& X,
                      const LabelSet& labels, const GemParams& params0,
                      const ForwardOptions& opts, const TrainConfig& config) {
    config.validate();
    if (labels.labels.empty())
        throw UsageError("training requires labels");

    LabelSet train_set, val_set;
    split_labels(labels, config.validation_fraction, config.seed, train_set,
                 val_set);
    const LabelSet& eval_set = degenerate(val_set) ? train_set : val_set;

    GemParams params = params0;
    StepRule rule(config, pack_gem(params).size());

    TrainReport report;
    report.params = params;
    Scalar best_auc = -1;
    int since_best = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        auto fwd = gem_forward(params, graph, X, opts);
        Scalar loss = gem_loss(params, fwd.trace, train_set);
        if (!std::isfinite(loss))
            throw NumericError("training diverged at epoch " +
                               std::to_string(epoch));
        auto grads = gem_backward(params, fwd.trace, graph, X, train_set, opts);
        if (config.alternating) {
            // literal e-step/m-step reading: embeddings fixed, only the
            // logistic head moves
            grads.W.setZero();
            for (auto& v : grads.V)
                v.setZero();
            grads.alpha.setZero();
        }
        Vector delta = rule.step(pack_gem_grad(grads));
        Vector flat_params = pack_gem(params) + delta;
        unpack_gem(flat_params, params);

        EpochStats stats;
        stats.train_loss = loss;
        stats.val_auc = auc_on(fwd.scores, eval_set);
        stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        report.epochs.push_back(stats);

        if (stats.val_auc > best_auc) {
            best_auc = stats.val_auc;
            report.best_epoch = epoch;
            report.params = params;
            since_best = 0;
        } else if (++since_best >= config.early_stop_patience) {
            break;
        }
    }
    return report;
}

GcnTrainReport train_gcn(const SpMatrix& a_norm, const Matrix& X,
                         Index n_accounts, const LabelSet& labels,
                         const GcnParams& params0, const TrainConfig& config) {
    config.validate();
    if (labels.labels.empty())
        throw UsageError("training requires labels");

    LabelSet train_set, val_set;
    split_labels(labels, config.validation_fraction, config.seed, train_set,
                 val_set);
    const LabelSet& eval_set = degenerate(val_set) ? train_set : val_set;

    GcnParams params = params0;
    StepRule rule(config, pack_gcn(params).size());

    GcnTrainReport report;
    report.params = params;
    Scalar best_auc = -1;
    int since_best = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        auto fwd = gcn_forward(params, a_norm, X, n_accounts);
        Scalar loss = gcn_loss(params, fwd.trace, train_set);
        if (!std::isfinite(loss))
            throw NumericError("training diverged at epoch " +
                               std::to_string(epoch));
        auto grads = gcn_backward(params, fwd.trace, a_norm, train_set);
        GcnParams gp;
        gp.W = grads.W;
        gp.u = grads.u;
        Vector delta = rule.step(pack_gcn(gp));
        Vector flat_params = pack_gcn(params) + delta;
        unpack_gcn(flat_params, params);

        EpochStats stats;
        stats.train_loss = loss;
        stats.val_auc = auc_on(fwd.scores, eval_set);
        stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        report.epochs.push_back(stats);

        if (stats.val_auc > best_auc) {
            best_auc = stats.val_auc;
            report.best_epoch = epoch;
            report.params = params;
            since_best = 0;
        } else if (++since_best >= config.early_stop_patience) {
            break;
        }
    }
    return report;
}

Vector predict(const GemParams& params, const HeteroGraph& graph,
               const Matrix& X, int depth) {
    ForwardOptions opts;
    opts.depth = depth;
    return gem_forward(params, graph, X, opts).scores;
}

}  // namespace gem
