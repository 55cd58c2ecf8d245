#include <gem/pipeline.hpp>

#include <gem/metrics.hpp>
#include <gem/rng.hpp>

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace gem {

PreparedDataset prepare_dataset(const SynthDataset& ds, bool prune_fixpoint) {
    PreparedDataset out;
    out.window = ds.config.window();

    auto events = window_filter(ds.events, out.window);
    events = prune_isolated(events, prune_fixpoint);

    auto registry = ds.registry();
    out.graph = build_graph(events, registry);
    out.features = build_features(events, out.graph, out.window,
                                  ds.config.q > 0 ? &ds.demographics : nullptr,
                                  ds.config.q);

    std::set<std::string> test_ids(ds.test_accounts.begin(),
                                   ds.test_accounts.end());
    std::vector<std::pair<std::string, int>> train_raw, test_raw;
    for (const auto& [id, y] : ds.labels) {
        if (test_ids.count(id))
            test_raw.emplace_back(id, y);
        else
            train_raw.emplace_back(id, y);
    }
    out.train_labels = resolve_labels(train_raw, out.graph);
    out.test_labels = resolve_labels(test_raw, out.graph);
    return out;
}

namespace {

std::pair<std::vector<Scalar>, std::vector<int>> gather(
    const Vector& scores, const LabelSet& labels) {
    std::vector<Scalar> s;
    std::vector<int> y;
    s.reserve(labels.labels.size());
    for (const auto& [i, label] : labels.labels) {
        s.push_back(scores[i]);
        y.push_back(label);
    }
    return {std::move(s), std::move(y)};
}

MethodMetrics score_metrics(const Vector& scores, const LabelSet& labels,
                            Scalar threshold) {
    auto [s, y] = gather(scores, labels);
    MethodMetrics m;
    m.f1 = f1_at(s, y, threshold).f1;
    m.auc = auc(s, y);
    return m;
}

}  // namespace

MethodMetrics run_connected_subgraph(const PreparedDataset& data,
                                     const std::vector<Scalar>& theta_grid) {
    const int p = data.window.slots();
    auto ag = project(data.graph);
    Scalar theta = tune_theta(ag, data.features, p, data.train_labels,
                              theta_grid, TuneMetric::auc);
    auto cs = components(prune(ag, data.features, p, theta));
    Vector scores(data.graph.n_accounts());
    for (Index i = 0; i < data.graph.n_accounts(); ++i)
        scores[i] = cs.score(i);
    // size 1 means no surviving shared device; threshold between 1 and 2
    return score_metrics(scores, data.test_labels, 1.5);
}

MethodMetrics run_gcn(const PreparedDataset& data,
                      const BenchSettings& settings) {
    auto a_norm = normalized_adjacency(data.graph.full_adjacency());
    auto params0 = GcnParams::init(data.features.cols(), settings.embedding_dim,
                                   settings.depth,
                                   derive_seed(settings.train.seed, "gcn-init"));
    auto report = train_gcn(a_norm, data.features, data.graph.n_accounts(),
                            data.train_labels, params0, settings.train);
    auto fwd = gcn_forward(report.params, a_norm, data.features,
                           data.graph.n_accounts());
    return score_metrics(fwd.scores, data.test_labels, 0.5);
}

MethodMetrics run_gem(const PreparedDataset& data,
                      const BenchSettings& settings, AggregationMode mode,
                      GemParams* out_params) {
    auto params0 = GemParams::init(
        data.features.cols(), settings.embedding_dim,
        data.graph.registry.size(), mode,
        derive_seed(settings.train.seed,
                    mode == AggregationMode::attention ? "gem-att-init"
                                                       : "gem-init"));
    ForwardOptions opts;
    opts.depth = settings.depth;
    auto report = train_gem(data.graph, data.features, data.train_labels,
                            params0, opts, settings.train);
    if (out_params)
        *out_params = report.params;
    Vector scores = predict(report.params, data.graph, data.features,
                            settings.depth);
    return score_metrics(scores, data.test_labels, 0.5);
}

BenchResult run_bench(const SynthConfig& synth, const BenchSettings& settings,
                      std::vector<GemParams>* attention_models) {
    BenchResult result;
    if (attention_models)
        attention_models->clear();
    auto weeks = split_weeks(synth, settings.n_weeks);
    for (const auto& week : weeks) {
        auto data = prepare_dataset(week);
        std::map<std::string, MethodMetrics> row;
        row["ConnectedSubgraph"] =
            run_connected_subgraph(data, settings.theta_grid);
        row["GCN"] = run_gcn(data, settings);
        row["GEM"] = run_gem(data, settings, AggregationMode::mean);
        GemParams att;
        row["GEM-attention"] =
            run_gem(data, settings, AggregationMode::attention, &att);
        if (attention_models)
            attention_models->push_back(std::move(att));
        result.weeks.push_back(std::move(row));
    }
    return result;
}

std::string bench_table(const BenchResult& result) {
    static const char* kMethods[] = {"ConnectedSubgraph", "GCN", "GEM",
                                     "GEM-attention"};
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    auto emit = [&](const char* title, auto pick) {
        out << title << '\n';
        out << std::left << std::setw(20) << "method";
        for (std::size_t w = 0; w < result.weeks.size(); ++w)
            out << std::right << std::setw(10) << ("week " + std::to_string(w + 1));
        out << '\n';
        for (const char* method : kMethods) {
            out << std::left << std::setw(20) << method;
            for (const auto& week : result.weeks)
                out << std::right << std::setw(10) << pick(week.at(method));
            out << '\n';
        }
    };
    emit("F-1", [](const MethodMetrics& m) { return m.f1; });
    out << '\n';
    emit("AUC", [](const MethodMetrics& m) { return m.auc; });
    return out.str();
}

std::map<int, Scalar> depth_sweep(const SynthConfig& synth,
                                  const std::vector<int>& depths,
                                  const BenchSettings& settings) {
    for (int d : depths)
        if (d < 1 || d > 10)
            throw ConfigError("depths must lie in [1, 10]");
    auto data = prepare_dataset(generate(synth));
    std::map<int, Scalar> table;
    for (int d : depths) {
        BenchSettings s = settings;
        s.depth = d;
        table[d] = run_gem(data, s, AggregationMode::mean).f1;
    }
    return table;
}

}  // namespace gem
