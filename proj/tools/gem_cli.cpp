// command-line front end: synth, build, train, score, eval, baseline, bench

#include <gem/checkpoint.hpp>
#include <gem/config.hpp>
#include <gem/graph_io.hpp>
#include <gem/metrics.hpp>
#include <gem/pipeline.hpp>
#include <gem/rng.hpp>
#include <gem/synthgen.hpp>
#include <gem/trainer.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using namespace gem;

namespace {

constexpr const char* kVersion = "0.1.0";

using Clock = std::chrono::steady_clock;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open input file: " + path);
    return in;
}

// write-then-rename so partial output never lands under the final name
void write_text_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw UsageError("cannot write output file: " + path);
        out << content;
    }
    fs::rename(tmp, target);
}

struct ManifestInfo {
    std::string subcommand;
    ConfigMap config;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    Clock::time_point started = Clock::now();
};

void write_manifest(const ManifestInfo& info, const std::string& path) {
    nlohmann::json j;
    j["subcommand"] = info.subcommand;
    j["config"] = info.config;
    j["inputs"] = info.inputs;
    j["outputs"] = info.outputs;
    j["seed"] = info.seed;
    j["version"] = kVersion;
    j["wall_seconds"] =
        std::chrono::duration<double>(Clock::now() - info.started).count();
    write_text_atomic(path, j.dump(2) + "\n");
}

// flags > file > defaults: start from the file map, overlay explicit flags
ConfigMap resolve_config(const std::string& config_path,
                         const ConfigMap& flag_overrides) {
    ConfigMap map;
    if (!config_path.empty())
        map = load_config_file(config_path);
    for (const auto& [k, v] : flag_overrides)
        map[k] = v;
    return map;
}

DeviceTypeRegistry registry_from(int generic_types) {
    return generic_types > 0 ? DeviceTypeRegistry::generic(generic_types)
                             : DeviceTypeRegistry::standard();
}

EventFormat format_from(const std::string& name) {
    if (name == "csv")
        return EventFormat::csv;
    if (name == "jsonl")
        return EventFormat::jsonl;
    throw UsageError("unknown event format: " + name);
}

std::string format_score(Scalar s) {
    std::ostringstream out;
    out << std::setprecision(17) << s;
    return out.str();
}

// descending by score, ascending by id on ties: deterministic output order
std::string score_csv(std::vector<std::pair<std::string, Scalar>> rows,
                      long top_k) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    if (top_k > 0 && top_k < static_cast<long>(rows.size()))
        rows.resize(top_k);
    std::ostringstream out;
    out << "account_id,score\n";
    for (const auto& [id, s] : rows)
        out << id << ',' << format_score(s) << '\n';
    return out.str();
}

std::vector<std::pair<std::string, Scalar>> read_score_csv(
    const std::string& path) {
    auto in = open_input(path);
    std::vector<std::pair<std::string, Scalar>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        if (line_no == 1 && line == "account_id,score")
            continue;
        auto comma = line.rfind(',');
        if (comma == std::string::npos)
            throw ParseError(path + " line " + std::to_string(line_no) +
                             ": expected account_id,score");
        try {
            rows.emplace_back(line.substr(0, comma),
                              std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ParseError(path + " line " + std::to_string(line_no) +
                             ": bad score value");
        }
    }
    return rows;
}

std::vector<std::pair<std::string, int>> read_labels_file(
    const std::string& path) {
    auto in = open_input(path);
    return read_label_csv(in);
}

// ---- subcommand bodies ----------------------------------------------------

int cmd_synth(const std::string& config_path, const ConfigMap& overrides,
              const std::string& out_dir) {
    ManifestInfo info;
    info.subcommand = "synth";
    info.config = resolve_config(config_path, overrides);
    if (!config_path.empty())
        info.inputs.push_back(config_path);

    ConfigReader reader(info.config);
    SynthConfig synth = synth_config_from(reader);
    reader.check_consumed();
    info.seed = synth.seed;

    auto ds = generate(synth);
    auto registry = ds.registry();

    fs::create_directories(out_dir);
    std::ostringstream events;
    write_events(events, ds.events, EventFormat::csv, registry);
    write_text_atomic(out_dir + "/events.csv", events.str());
    std::ostringstream labels;
    write_label_csv(labels, ds.labels);
    write_text_atomic(out_dir + "/labels.csv", labels.str());
    std::ostringstream test_ids;
    for (const auto& id : ds.test_accounts)
        test_ids << id << '\n';
    write_text_atomic(out_dir + "/test_accounts.txt", test_ids.str());
    write_text_atomic(out_dir + "/manifest.json", manifest_json(ds) + "\n");

    info.outputs = {out_dir + "/events.csv", out_dir + "/labels.csv",
                    out_dir + "/test_accounts.txt", out_dir + "/manifest.json"};
    write_manifest(info, out_dir + "/run_manifest.json");
    std::cout << "wrote " << ds.events.size() << " events for "
              << ds.labels.size() << " accounts to " << out_dir << "\n";
    return 0;
}

int cmd_build(const std::string& events_path, const std::string& out_path,
              const std::string& format, int generic_types,
              std::int64_t window_start, long window_hours,
              bool prune_fixpoint, bool no_prune) {
    ManifestInfo info;
    info.subcommand = "build";
    info.inputs = {events_path};

    auto registry = registry_from(generic_types);
    auto in = open_input(events_path);
    auto events = parse_events(in, format_from(format), registry);

    GraphBundle bundle;
    bundle.window = TimeWindow(window_start,
                               window_start + window_hours * 3600);
    events = window_filter(events, bundle.window);
    if (!no_prune)
        events = prune_isolated(events, prune_fixpoint);
    bundle.graph = build_graph(events, registry);
    bundle.features = build_features(events, bundle.graph, bundle.window);

    save_graph_file(out_path, bundle);
    info.outputs = {out_path};

    const auto& g = bundle.graph;
    std::cout << "accounts " << g.n_accounts() << "\n"
              << "devices " << g.index.n_devices() << "\n";
    for (int d = 0; d < registry.size(); ++d)
        std::cout << "edges[" << registry.name(d) << "] " << g.edge_count(d)
                  << "\n";
    std::cout << "edges[total] " << g.edge_count() << "\n";
    write_manifest(info, out_path + ".manifest.json");
    return 0;
}

int cmd_train(const std::string& graph_path, const std::string& labels_path,
              const std::string& config_path, const ConfigMap& overrides,
              const std::string& mode_name, int depth, long dim,
              const std::string& out_path, const std::string& report_path) {
    ManifestInfo info;
    info.subcommand = "train";
    info.inputs = {graph_path, labels_path};
    info.config = resolve_config(config_path, overrides);
    if (!config_path.empty())
        info.inputs.push_back(config_path);

    ConfigReader reader(info.config);
    TrainConfig train_cfg = train_config_from(reader);
    reader.check_consumed();
    info.seed = train_cfg.seed;

    AggregationMode mode;
    if (mode_name == "mean")
        mode = AggregationMode::mean;
    else if (mode_name == "attention")
        mode = AggregationMode::attention;
    else
        throw UsageError("mode must be mean or attention");

    auto bundle = load_graph_file(graph_path);
    auto labels = resolve_labels(read_labels_file(labels_path), bundle.graph);

    auto params0 = GemParams::init(bundle.features.cols(), dim,
                                   bundle.graph.registry.size(), mode,
                                   derive_seed(train_cfg.seed, "gem-init"));
    ForwardOptions opts;
    opts.depth = depth;
    auto report = train_gem(bundle.graph, bundle.features, labels, params0,
                            opts, train_cfg);

    Checkpoint ckpt;
    ckpt.registry = bundle.graph.registry;
    ckpt.params = report.params;
    ckpt.depth = depth;
    save_checkpoint_file(out_path, ckpt);
    info.outputs = {out_path};

    const auto& best = report.epochs[report.best_epoch];
    std::cout << "epochs " << report.epochs.size() << "\n"
              << "best_epoch " << report.best_epoch << "\n"
              << "val_auc " << std::setprecision(6) << best.val_auc << "\n";

    nlohmann::json j;
    j["best_epoch"] = report.best_epoch;
    j["val_auc"] = best.val_auc;
    j["mode"] = mode_name;
    j["depth"] = depth;
    auto& epochs = j["epochs"] = nlohmann::json::array();
    for (const auto& e : report.epochs)
        epochs.push_back({{"train_loss", e.train_loss},
                          {"val_auc", e.val_auc},
                          {"wall_seconds", e.wall_seconds}});
    if (!report_path.empty()) {
        write_text_atomic(report_path, j.dump(2) + "\n");
        info.outputs.push_back(report_path);
    }
    write_manifest(info, out_path + ".manifest.json");

    if (mode == AggregationMode::attention) {
        std::cout << "attention weights:\n";
        for (const auto& [name, w] :
             attention_report(report.params, ckpt.registry))
            std::cout << "  " << name << " " << std::setprecision(4)
                      << std::fixed << w << "\n";
    }
    return 0;
}

int cmd_score(const std::string& ckpt_path, const std::string& graph_path,
              const std::string& out_path, long top_k) {
    ManifestInfo info;
    info.subcommand = "score";
    info.inputs = {ckpt_path, graph_path};

    auto ckpt = load_checkpoint_file(ckpt_path);
    auto bundle = load_graph_file(graph_path);
    require_registry_match(ckpt, bundle.graph.registry);

    Vector scores = predict(ckpt.params, bundle.graph, bundle.features,
                            ckpt.depth);
    std::vector<std::pair<std::string, Scalar>> rows;
    rows.reserve(bundle.graph.n_accounts());
    for (Index i = 0; i < bundle.graph.n_accounts(); ++i)
        rows.emplace_back(bundle.graph.index.account_id(i), scores[i]);
    write_text_atomic(out_path, score_csv(std::move(rows), top_k));
    info.outputs = {out_path};
    write_manifest(info, out_path + ".manifest.json");
    std::cout << "scored " << bundle.graph.n_accounts() << " accounts\n";
    return 0;
}

int cmd_eval(const std::string& scores_path, const std::string& labels_path,
             const std::string& out_path, const std::string& pr_path,
             Scalar threshold) {
    ManifestInfo info;
    info.subcommand = "eval";
    info.inputs = {scores_path, labels_path};

    auto scores = read_score_csv(scores_path);
    std::map<std::string, int> labels;
    for (const auto& [id, y] : read_labels_file(labels_path))
        labels[id] = y;

    std::vector<Scalar> s;
    std::vector<int> y;
    for (const auto& [id, score] : scores) {
        auto it = labels.find(id);
        if (it == labels.end())
            continue;  // scored but unlabeled accounts are ignored
        s.push_back(score);
        y.push_back(it->second);
    }
    auto report = evaluate(s, y, threshold);
    write_text_atomic(out_path, metrics_to_json(report) + "\n");
    info.outputs = {out_path};
    if (!pr_path.empty()) {
        std::ostringstream pr;
        pr << "recall,precision\n";
        for (const auto& [recall, precision] : report.pr_points)
            pr << format_score(recall) << ',' << format_score(precision)
               << '\n';
        write_text_atomic(pr_path, pr.str());
        info.outputs.push_back(pr_path);
    }
    write_manifest(info, out_path + ".manifest.json");
    std::cout << "f1 " << std::setprecision(6) << report.f1.f1 << "\n"
              << "auc " << report.auc << "\n";
    return 0;
}

int cmd_baseline(const std::string& graph_path, const std::string& labels_path,
                 const std::string& out_path, Scalar theta,
                 std::vector<Scalar> theta_grid, long top_k) {
    ManifestInfo info;
    info.subcommand = "baseline";
    info.inputs = {graph_path};

    auto bundle = load_graph_file(graph_path);
    const int p = bundle.window.slots();
    auto ag = project(bundle.graph);

    if (!theta_grid.empty()) {
        if (labels_path.empty())
            throw UsageError("theta grid tuning needs --labels");
        info.inputs.push_back(labels_path);
        auto labels =
            resolve_labels(read_labels_file(labels_path), bundle.graph);
        theta = tune_theta(ag, bundle.features, p, labels, theta_grid,
                           TuneMetric::auc);
    }
    auto cs = components(prune(ag, bundle.features, p, theta));

    std::vector<std::pair<std::string, Scalar>> rows;
    for (Index i = 0; i < bundle.graph.n_accounts(); ++i)
        rows.emplace_back(bundle.graph.index.account_id(i),
                          static_cast<Scalar>(cs.size[i]));
    write_text_atomic(out_path, score_csv(std::move(rows), top_k));
    info.outputs = {out_path};
    write_manifest(info, out_path + ".manifest.json");
    std::cout << "theta " << theta << "\n"
              << "scored " << bundle.graph.n_accounts() << " accounts\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const ConfigMap& overrides,
              const std::string& out_dir, int weeks, long dim, int depth) {
    ManifestInfo info;
    info.subcommand = "bench";
    info.config = resolve_config(config_path, overrides);
    if (!config_path.empty())
        info.inputs.push_back(config_path);

    ConfigReader reader(info.config);
    SynthConfig synth = synth_config_from(reader);
    BenchSettings settings;
    settings.n_weeks = weeks;
    settings.embedding_dim = dim;
    settings.depth = depth;
    settings.train.seed = synth.seed;
    settings.train.epochs = static_cast<int>(
        reader.get_int("epochs", settings.train.epochs));
    settings.train.learning_rate =
        reader.get_real("learning_rate", settings.train.learning_rate);
    reader.check_consumed();
    info.seed = synth.seed;

    std::vector<GemParams> attention_models;
    auto result = run_bench(synth, settings, &attention_models);
    std::string table = bench_table(result);
    std::cout << table;

    fs::create_directories(out_dir);
    write_text_atomic(out_dir + "/table.txt", table);
    info.outputs = {out_dir + "/table.txt"};
    auto registry = synth.n_types == 6 ? DeviceTypeRegistry::standard()
                                       : DeviceTypeRegistry::generic(
                                             synth.n_types);
    for (std::size_t w = 0; w < attention_models.size(); ++w) {
        Checkpoint ckpt;
        ckpt.registry = registry;
        ckpt.params = attention_models[w];
        ckpt.depth = settings.depth;
        std::string path =
            out_dir + "/week" + std::to_string(w + 1) + "_attention.ckpt";
        std::ostringstream buf;
        save_checkpoint(buf, ckpt);
        write_text_atomic(path, buf.str());
        info.outputs.push_back(path);
    }
    write_manifest(info, out_dir + "/run_manifest.json");
    return 0;
}

// collects --key value style overrides as config map entries when given
void add_override(CLI::App* app, ConfigMap& overrides, const std::string& flag,
                  const std::string& key, const std::string& help) {
    auto* opt = app->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides[key] = v; },
        help);
    opt->expected(1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"account-device graph modeling toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    int exit_code = 0;
    auto guard = [&exit_code](auto fn) {
        return [&exit_code, fn]() {
            try {
                exit_code = fn();
            } catch (const ConfigError& e) {
                std::cerr << "config error: " << e.what() << "\n";
                exit_code = 2;
            } catch (const UsageError& e) {
                std::cerr << "usage error: " << e.what() << "\n";
                exit_code = 2;
            } catch (const SchemaError& e) {
                std::cerr << "schema error: " << e.what() << "\n";
                exit_code = 2;
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                exit_code = 1;
            }
        };
    };

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_config, synth_out = "synth_out";
    ConfigMap synth_overrides;
    synth->add_option("--config", synth_config, "flat key=value config file");
    synth->add_option("--out", synth_out, "output directory");
    add_override(synth, synth_overrides, "--seed", "seed", "master seed");
    add_override(synth, synth_overrides, "--n-normal", "n_normal",
                 "benign account count");
    add_override(synth, synth_overrides, "--n-gangs", "n_gangs", "gang count");
    add_override(synth, synth_overrides, "--gang-size", "gang_size",
                 "accounts per gang");
    add_override(synth, synth_overrides, "--contamination-rate",
                 "contamination_rate", "benign devices per gang account");
    synth->callback(guard([&] {
        return cmd_synth(synth_config, synth_overrides, synth_out);
    }));

    // build
    auto* build = app.add_subcommand("build", "events -> graph bundle");
    std::string build_events, build_out = "graph.bin", build_format = "csv";
    int build_generic = 0;
    std::int64_t build_start = 0;
    long build_hours = 168;
    bool build_fixpoint = false, build_no_prune = false;
    build->add_option("--events", build_events, "event file")->required();
    build->add_option("--out", build_out, "graph bundle path");
    build->add_option("--format", build_format, "csv or jsonl");
    build->add_option("--generic-types", build_generic,
                      "use generic type names type0..typeN-1 (0 = standard)");
    build->add_option("--window-start", build_start, "window start (epoch s)");
    build->add_option("--window-hours", build_hours, "window length in hours");
    build->add_flag("--prune-fixpoint", build_fixpoint,
                    "iterate pruning to a fixpoint");
    build->add_flag("--no-prune", build_no_prune, "skip isolated-account prune");
    build->callback(guard([&] {
        return cmd_build(build_events, build_out, build_format, build_generic,
                         build_start, build_hours, build_fixpoint,
                         build_no_prune);
    }));

    // train
    auto* train = app.add_subcommand("train", "train a model on a graph");
    std::string train_graph, train_labels, train_config, train_mode = "mean";
    std::string train_out = "model.ckpt", train_report;
    int train_depth = 5;
    long train_dim = 16;
    ConfigMap train_overrides;
    train->add_option("--graph", train_graph, "graph bundle")->required();
    train->add_option("--labels", train_labels, "label csv")->required();
    train->add_option("--config", train_config, "training config file");
    train->add_option("--mode", train_mode, "mean or attention");
    train->add_option("--depth", train_depth, "propagation layers");
    train->add_option("--dim", train_dim, "embedding size");
    train->add_option("--out", train_out, "checkpoint path");
    train->add_option("--report", train_report, "training report json path");
    add_override(train, train_overrides, "--epochs", "epochs", "epoch budget");
    add_override(train, train_overrides, "--lr", "learning_rate",
                 "learning rate");
    add_override(train, train_overrides, "--optimizer", "optimizer",
                 "adam or sgd");
    add_override(train, train_overrides, "--seed", "seed", "training seed");
    train->callback(guard([&] {
        return cmd_train(train_graph, train_labels, train_config,
                         train_overrides, train_mode, train_depth, train_dim,
                         train_out, train_report);
    }));

    // score
    auto* score = app.add_subcommand("score", "score accounts of a graph");
    std::string score_ckpt, score_graph, score_out = "scores.csv";
    long score_top_k = 0;
    score->add_option("--checkpoint", score_ckpt, "model checkpoint")
        ->required();
    score->add_option("--graph", score_graph, "graph bundle")->required();
    score->add_option("--out", score_out, "output csv");
    score->add_option("--top-k", score_top_k, "keep only the top K rows");
    score->callback(guard([&] {
        return cmd_score(score_ckpt, score_graph, score_out, score_top_k);
    }));

    // eval
    auto* eval = app.add_subcommand("eval", "metrics from scores and labels");
    std::string eval_scores, eval_labels, eval_out = "metrics.json", eval_pr;
    Scalar eval_threshold = 0.5;
    eval->add_option("--scores", eval_scores, "score csv")->required();
    eval->add_option("--labels", eval_labels, "label csv")->required();
    eval->add_option("--out", eval_out, "metrics json path");
    eval->add_option("--pr-csv", eval_pr, "precision-recall csv path");
    eval->add_option("--threshold", eval_threshold, "F-1 threshold");
    eval->callback(guard([&] {
        return cmd_eval(eval_scores, eval_labels, eval_out, eval_pr,
                        eval_threshold);
    }));

    // baseline
    auto* baseline =
        app.add_subcommand("baseline", "connected-subgraph scores");
    std::string base_graph, base_labels, base_out = "baseline.csv";
    Scalar base_theta = 0.0;
    std::vector<Scalar> base_grid;
    long base_top_k = 0;
    baseline->add_option("--graph", base_graph, "graph bundle")->required();
    baseline->add_option("--labels", base_labels,
                         "label csv (needed for --theta-grid)");
    baseline->add_option("--theta", base_theta, "edge prune threshold");
    baseline->add_option("--theta-grid", base_grid,
                         "candidate thetas to tune over");
    baseline->add_option("--out", base_out, "output csv");
    baseline->add_option("--top-k", base_top_k, "keep only the top K rows");
    baseline->callback(guard([&] {
        return cmd_baseline(base_graph, base_labels, base_out, base_theta,
                            base_grid, base_top_k);
    }));

    // bench
    auto* bench =
        app.add_subcommand("bench", "full synth -> methods -> table pipeline");
    std::string bench_config, bench_out = "bench_out";
    int bench_weeks = 4, bench_depth = 5;
    long bench_dim = 16;
    ConfigMap bench_overrides;
    bench->add_option("--config", bench_config, "synth config file");
    bench->add_option("--out", bench_out, "output directory");
    bench->add_option("--weeks", bench_weeks, "number of weeks");
    bench->add_option("--dim", bench_dim, "embedding size");
    bench->add_option("--depth", bench_depth, "propagation layers");
    add_override(bench, bench_overrides, "--seed", "seed", "master seed");
    add_override(bench, bench_overrides, "--epochs", "epochs", "epoch budget");
    bench->callback(guard([&] {
        return cmd_bench(bench_config, bench_overrides, bench_out, bench_weeks,
                         bench_dim, bench_depth);
    }));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // bad flags are usage errors
    }
    return exit_code;
}
