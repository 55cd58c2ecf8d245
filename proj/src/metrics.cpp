#include <gem/metrics.hpp>

#include <gem/model.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace gem {

namespace {

void check_labels(const std::vector<Scalar>& scores,
                  const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DimensionError("scores and labels differ in length");
    long pos = 0, neg = 0;
    for (int y : labels) {
        if (y == 1)
            ++pos;
        else if (y == -1)
            ++neg;
        else
            throw UsageError("labels must be -1 or 1");
    }
    if (pos == 0 || neg == 0)
        throw UsageError("metrics require at least one positive and one "
                         "negative label");
}

}  // namespace

F1Result f1_at(const std::vector<Scalar>& scores,
               const std::vector<int>& labels, Scalar threshold) {
    check_labels(scores, labels);
    F1Result r;
    r.threshold = threshold;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool pred_pos = scores[i] >= threshold;
        bool is_pos = labels[i] == 1;
        if (pred_pos && is_pos)
            ++r.counts.tp;
        else if (pred_pos)
            ++r.counts.fp;
        else if (is_pos)
            ++r.counts.fn;
        else
            ++r.counts.tn;
    }
    long pred = r.counts.tp + r.counts.fp;
    long actual = r.counts.tp + r.counts.fn;
    r.precision = pred > 0 ? static_cast<Scalar>(r.counts.tp) / pred : 0.0;
    r.recall = actual > 0 ? static_cast<Scalar>(r.counts.tp) / actual : 0.0;
    r.f1 = (r.precision + r.recall) > 0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

Scalar auc(const std::vector<Scalar>& scores, const std::vector<int>& labels) {
    check_labels(scores, labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average rank over tie groups
    std::vector<Scalar> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]])
            ++j;
        Scalar avg = (static_cast<Scalar>(i + 1) + static_cast<Scalar>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            rank[order[k]] = avg;
        i = j;
    }

    Scalar pos_rank_sum = 0;
    long n_pos = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] == 1) {
            pos_rank_sum += rank[k];
            ++n_pos;
        }
    long n_neg = static_cast<long>(n) - n_pos;
    Scalar u = pos_rank_sum - static_cast<Scalar>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<Scalar>(n_pos) * static_cast<Scalar>(n_neg));
}

std::vector<std::pair<Scalar, Scalar>> pr_curve(
    const std::vector<Scalar>& scores, const std::vector<int>& labels) {
    check_labels(scores, labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    long total_pos = 0;
    for (int y : labels)
        if (y == 1)
            ++total_pos;

    std::vector<std::pair<Scalar, Scalar>> points;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]])
            ++j;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1)
                ++tp;
            else
                ++fp;
        }
        points.emplace_back(static_cast<Scalar>(tp) / total_pos,
                            static_cast<Scalar>(tp) / (tp + fp));
        i = j;
    }
    return points;
}

MetricsReport evaluate(const std::vector<Scalar>& scores,
                       const std::vector<int>& labels, Scalar threshold) {
    MetricsReport r;
    r.f1 = f1_at(scores, labels, threshold);
    r.auc = auc(scores, labels);
    r.pr_points = pr_curve(scores, labels);
    return r;
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["f1"] = report.f1.f1;
    j["precision"] = report.f1.precision;
    j["recall"] = report.f1.recall;
    j["threshold"] = report.f1.threshold;
    j["auc"] = report.auc;
    j["counts"] = {{"tp", report.f1.counts.tp},
                   {"fp", report.f1.counts.fp},
                   {"fn", report.f1.counts.fn},
                   {"tn", report.f1.counts.tn}};
    nlohmann::json pr = nlohmann::json::array();
    for (const auto& [recall, precision] : report.pr_points)
        pr.push_back({recall, precision});
    j["pr_points"] = pr;
    return j.dump(2);
}

std::vector<std::pair<std::string, Scalar>> attention_report(
    const GemParams& params, const DeviceTypeRegistry& registry) {
    if (params.mode != AggregationMode::attention)
        throw UsageError("attention report requires attention-mode parameters");
    if (params.alpha.size() != registry.size())
        throw DimensionError("alpha length does not match registry size");
    Vector w = attention_weights(params.alpha);
    std::vector<std::pair<std::string, Scalar>> rows;
    rows.reserve(registry.size());
    for (int d = 0; d < registry.size(); ++d)
        rows.emplace_back(registry.name(d), w[d]);
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.second > b.second;
    });
    return rows;
}

}  // namespace gem
