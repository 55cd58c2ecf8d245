#pragma once

#include <string>
#include <utility>
#include <vector>

#include <gem/ingest.hpp>
#include <gem/types.hpp>

namespace gem {

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
};

struct F1Result {
    Scalar f1 = 0;
    Scalar precision = 0;
    Scalar recall = 0;
    Scalar threshold = 0.5;
    ConfusionCounts counts;
};

// labels are {-1, +1}; all metric entry points require at least one
// positive and one negative label (UsageError otherwise)

F1Result f1_at(const std::vector<Scalar>& scores,
               const std::vector<int>& labels, Scalar threshold = 0.5);

// rank-based AUC with average ranks for ties
Scalar auc(const std::vector<Scalar>& scores, const std::vector<int>& labels);

// threshold sweep at every distinct score, descending; tied scores flip as
// a block; points are (recall, precision)
std::vector<std::pair<Scalar, Scalar>> pr_curve(
    const std::vector<Scalar>& scores, const std::vector<int>& labels);

struct MetricsReport {
    F1Result f1;
    Scalar auc = 0;
    std::vector<std::pair<Scalar, Scalar>> pr_points;
};

MetricsReport evaluate(const std::vector<Scalar>& scores,
                       const std::vector<int>& labels,
                       Scalar threshold = 0.5);

std::string metrics_to_json(const MetricsReport& report);

// rows (device type name, softmax weight) sorted descending by weight;
// UsageError unless params are attention-mode
struct GemParams;
std::vector<std::pair<std::string, Scalar>> attention_report(
    const GemParams& params, const DeviceTypeRegistry& registry);

}  // namespace gem
