#include <doctest.h>

#include <gem/metrics.hpp>
#include <gem/model.hpp>
#include <gem/rng.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace gem;

namespace {

// pair-enumeration oracle: concordant pairs + half credit for ties
Scalar auc_by_pairs(const std::vector<Scalar>& scores,
                    const std::vector<int>& labels) {
    Scalar wins = 0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1)
            continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != -1)
                continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / pairs;
}

}  // namespace

TEST_CASE("f1 hand case: one miss each way") {
    std::vector<Scalar> scores = {0.9, 0.8, 0.2, 0.7};
    std::vector<int> labels = {1, 1, 1, -1};
    auto r = f1_at(scores, labels);
    CHECK(r.precision == doctest::Approx(2.0 / 3));
    CHECK(r.recall == doctest::Approx(2.0 / 3));
    CHECK(r.f1 == doctest::Approx(2.0 / 3));
    CHECK(r.counts.tp == 2);
    CHECK(r.counts.fp == 1);
    CHECK(r.counts.fn == 1);
    CHECK(r.counts.tn == 0);
}

TEST_CASE("f1 is zero when nothing is predicted positive") {
    std::vector<Scalar> scores = {0.1, 0.2};
    std::vector<int> labels = {1, -1};
    auto r = f1_at(scores, labels);
    CHECK(r.f1 == 0.0);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
}

TEST_CASE("threshold boundary: score equal to threshold is positive") {
    std::vector<Scalar> scores = {0.5, 0.49};
    std::vector<int> labels = {1, -1};
    auto r = f1_at(scores, labels, 0.5);
    CHECK(r.counts.tp == 1);
    CHECK(r.counts.tn == 1);
    CHECK(r.f1 == 1.0);
}

TEST_CASE("perfect and inverted rankings bracket auc") {
    std::vector<Scalar> scores = {0.9, 0.8, 0.2, 0.1};
    std::vector<int> labels = {1, 1, -1, -1};
    CHECK(auc(scores, labels) == doctest::Approx(1.0));
    std::vector<int> flipped = {-1, -1, 1, 1};
    CHECK(auc(scores, flipped) == doctest::Approx(0.0));
}

TEST_CASE("all-equal scores give auc one half") {
    std::vector<Scalar> scores = {0.3, 0.3, 0.3, 0.3};
    std::vector<int> labels = {1, -1, 1, -1};
    CHECK(auc(scores, labels) == doctest::Approx(0.5));
}

TEST_CASE("auc matches the pair-enumeration oracle on small sets") {
    // fixed 3v3 case with a tie across classes
    std::vector<Scalar> scores = {0.9, 0.5, 0.3, 0.5, 0.2, 0.1};
    std::vector<int> labels = {1, 1, 1, -1, -1, -1};
    CHECK(auc(scores, labels) ==
          doctest::Approx(auc_by_pairs(scores, labels)).epsilon(1e-12));

    Rng rng(derive_seed(7, "auc-oracle"));
    std::uniform_int_distribution<int> n_dist(2, 30), coarse(0, 4);
    std::uniform_real_distribution<Scalar> unit(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        int n = n_dist(rng);
        std::vector<Scalar> s(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            // coarse grid forces frequent ties
            s[i] = coarse(rng) * 0.25;
            y[i] = unit(rng) < 0.5 ? 1 : -1;
        }
        // oracle requires both classes present
        y[0] = 1;
        y[n - 1] = -1;
        CHECK(auc(s, y) == doctest::Approx(auc_by_pairs(s, y)).epsilon(1e-12));
    }
}

TEST_CASE("auc is invariant under monotone score transforms") {
    Rng rng(8);
    std::uniform_real_distribution<Scalar> unit(0, 1);
    std::vector<Scalar> s(40);
    std::vector<int> y(40);
    for (int i = 0; i < 40; ++i) {
        s[i] = unit(rng);
        y[i] = i % 3 == 0 ? 1 : -1;
    }
    std::vector<Scalar> warped(40);
    for (int i = 0; i < 40; ++i)
        warped[i] = std::exp(3 * s[i]) - 0.5;
    CHECK(auc(warped, y) == doctest::Approx(auc(s, y)).epsilon(1e-12));
}

TEST_CASE("degenerate label sets are rejected") {
    std::vector<Scalar> scores = {0.1, 0.9};
    CHECK_THROWS_AS(auc(scores, {1, 1}), UsageError);
    CHECK_THROWS_AS(auc(scores, {-1, -1}), UsageError);
    CHECK_THROWS_AS(f1_at(scores, {1, 1}), UsageError);
    CHECK_THROWS_AS(auc(scores, {1}), DimensionError);     // length mismatch
    CHECK_THROWS_AS(auc({}, {}), UsageError);              // empty
    CHECK_THROWS_AS(f1_at(scores, {1, 2}), UsageError);    // bad label value
}

TEST_CASE("pr curve hand sweep") {
    std::vector<Scalar> scores = {0.9, 0.8, 0.7, 0.6, 0.5};
    std::vector<int> labels = {1, -1, 1, 1, -1};
    auto pts = pr_curve(scores, labels);
    REQUIRE(pts.size() == 5);
    // sweep order 0.9, 0.8, ...: (recall, precision)
    CHECK(pts[0].first == doctest::Approx(1.0 / 3));
    CHECK(pts[0].second == doctest::Approx(1.0));
    CHECK(pts[1].first == doctest::Approx(1.0 / 3));
    CHECK(pts[1].second == doctest::Approx(0.5));
    CHECK(pts[2].first == doctest::Approx(2.0 / 3));
    CHECK(pts[2].second == doctest::Approx(2.0 / 3));
    CHECK(pts[3].first == doctest::Approx(1.0));
    CHECK(pts[3].second == doctest::Approx(0.75));
    CHECK(pts[4].first == doctest::Approx(1.0));
    CHECK(pts[4].second == doctest::Approx(0.6));
}

TEST_CASE("tied scores flip as one block in the pr sweep") {
    std::vector<Scalar> scores = {0.7, 0.7, 0.7, 0.2};
    std::vector<int> labels = {1, 1, -1, -1};
    auto pts = pr_curve(scores, labels);
    REQUIRE(pts.size() == 2);  // two distinct scores, two points
    CHECK(pts[0].first == doctest::Approx(1.0));
    CHECK(pts[0].second == doctest::Approx(2.0 / 3));
}

TEST_CASE("first pr point has precision 1 when the top score is positive") {
    std::vector<Scalar> scores = {0.99, 0.4, 0.3};
    std::vector<int> labels = {1, -1, -1};
    auto pts = pr_curve(scores, labels);
    CHECK(pts.front().second == doctest::Approx(1.0));
    CHECK(pts.front().first == doctest::Approx(1.0));
}

TEST_CASE("a pr sweep point at threshold 0.5 agrees with f1_at") {
    Rng rng(9);
    std::uniform_real_distribution<Scalar> unit(0, 1);
    std::vector<Scalar> s(25);
    std::vector<int> y(25);
    for (int i = 0; i < 25; ++i) {
        s[i] = unit(rng);
        y[i] = unit(rng) < 0.4 ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    auto r = f1_at(s, y, 0.5);
    // the sweep point at the smallest score >= 0.5 makes the same predictions
    Scalar cut = 2.0;
    for (Scalar v : s)
        if (v >= 0.5)
            cut = std::min(cut, v);
    REQUIRE(cut < 2.0);
    bool found = false;
    for (auto [recall, precision] : pr_curve(s, y)) {
        if (std::abs(recall - r.recall) < 1e-12 &&
            std::abs(precision - r.precision) < 1e-12)
            found = true;
    }
    CHECK(found);
}

TEST_CASE("evaluate bundles the pieces and serializes to json") {
    std::vector<Scalar> scores = {0.9, 0.1};
    std::vector<int> labels = {1, -1};
    auto rep = evaluate(scores, labels);
    CHECK(rep.f1.f1 == 1.0);
    CHECK(rep.auc == 1.0);
    CHECK(rep.pr_points.size() == 2);
    auto json = metrics_to_json(rep);
    CHECK(json.find("\"auc\"") != std::string::npos);
    CHECK(json.find("\"f1\"") != std::string::npos);
    CHECK(json.find("\"pr_points\"") != std::string::npos);
}

TEST_CASE("attention report sorts types by weight") {
    auto reg = DeviceTypeRegistry::standard();
    auto p = GemParams::init(3, 2, reg.size(), AggregationMode::attention, 1);
    p.alpha = Vector::Zero(reg.size());
    p.alpha[2] = 1.0;   // MAC on top
    p.alpha[5] = 0.5;   // TID second
    auto rows = attention_report(p, reg);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].first == "MAC");
    CHECK(rows[1].first == "TID");
    Scalar total = 0;
    for (const auto& [name, w] : rows) {
        CHECK(w > 0.0);
        total += w;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);

    p.mode = AggregationMode::mean;
    CHECK_THROWS_AS(attention_report(p, reg), UsageError);
}
