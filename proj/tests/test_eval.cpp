#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "conflictlens/errors.hpp"
#include "conflictlens/eval.hpp"
#include "conflictlens/rng.hpp"

using namespace conflictlens;

namespace {

// Mann-Whitney pairwise statistic: mean over positive/negative pairs of
// [p_pos > p_neg] + 0.5 [p_pos == p_neg].
double mann_whitney(const std::vector<std::int8_t>& y, const std::vector<double>& p) {
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] != 0) continue;
            ++pairs;
            if (p[i] > p[j]) {
                total += 1.0;
            } else if (p[i] == p[j]) {
                total += 0.5;
            }
        }
    }
    return total / static_cast<double>(pairs);
}

// Average precision by exhaustive threshold enumeration.
double brute_force_ap(const std::vector<std::int8_t>& y, const std::vector<double>& p) {
    std::vector<double> thresholds = p;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    double n_pos = 0.0;
    for (auto v : y) n_pos += v == 1 ? 1.0 : 0.0;

    double ap = 0.0, prev_recall = 0.0;
    for (double t : thresholds) {
        double tp = 0.0, fp = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (p[i] >= t) (y[i] == 1 ? tp : fp) += 1.0;
        }
        const double recall = tp / n_pos;
        const double precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

}  // namespace

TEST_CASE("confusion matrix hand cases") {
    ConfusionMatrix cm = confusion({1, 0}, {0.9, 0.1}, 0.5);
    CHECK(cm.tp == 1);
    CHECK(cm.tn == 1);
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);

    cm = confusion({1, 0, 1}, {0.2, 0.9, 0.5}, 0.0);
    CHECK(cm.tn == 0);
    CHECK(cm.fn == 0);
    CHECK(cm.tp == 2);
    CHECK(cm.fp == 1);

    cm = confusion({1, 1, 0, 0, 0}, {0.6, 0.4, 0.55, 0.2, 0.1}, 0.5);
    CHECK(cm.tp == 1);
    CHECK(cm.fn == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.tn == 2);
    CHECK(cm.accuracy() == doctest::Approx(3.0 / 5.0));
    CHECK(cm.accuracy() ==
          doctest::Approx(1.0 - static_cast<double>(cm.fp + cm.fn) / 5.0));

    CHECK_THROWS_AS(confusion({1}, {0.5, 0.5}, 0.5), LengthMismatch);
}

TEST_CASE("threshold rule is inclusive") {
    const ConfusionMatrix cm = confusion({1}, {0.5}, 0.5);
    CHECK(cm.tp == 1);
}

TEST_CASE("precision/recall/f1 conventions") {
    PrfReport r = prf(confusion({1, 1, 0, 0}, {0.9, 0.8, 0.1, 0.2}, 0.5));
    CHECK(r.positive.precision == 1.0);
    CHECK(r.positive.recall == 1.0);
    CHECK(r.macro_f1 == 1.0);

    // tp=0, fp=0, fn=5: all conventions collapse to zero
    ConfusionMatrix zero;
    zero.fn = 5;
    r = prf(zero);
    CHECK(r.positive.precision == 0.0);
    CHECK(r.positive.recall == 0.0);
    CHECK(r.positive.f1 == 0.0);

    // tp=2, fp=1, fn=2 -> P=2/3, R=1/2, F1=4/7
    ConfusionMatrix hand;
    hand.tp = 2;
    hand.fp = 1;
    hand.fn = 2;
    hand.tn = 4;
    r = prf(hand);
    CHECK(r.positive.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.positive.recall == doctest::Approx(0.5));
    CHECK(r.positive.f1 == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("roc: separable, constant, and the pairwise oracle") {
    CHECK(roc_curve({0, 0, 1, 1}, {0.1, 0.2, 0.8, 0.9}).auc_positive == doctest::Approx(1.0));
    CHECK(roc_curve({0, 1, 0, 1}, {0.3, 0.3, 0.3, 0.3}).auc_positive == doctest::Approx(0.5));
    CHECK_THROWS_AS(roc_curve({1, 1}, {0.5, 0.6}), SingleClass);

    Rng rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(48);
        std::vector<std::int8_t> y(n);
        std::vector<double> p(n);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.bernoulli(0.4) ? 1 : 0;
            has_pos |= y[i] == 1;
            has_neg |= y[i] == 0;
            // quantized scores produce plenty of ties
            p[i] = static_cast<double>(rng.uniform_index(8)) / 7.0;
        }
        if (!has_pos) y[0] = 1;
        if (!has_neg) y[n - 1] = 0;

        const CurveResult roc = roc_curve(y, p);
        CHECK(std::abs(roc.auc_positive - mann_whitney(y, p)) <= 1e-12);
        // label flip + score reflection preserves the AUC
        CHECK(std::abs(roc.auc_negative - roc.auc_positive) <= 1e-12);
    }
}

TEST_CASE("roc endpoints and monotone parameterization") {
    const CurveResult roc = roc_curve({0, 1, 0, 1, 1}, {0.1, 0.9, 0.5, 0.5, 0.2});
    CHECK(roc.positive_points.front().x == 0.0);
    CHECK(roc.positive_points.front().y == 0.0);
    CHECK(roc.positive_points.back().x == 1.0);
    CHECK(roc.positive_points.back().y == 1.0);
    for (std::size_t i = 1; i < roc.positive_points.size(); ++i) {
        CHECK(roc.positive_points[i].x >= roc.positive_points[i - 1].x);
        CHECK(roc.positive_points[i].y >= roc.positive_points[i - 1].y);
    }
}

TEST_CASE("roc auc is invariant under strictly monotone score transforms") {
    Rng rng(73);
    std::vector<std::int8_t> y(60);
    std::vector<double> p(60), q(60);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.bernoulli(0.3) ? 1 : 0;
        p[i] = rng.uniform01();
        q[i] = 1.0 / (1.0 + std::exp(-(4.0 * p[i] - 2.0)));  // monotone
    }
    y[0] = 1;
    y[1] = 0;
    CHECK(roc_curve(y, p).auc_positive == doctest::Approx(roc_curve(y, q).auc_positive).epsilon(1e-12));
}

TEST_CASE("pr: perfect, constant-at-prevalence, and the exhaustive oracle") {
    CHECK(pr_curve({0, 0, 1, 1}, {0.1, 0.2, 0.8, 0.9}).auc_positive == doctest::Approx(1.0));

    // constant scorer: AP equals prevalence exactly
    std::vector<std::int8_t> y(200, 0);
    for (std::size_t i = 0; i < 12; ++i) y[i] = 1;  // prevalence 0.06
    std::vector<double> constant(y.size(), 0.42);
    CHECK(std::abs(pr_curve(y, constant).auc_positive - 0.06) <= 1e-12);

    const std::vector<std::int8_t> y5 = {1, 1, 0, 0, 0};
    const std::vector<double> p5 = {0.6, 0.4, 0.55, 0.2, 0.1};
    CHECK(pr_curve(y5, p5).auc_positive == doctest::Approx(brute_force_ap(y5, p5)).epsilon(1e-12));

    Rng rng(79);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int8_t> yy(30);
        std::vector<double> pp(30);
        for (std::size_t i = 0; i < yy.size(); ++i) {
            yy[i] = rng.bernoulli(0.3) ? 1 : 0;
            pp[i] = static_cast<double>(rng.uniform_index(5)) / 4.0;
        }
        yy[0] = 1;
        CHECK(pr_curve(yy, pp).auc_positive ==
              doctest::Approx(brute_force_ap(yy, pp)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(pr_curve({0, 0}, {0.5, 0.6}), NoPositives);
}

TEST_CASE("macro pr averages the two one-vs-rest average precisions") {
    const std::vector<std::int8_t> y = {1, 0, 1, 0, 0, 1};
    const std::vector<double> p = {0.9, 0.4, 0.6, 0.35, 0.2, 0.55};
    const CurveResult pr = pr_curve(y, p);
    std::vector<std::int8_t> flipped(y.size());
    std::vector<double> reflected(p.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        flipped[i] = y[i] == 1 ? 0 : 1;
        reflected[i] = 1.0 - p[i];
    }
    CHECK(pr.auc_negative == doctest::Approx(brute_force_ap(flipped, reflected)).epsilon(1e-12));
    CHECK(pr.auc_macro == doctest::Approx(0.5 * (pr.auc_positive + pr.auc_negative)));
}

TEST_CASE("threshold sweep: argmax dominates 0.5 and ties pick the lowest") {
    Rng rng(83);
    std::vector<std::int8_t> y(300);
    std::vector<double> p(300);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.bernoulli(0.08) ? 1 : 0;
        p[i] = std::clamp(0.08 + (y[i] == 1 ? 0.2 : 0.0) + 0.3 * rng.normal01(), 0.0, 1.0);
    }
    y[0] = 1;
    y[1] = 0;
    const ThresholdSweep sweep = optimize_threshold(y, p);
    const double at_half = prf(confusion(y, p, 0.5)).macro_f1;
    CHECK(sweep.best_macro_f1 >= at_half);
    CHECK(sweep.best_macro_f1 ==
          doctest::Approx(*std::max_element(sweep.macro_f1.begin(), sweep.macro_f1.end())));

    // perfectly separable: macro F1 of 1 at some threshold
    const ThresholdSweep perfect =
        optimize_threshold({0, 0, 1, 1}, {0.1, 0.2, 0.8, 0.9});
    CHECK(perfect.best_macro_f1 == doctest::Approx(1.0));

    // all-equal scores: every threshold ties; lowest wins
    const ThresholdSweep tied = optimize_threshold({1, 0}, {0.5, 0.5});
    CHECK(tied.best_threshold == 0.0);

    CHECK_THROWS_AS(optimize_threshold({1, 1}, {0.4, 0.6}), SingleClass);
}

TEST_CASE("macro f1 is symmetric under label flip with score reflection") {
    Rng rng(89);
    std::vector<std::int8_t> y(100);
    std::vector<double> p(100);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.bernoulli(0.25) ? 1 : 0;
        p[i] = rng.uniform01();
    }
    y[0] = 1;
    y[1] = 0;
    for (double t : {0.2, 0.5, 0.8}) {
        const PrfReport a = prf(confusion(y, p, t));
        std::vector<std::int8_t> flipped(y.size());
        std::vector<double> reflected(p.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            flipped[i] = y[i] == 1 ? 0 : 1;
            reflected[i] = 1.0 - p[i];
        }
        // p >= t maps to reflected <= 1-t; nextafter keeps the rule inclusive
        const PrfReport b = prf(confusion(
            flipped, reflected, std::nextafter(1.0 - t, 2.0)));
        CHECK(a.macro_f1 == doctest::Approx(b.macro_f1).epsilon(1e-12));
    }
}
