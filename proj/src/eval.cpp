#include "conflictlens/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "conflictlens/errors.hpp"

namespace conflictlens {

double ConfusionMatrix::accuracy() const {
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

ConfusionMatrix confusion(const std::vector<std::int8_t>& y, const std::vector<double>& p,
                          double threshold) {
    if (y.size() != p.size()) throw LengthMismatch("labels and scores differ in length");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const bool predicted = p[i] >= threshold;
        const bool actual = y[i] == 1;
        if (predicted && actual) {
            ++cm.tp;
        } else if (predicted && !actual) {
            ++cm.fp;
        } else if (!predicted && actual) {
            ++cm.fn;
        } else {
            ++cm.tn;
        }
    }
    return cm;
}

namespace {

ClassMetrics metrics_from(std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassMetrics m;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

}  // namespace

PrfReport prf(const ConfusionMatrix& cm) {
    PrfReport r;
    r.positive = metrics_from(cm.tp, cm.fp, cm.fn);
    r.negative = metrics_from(cm.tn, cm.fn, cm.fp);  // roles swapped
    r.macro_f1 = 0.5 * (r.positive.f1 + r.negative.f1);
    return r;
}

namespace {

// Cumulative (tp, fp) at each distinct score, descending.
struct RankedCounts {
    std::vector<double> scores;      // distinct, descending
    std::vector<std::size_t> tp;     // cumulative positives at score >= scores[k]
    std::vector<std::size_t> fp;
    std::size_t n_pos = 0, n_neg = 0;
};

RankedCounts rank_counts(const std::vector<std::int8_t>& y, const std::vector<double>& p) {
    if (y.size() != p.size()) throw LengthMismatch("labels and scores differ in length");
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });

    RankedCounts rc;
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        if (y[i] == 1) {
            ++tp;
            ++rc.n_pos;
        } else {
            ++fp;
            ++rc.n_neg;
        }
        const bool last_of_tie = k + 1 == order.size() || p[order[k + 1]] != p[i];
        if (last_of_tie) {
            rc.scores.push_back(p[i]);
            rc.tp.push_back(tp);
            rc.fp.push_back(fp);
        }
    }
    return rc;
}

}  // namespace

namespace {

// ROC points and trapezoid AUC for the positive class of (y, p).
std::pair<std::vector<CurvePoint>, double> roc_one_class(const std::vector<std::int8_t>& y,
                                                         const std::vector<double>& p) {
    const RankedCounts rc = rank_counts(y, p);
    if (rc.n_pos == 0 || rc.n_neg == 0) throw SingleClass("roc_curve requires both classes");

    std::vector<CurvePoint> pts;
    // (0,0) anchor: a threshold above every probability
    pts.push_back({2.0, 0.0, 0.0});
    double auc = 0.0;
    double prev_x = 0.0, prev_y = 0.0;
    for (std::size_t k = 0; k < rc.scores.size(); ++k) {
        const double x = static_cast<double>(rc.fp[k]) / static_cast<double>(rc.n_neg);
        const double yy = static_cast<double>(rc.tp[k]) / static_cast<double>(rc.n_pos);
        auc += 0.5 * (x - prev_x) * (yy + prev_y);
        pts.push_back({rc.scores[k], x, yy});
        prev_x = x;
        prev_y = yy;
    }
    return {pts, auc};
}

}  // namespace

CurveResult roc_curve(const std::vector<std::int8_t>& y, const std::vector<double>& p) {
    CurveResult out;
    auto [pos_pts, pos_auc] = roc_one_class(y, p);
    out.positive_points = std::move(pos_pts);
    out.auc_positive = pos_auc;

    std::vector<std::int8_t> y_flipped(y.size());
    std::vector<double> p_flipped(p.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_flipped[i] = y[i] == 1 ? 0 : 1;
        p_flipped[i] = 1.0 - p[i];
    }
    auto [neg_pts, neg_auc] = roc_one_class(y_flipped, p_flipped);
    out.negative_points = std::move(neg_pts);
    out.auc_negative = neg_auc;
    out.auc_macro = 0.5 * (out.auc_positive + out.auc_negative);
    return out;
}

namespace {

// Average precision and PR points for the positive class of (y, p).
std::pair<std::vector<CurvePoint>, double> pr_one_class(const std::vector<std::int8_t>& y,
                                                        const std::vector<double>& p) {
    const RankedCounts rc = rank_counts(y, p);
    if (rc.n_pos == 0) throw NoPositives("pr_curve requires positive examples");

    std::vector<CurvePoint> pts;
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < rc.scores.size(); ++k) {
        const double tp = static_cast<double>(rc.tp[k]);
        const double fp = static_cast<double>(rc.fp[k]);
        const double recall = tp / static_cast<double>(rc.n_pos);
        const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        ap += (recall - prev_recall) * precision;
        pts.push_back({rc.scores[k], recall, precision});
        prev_recall = recall;
    }
    return {pts, ap};
}

}  // namespace

CurveResult pr_curve(const std::vector<std::int8_t>& y, const std::vector<double>& p) {
    CurveResult out;
    auto [pos_pts, pos_ap] = pr_one_class(y, p);
    out.positive_points = std::move(pos_pts);
    out.auc_positive = pos_ap;

    std::vector<std::int8_t> y_flipped(y.size());
    std::vector<double> p_flipped(p.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_flipped[i] = y[i] == 1 ? 0 : 1;
        p_flipped[i] = 1.0 - p[i];
    }
    auto [neg_pts, neg_ap] = pr_one_class(y_flipped, p_flipped);
    out.negative_points = std::move(neg_pts);
    out.auc_negative = neg_ap;
    out.auc_macro = 0.5 * (out.auc_positive + out.auc_negative);
    return out;
}

ThresholdSweep optimize_threshold(const std::vector<std::int8_t>& y,
                                  const std::vector<double>& p, double grid_step) {
    if (!(grid_step > 0.0) || grid_step > 1.0) {
        throw InvalidConfig("grid_step must lie in (0, 1]");
    }
    {
        std::size_t n_pos = 0;
        for (std::int8_t v : y) n_pos += v == 1 ? 1 : 0;
        if (n_pos == 0 || n_pos == y.size()) {
            throw SingleClass("optimize_threshold requires both classes");
        }
    }

    const auto n_steps = static_cast<std::size_t>(std::llround(1.0 / grid_step));
    ThresholdSweep sweep;
    for (std::size_t k = 0; k <= n_steps; ++k) {
        sweep.thresholds.push_back(static_cast<double>(k) / static_cast<double>(n_steps));
    }
    if (std::find(sweep.thresholds.begin(), sweep.thresholds.end(), 0.5) ==
        sweep.thresholds.end()) {
        sweep.thresholds.push_back(0.5);
        std::sort(sweep.thresholds.begin(), sweep.thresholds.end());
    }

    sweep.best_macro_f1 = -1.0;
    for (double t : sweep.thresholds) {
        const double score = prf(confusion(y, p, t)).macro_f1;
        sweep.macro_f1.push_back(score);
        if (score > sweep.best_macro_f1 + 1e-15) {
            sweep.best_macro_f1 = score;
            sweep.best_threshold = t;
        }
    }
    return sweep;
}

}  // namespace conflictlens
