#pragma once

#include <cstdint>
#include <vector>

namespace conflictlens {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t positives() const { return tp + fn; }
    std::size_t negatives() const { return fp + tn; }
    std::size_t total() const { return tp + fp + fn + tn; }
    double accuracy() const;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct PrfReport {
    ClassMetrics positive;  // conflict class
    ClassMetrics negative;
    double macro_f1 = 0.0;
};

struct CurvePoint {
    double threshold = 0.0;
    double x = 0.0;  // FP rate (ROC) or recall (PR)
    double y = 0.0;  // TP rate (ROC) or precision (PR)
};

struct CurveResult {
    std::vector<CurvePoint> positive_points;
    std::vector<CurvePoint> negative_points;  // one-vs-rest on flipped labels
    double auc_positive = 0.0;
    double auc_negative = 0.0;
    double auc_macro = 0.0;
};

struct ThresholdSweep {
    std::vector<double> thresholds;
    std::vector<double> macro_f1;
    double best_threshold = 0.5;
    double best_macro_f1 = 0.0;
};

// Predict 1 iff p >= threshold (inclusive, fixed for determinism).
ConfusionMatrix confusion(const std::vector<std::int8_t>& y, const std::vector<double>& p,
                          double threshold);

// Zero-denominator conventions: precision/recall of 0 when undefined, f1 of
// 0 when precision + recall is 0; macro f1 is the unweighted mean of the two
// per-class f1 values.
PrfReport prf(const ConfusionMatrix& cm);

// Points at every distinct score plus the (0,0) and (1,1) endpoints;
// trapezoid AUC (ties collapse into a single step).
CurveResult roc_curve(const std::vector<std::int8_t>& y, const std::vector<double>& p);

// Average precision (step-wise sum); the macro value averages the
// positive-class AP with the negative-class AP computed on flipped labels
// and reflected scores.
CurveResult pr_curve(const std::vector<std::int8_t>& y, const std::vector<double>& p);

// Macro-F1 over the grid {0, step, ..., 1} (0.5 always included); ties
// resolve to the lowest threshold.
ThresholdSweep optimize_threshold(const std::vector<std::int8_t>& y,
                                  const std::vector<double>& p, double grid_step = 0.01);

}  // namespace conflictlens
