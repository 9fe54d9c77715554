// Threshold classification of anomaly scores and the metrics used to
// compare detectors: confusion matrix, accuracy/precision/recall/F/
// specificity/G-mean, ROC curve with trapezoidal AUC, and selection of the
// G-mean-optimal threshold from curve points. Any 0/0 metric is defined
// as 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace netshap {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;  // positive class (attack = 1)
    double recall = 0.0;
    double f_score = 0.0;
    double specificity = 0.0;
    double g_mean = 0.0;
    ClassMetrics class0;
    ClassMetrics class1;
};

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // thresholds strictly decreasing, starts at +inf
    double auc = 0.0;
};

namespace detail {
inline double safe_div(double num, double den) { return den != 0.0 ? num / den : 0.0; }
}  // namespace detail

// Scores at or above the threshold are labelled attack (1).
inline std::vector<int> classify(std::span<const double> scores, double threshold) {
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
    return out;
}

inline ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions) {
    if (labels.size() != predictions.size()) throw std::invalid_argument("confusion: length mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1)
            (predictions[i] == 1 ? cm.tp : cm.fn)++;
        else
            (predictions[i] == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

inline MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::invalid_argument("compute_metrics: empty confusion matrix");
    using detail::safe_div;
    const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
    const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);

    MetricsReport m;
    m.accuracy = (tp + tn) / static_cast<double>(cm.total());
    m.precision = safe_div(tp, tp + fp);
    m.recall = safe_div(tp, tp + fn);
    m.f_score = safe_div(2.0 * m.recall * m.precision, m.recall + m.precision);
    m.specificity = safe_div(tn, tn + fp);
    m.g_mean = std::sqrt(m.recall * m.specificity);

    m.class1 = {m.precision, m.recall, m.f_score, cm.tp + cm.fn};
    const double p0 = safe_div(tn, tn + fn);
    const double r0 = m.specificity;
    m.class0 = {p0, r0, safe_div(2.0 * p0 * r0, p0 + r0), cm.tn + cm.fp};
    return m;
}

// Curve thresholds are the distinct observed scores in descending order,
// preceded by a +inf sentinel, so each point is exactly what classify()
// produces at that threshold. AUC by trapezoidal integration.
inline RocCurve roc_curve(std::span<const int> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) throw std::invalid_argument("roc_curve: length mismatch");
    std::uint64_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_curve: both classes must be present");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::uint64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        curve.points.push_back({s, static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos)});
    }

    double auc = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        auc += (b.fpr - a.fpr) * (b.tpr + a.tpr) * 0.5;
    }
    curve.auc = auc;
    return curve;
}

// Threshold maximizing sqrt(tpr * (1 - fpr)); ties resolve toward the
// larger threshold (fewer predicted positives). The +inf sentinel is not a
// candidate: its g is 0 by construction.
inline std::pair<double, double> optimal_threshold(const RocCurve& curve) {
    if (curve.points.size() < 2) throw std::invalid_argument("optimal_threshold: degenerate curve");
    double best_g = -1.0;
    double best_t = curve.points[1].threshold;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& p = curve.points[k];
        const double g = std::sqrt(p.tpr * (1.0 - p.fpr));
        if (g > best_g) {
            best_g = g;
            best_t = p.threshold;
        }
    }
    return {best_t, best_g};
}

}  // namespace netshap
