// Static SVG emitters: overlaid ROC curves, the importance-ranking bar
// chart, and the per-instance signed-contribution chart (red bars push the
// reconstruction error up, blue bars pull it down). Model curves are the
// only <polyline> elements; axes and guides are <line> elements, so the
// plots stay structurally checkable.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "netshap/evaluation.hpp"
#include "netshap/feature_selection.hpp"
#include "netshap/report.hpp"
#include "netshap/shap.hpp"

namespace netshap {

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string svg_header(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
           "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
}

inline std::string svg_line(double x1, double y1, double x2, double y2, const std::string& stroke,
                            const std::string& extra = "") {
    return "  <line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" + fmt(y2) +
           "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
}

inline std::string svg_text(double x, double y, const std::string& body, const std::string& extra = "") {
    return "  <text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-family=\"sans-serif\" font-size=\"12\"" + extra +
           ">" + xml_escape(body) + "</text>\n";
}

}  // namespace detail

struct NamedCurve {
    std::string name;
    const RocCurve* curve = nullptr;
};

inline void write_roc_svg(const std::vector<NamedCurve>& curves, const std::string& path) {
    using namespace detail;
    const double w = 640, h = 480, m = 60;
    const double pw = w - 2 * m, ph = h - 2 * m;
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    std::string svg = svg_header(w, h);
    svg += svg_line(m, h - m, m + pw, h - m, "#000000");  // x axis
    svg += svg_line(m, m, m, h - m, "#000000");           // y axis
    svg += svg_line(m, h - m, m + pw, m, "#999999", " stroke-dasharray=\"4 4\"");  // chance diagonal
    svg += svg_text(m + pw / 2 - 60, h - m + 35, "False positive rate");
    svg += svg_text(m - 45, m - 15, "True positive rate");

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& named = curves[c];
        std::string pts;
        for (const auto& p : named.curve->points) {
            pts += fmt(m + p.fpr * pw) + "," + fmt(h - m - p.tpr * ph) + " ";
        }
        const std::string color = kColors[c % 4];
        svg += "  <polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        char label[128];
        std::snprintf(label, sizeof(label), "%s (AUC %.3f)", named.name.c_str(), named.curve->auc);
        svg += svg_text(m + 15, m + 20 + 18 * static_cast<double>(c), label,
                        " fill=\"" + color + "\"");
    }
    svg += "</svg>\n";
    write_text_file(path, svg);
}

// Horizontal bar chart of the top-k importances in rank order, rank 1 on
// top. One <rect> per ranked feature.
inline void write_ranking_svg(const FeatureRanking& ranking, std::size_t top_k, const std::string& path) {
    using namespace detail;
    const std::size_t k = std::min(top_k, ranking.entries.size());
    const double row_h = 22, m_left = 190, m_top = 40, m_right = 80;
    const double pw = 400;
    const double w = m_left + pw + m_right, h = m_top + row_h * static_cast<double>(k) + 30;

    double max_imp = 0.0;
    for (std::size_t i = 0; i < k; ++i) max_imp = std::max(max_imp, ranking.entries[i].importance);
    if (max_imp <= 0.0) max_imp = 1.0;

    std::string svg = svg_header(w, h);
    svg += svg_text(m_left, 22, "Mean |phi| per feature (top " + std::to_string(k) + ")");
    svg += svg_line(m_left, m_top, m_left, m_top + row_h * static_cast<double>(k), "#000000");
    for (std::size_t i = 0; i < k; ++i) {
        const auto& e = ranking.entries[i];
        const double y = m_top + row_h * static_cast<double>(i);
        const double bw = pw * e.importance / max_imp;
        svg += "  <rect x=\"" + fmt(m_left) + "\" y=\"" + fmt(y + 3) + "\" width=\"" + fmt(bw) + "\" height=\"" +
               fmt(row_h - 6) + "\" fill=\"#1f77b4\"/>\n";
        svg += svg_text(8, y + row_h - 7, std::to_string(e.rank) + ". " + e.name);
        svg += svg_text(m_left + bw + 6, y + row_h - 7, fmt_value(e.importance));
    }
    svg += "</svg>\n";
    write_text_file(path, svg);
}

// Diverging bar chart of signed phi for one instance, strongest
// contributions first; positive phi (pushes the reconstruction error up)
// is red, negative is blue. Base and full values are annotated.
inline void write_instance_svg(const ShapExplanation& ex, std::size_t max_bars, const std::string& path) {
    using namespace detail;
    std::vector<std::size_t> order(ex.phi.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ma = std::abs(ex.phi[a]), mb = std::abs(ex.phi[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    const std::size_t k = std::min(max_bars, order.size());

    const double row_h = 22, m_left = 190, m_top = 60, m_right = 80;
    const double pw = 400;
    const double w = m_left + pw + m_right, h = m_top + row_h * static_cast<double>(k) + 30;
    const double center = m_left + pw / 2;

    double max_abs = 0.0;
    for (std::size_t i = 0; i < k; ++i) max_abs = std::max(max_abs, std::abs(ex.phi[order[i]]));
    if (max_abs <= 0.0) max_abs = 1.0;

    std::string svg = svg_header(w, h);
    svg += svg_text(m_left, 22,
                    "Instance " + std::to_string(ex.instance_index) + ": base_value " + fmt_value(ex.base_value) +
                        ", full_value " + fmt_value(ex.full_value));
    svg += svg_text(m_left, 40, "red increases the reconstruction error, blue decreases it");
    svg += svg_line(center, m_top, center, m_top + row_h * static_cast<double>(k), "#000000");

    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t f = order[i];
        const double phi = ex.phi[f];
        const double y = m_top + row_h * static_cast<double>(i);
        const double bw = (pw / 2) * std::abs(phi) / max_abs;
        const double x = phi >= 0.0 ? center : center - bw;
        const std::string color = phi >= 0.0 ? "#d62728" : "#1f77b4";
        svg += "  <rect x=\"" + fmt(x) + "\" y=\"" + fmt(y + 3) + "\" width=\"" + fmt(bw) + "\" height=\"" +
               fmt(row_h - 6) + "\" fill=\"" + color + "\"/>\n";
        const std::string label = f < ex.feature_names.size() ? ex.feature_names[f] : std::to_string(f);
        svg += svg_text(8, y + row_h - 7, label);
        svg += svg_text(m_left + pw + 6, y + row_h - 7, fmt_value(phi));
    }
    svg += "</svg>\n";
    write_text_file(path, svg);
}

}  // namespace netshap
