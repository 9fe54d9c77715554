// Comparison-report assembly and serialization: a machine-readable JSON
// report, a human-readable classification report in the classic
// per-class/accuracy/macro/weighted layout, and the tabular explanation
// dump. All numeric output is formatted deterministically.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "netshap/evaluation.hpp"
#include "netshap/feature_selection.hpp"
#include "netshap/shap.hpp"

namespace netshap {

struct TrainSummary {
    double first_loss = 0.0;
    double final_loss = 0.0;
    double final_validation_mse = 0.0;
    std::size_t epochs = 0;
};

struct ModelReport {
    std::string name;
    std::size_t feature_count = 0;
    double auc = 0.0;
    double g_mean = 0.0;
    double optimal_threshold = 0.0;
    ConfusionMatrix cm;
    MetricsReport metrics;
    TrainSummary train;
};

struct ComparisonReport {
    std::vector<ModelReport> models;
    FeatureRanking ranking;
    std::vector<std::string> selected_features;
    std::uint64_t seed = 0;
    std::string config_hash;
};

struct AverageRow {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline AverageRow macro_average(const MetricsReport& m) {
    return {(m.class0.precision + m.class1.precision) / 2.0, (m.class0.recall + m.class1.recall) / 2.0,
            (m.class0.f1 + m.class1.f1) / 2.0};
}

inline AverageRow weighted_average(const MetricsReport& m) {
    const double s0 = static_cast<double>(m.class0.support);
    const double s1 = static_cast<double>(m.class1.support);
    const double total = s0 + s1;
    return {(m.class0.precision * s0 + m.class1.precision * s1) / total,
            (m.class0.recall * s0 + m.class1.recall * s1) / total,
            (m.class0.f1 * s0 + m.class1.f1 * s1) / total};
}

// Per-class precision/recall/f1/support with accuracy, macro and weighted
// average rows.
inline std::string classification_report_text(const MetricsReport& m) {
    const std::uint64_t total = m.class0.support + m.class1.support;
    const AverageRow macro = macro_average(m);
    const AverageRow weighted = weighted_average(m);

    char line[160];
    std::string out;
    out += "              precision    recall  f1-score   support\n\n";
    std::snprintf(line, sizeof(line), "%12s %10.2f %9.2f %9.2f %9llu\n", "0.0", m.class0.precision,
                  m.class0.recall, m.class0.f1, static_cast<unsigned long long>(m.class0.support));
    out += line;
    std::snprintf(line, sizeof(line), "%12s %10.2f %9.2f %9.2f %9llu\n", "1.0", m.class1.precision,
                  m.class1.recall, m.class1.f1, static_cast<unsigned long long>(m.class1.support));
    out += line;
    out += "\n";
    std::snprintf(line, sizeof(line), "%12s %10s %9s %9.2f %9llu\n", "accuracy", "", "", m.accuracy,
                  static_cast<unsigned long long>(total));
    out += line;
    std::snprintf(line, sizeof(line), "%12s %10.2f %9.2f %9.2f %9llu\n", "macro avg", macro.precision, macro.recall,
                  macro.f1, static_cast<unsigned long long>(total));
    out += line;
    std::snprintf(line, sizeof(line), "%12s %10.2f %9.2f %9.2f %9llu\n", "weighted avg", weighted.precision,
                  weighted.recall, weighted.f1, static_cast<unsigned long long>(total));
    out += line;
    return out;
}

// --- JSON serialization ------------------------------------------------

inline nlohmann::json metrics_to_json(const MetricsReport& m) {
    auto cls = [](const ClassMetrics& c) {
        return nlohmann::json{
            {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
    };
    auto avg = [](const AverageRow& a) {
        return nlohmann::json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
    };
    return nlohmann::json{{"accuracy", m.accuracy},
                          {"precision", m.precision},
                          {"recall", m.recall},
                          {"f_score", m.f_score},
                          {"specificity", m.specificity},
                          {"g_mean", m.g_mean},
                          {"class0", cls(m.class0)},
                          {"class1", cls(m.class1)},
                          {"macro_avg", avg(macro_average(m))},
                          {"weighted_avg", avg(weighted_average(m))}};
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
    MetricsReport m;
    m.accuracy = j.at("accuracy").get<double>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f_score = j.at("f_score").get<double>();
    m.specificity = j.at("specificity").get<double>();
    m.g_mean = j.at("g_mean").get<double>();
    auto cls = [](const nlohmann::json& c) {
        return ClassMetrics{c.at("precision").get<double>(), c.at("recall").get<double>(), c.at("f1").get<double>(),
                            c.at("support").get<std::uint64_t>()};
    };
    m.class0 = cls(j.at("class0"));
    m.class1 = cls(j.at("class1"));
    return m;
}

inline nlohmann::json report_to_json(const ComparisonReport& report) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["provenance"] = {{"seed", report.seed}, {"config_hash", report.config_hash}};
    j["notes"] = {{"zero_division_convention", "metrics with a 0/0 form are defined as 0"}};
    j["models"] = nlohmann::json::array();
    for (const auto& m : report.models) {
        j["models"].push_back(
            {{"name", m.name},
             {"feature_count", m.feature_count},
             {"auc", m.auc},
             {"g_mean", m.g_mean},
             {"optimal_threshold", m.optimal_threshold},
             {"confusion", {{"tp", m.cm.tp}, {"tn", m.cm.tn}, {"fp", m.cm.fp}, {"fn", m.cm.fn}}},
             {"metrics", metrics_to_json(m.metrics)},
             {"train",
              {{"first_loss", m.train.first_loss},
               {"final_loss", m.train.final_loss},
               {"final_validation_mse", m.train.final_validation_mse},
               {"epochs", m.train.epochs}}}});
    }
    j["ranking"] = nlohmann::json::array();
    for (const auto& e : report.ranking.entries)
        j["ranking"].push_back({{"feature", e.name}, {"importance", e.importance}});
    j["selected_features"] = report.selected_features;
    return j;
}

inline ComparisonReport report_from_json(const nlohmann::json& j) {
    ComparisonReport report;
    report.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    report.config_hash = j.at("provenance").at("config_hash").get<std::string>();
    for (const auto& jm : j.at("models")) {
        ModelReport m;
        m.name = jm.at("name").get<std::string>();
        m.feature_count = jm.at("feature_count").get<std::size_t>();
        m.auc = jm.at("auc").get<double>();
        m.g_mean = jm.at("g_mean").get<double>();
        m.optimal_threshold = jm.at("optimal_threshold").get<double>();
        const auto& cm = jm.at("confusion");
        m.cm = {cm.at("tp").get<std::uint64_t>(), cm.at("tn").get<std::uint64_t>(), cm.at("fp").get<std::uint64_t>(),
                cm.at("fn").get<std::uint64_t>()};
        m.metrics = metrics_from_json(jm.at("metrics"));
        const auto& tr = jm.at("train");
        m.train = {tr.at("first_loss").get<double>(), tr.at("final_loss").get<double>(),
                   tr.at("final_validation_mse").get<double>(), tr.at("epochs").get<std::size_t>()};
        report.models.push_back(std::move(m));
    }
    std::size_t rank = 0;
    for (const auto& je : j.at("ranking")) {
        RankedFeature e;
        e.name = je.at("feature").get<std::string>();
        e.importance = je.at("importance").get<double>();
        e.rank = ++rank;
        e.original_index = rank - 1;
        report.ranking.entries.push_back(std::move(e));
    }
    report.selected_features = j.at("selected_features").get<std::vector<std::string>>();
    return report;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

// report.json + report.txt (Table-style summary followed by one
// classification report per model).
inline void write_report_files(const ComparisonReport& report, const std::string& dir) {
    write_text_file(dir + "/report.json", report_to_json(report).dump(2) + "\n");

    std::string txt;
    char line[256];
    txt += "Model comparison\n";
    txt += "================\n\n";
    std::snprintf(line, sizeof(line), "%-12s %14s %8s %8s %18s\n", "Model", "Features Count", "AUC", "G-mean",
                  "Optimal Threshold");
    txt += line;
    for (const auto& m : report.models) {
        std::snprintf(line, sizeof(line), "%-12s %14zu %8.3f %8.3f %18.6g\n", m.name.c_str(), m.feature_count, m.auc,
                      m.g_mean, m.optimal_threshold);
        txt += line;
    }
    for (const auto& m : report.models) {
        txt += "\n" + m.name + " confusion matrix (rows: actual 0/1, cols: predicted 0/1)\n";
        std::snprintf(line, sizeof(line), "  [[%llu %llu]\n   [%llu %llu]]\n",
                      static_cast<unsigned long long>(m.cm.tn), static_cast<unsigned long long>(m.cm.fp),
                      static_cast<unsigned long long>(m.cm.fn), static_cast<unsigned long long>(m.cm.tp));
        txt += line;
        txt += "\n" + m.name + " classification report\n";
        txt += classification_report_text(m.metrics);
    }
    write_text_file(dir + "/report.txt", txt);
}

// One row per (instance, feature) ordered by instance index then feature
// index, with the per-instance base and full values repeated on each row.
inline void save_explanations_tsv(const std::vector<ShapExplanation>& explanations, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_explanations_tsv: cannot write '" + path + "'");
    out << "instance\tfeature_index\tfeature\tphi\tbase_value\tfull_value\n";
    char num[40];
    for (const auto& ex : explanations) {
        for (std::size_t j = 0; j < ex.phi.size(); ++j) {
            out << ex.instance_index << '\t' << j << '\t'
                << (j < ex.feature_names.size() ? ex.feature_names[j] : std::to_string(j));
            std::snprintf(num, sizeof(num), "%.17g", ex.phi[j]);
            out << '\t' << num;
            std::snprintf(num, sizeof(num), "%.17g", ex.base_value);
            out << '\t' << num;
            std::snprintf(num, sizeof(num), "%.17g", ex.full_value);
            out << '\t' << num << '\n';
        }
    }
}

}  // namespace netshap
