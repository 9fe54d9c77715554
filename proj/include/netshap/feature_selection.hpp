// Aggregates per-instance Shapley explanations of attack instances into a
// global importance ranking (mean absolute phi: contributions in either
// direction count by magnitude) and selects the top-k feature names for the
// optimized model.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netshap/shap.hpp"

namespace netshap {

struct RankedFeature {
    std::string name;
    double importance = 0.0;
    std::size_t rank = 0;            // 1-based, dense
    std::size_t original_index = 0;  // column position in the explained data
};

struct FeatureRanking {
    std::vector<RankedFeature> entries;  // sorted by importance desc, ties by original index
    std::string aggregation = "mean_abs";
    std::size_t n_instances = 0;
};

inline FeatureRanking aggregate_importance(const std::vector<ShapExplanation>& explanations) {
    if (explanations.empty()) throw std::invalid_argument("aggregate_importance: no explanations");
    const auto& names = explanations.front().feature_names;
    const std::size_t d = explanations.front().phi.size();
    if (names.size() != d) throw std::invalid_argument("aggregate_importance: explanation lacks feature names");

    std::vector<double> importance(d, 0.0);
    for (const auto& ex : explanations) {
        if (ex.feature_names != names || ex.phi.size() != d)
            throw std::invalid_argument("aggregate_importance: explanations disagree on feature set");
        for (std::size_t j = 0; j < d; ++j) importance[j] += std::abs(ex.phi[j]);
    }
    for (double& v : importance) v /= static_cast<double>(explanations.size());

    FeatureRanking ranking;
    ranking.n_instances = explanations.size();
    ranking.entries.resize(d);
    for (std::size_t j = 0; j < d; ++j) ranking.entries[j] = {names[j], importance[j], 0, j};
    std::sort(ranking.entries.begin(), ranking.entries.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.original_index < b.original_index;
    });
    for (std::size_t j = 0; j < d; ++j) ranking.entries[j].rank = j + 1;
    return ranking;
}

inline std::vector<std::string> top_k_features(const FeatureRanking& ranking, std::size_t k) {
    if (k == 0 || k > ranking.entries.size())
        throw std::invalid_argument("top_k_features: k must lie in [1, n_features]");
    std::vector<std::string> names;
    names.reserve(k);
    for (std::size_t j = 0; j < k; ++j) names.push_back(ranking.entries[j].name);
    return names;
}

// Two-column text table (name, importance) in rank order.
inline void save_ranking_tsv(const FeatureRanking& ranking, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_ranking_tsv: cannot write '" + path + "'");
    out << "feature\timportance\n";
    char buf[40];
    for (const auto& e : ranking.entries) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.importance);
        out << e.name << '\t' << buf << '\n';
    }
}

inline FeatureRanking load_ranking_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_ranking_tsv: cannot open '" + path + "'");
    FeatureRanking ranking;
    std::string line;
    std::getline(in, line);  // header
    std::size_t rank = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw std::runtime_error("load_ranking_tsv: malformed line in '" + path + "'");
        RankedFeature e;
        e.name = line.substr(0, tab);
        e.importance = std::stod(line.substr(tab + 1));
        e.rank = ++rank;
        e.original_index = rank - 1;  // original order is not recoverable from the table
        ranking.entries.push_back(std::move(e));
    }
    return ranking;
}

}  // namespace netshap
