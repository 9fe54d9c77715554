// Dataset plumbing: non-finite cleanup with column means, standardization
// with train-fitted parameters, seeded shuffle-and-cut splits, column
// selection, and a seeded synthetic generator with planted anomalous
// columns for desk-scale verification. All operations return new values;
// nothing here mutates shared state.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "netshap/csv.hpp"
#include "netshap/linalg.hpp"
#include "netshap/rng.hpp"

namespace netshap {

struct ScalerParams {
    std::vector<double> means;
    std::vector<double> stds;  // population standard deviation; zeros recorded as-is
    std::vector<std::string> feature_names;
};

struct CleanDataset {
    Matrix features;  // n_rows x n_features, all finite
    std::vector<std::string> feature_names;
    std::vector<int> labels;  // empty, or one {0,1} per row
    std::optional<ScalerParams> scaler;
    std::vector<std::size_t> informative_indices;  // synthetic provenance, usually empty

    std::size_t n_rows() const { return features.rows; }
    std::size_t n_features() const { return features.cols; }
    bool has_labels() const { return !labels.empty(); }
};

namespace detail {

inline void check_unique_names(std::vector<std::string>& names, std::vector<std::string>* warnings) {
    std::unordered_map<std::string, int> seen;
    for (auto& name : names) {
        auto [it, fresh] = seen.emplace(name, 0);
        if (!fresh) {
            const std::string original = name;
            do {
                name = original + "." + std::to_string(++it->second);
            } while (seen.count(name));
            seen.emplace(name, 0);
            if (warnings) warnings->push_back("duplicate column name '" + original + "' renamed to '" + name + "'");
        }
    }
}

}  // namespace detail

// Replaces every non-finite cell with the mean of the finite values in its
// column; extracts and binarizes the label column (benign -> 0, rest -> 1).
// A column with no finite value at all is filled with 0.0 plus a warning so
// pathological real-world columns do not kill a run.
inline CleanDataset clean(const RawTable& raw, const std::string& benign_label = "BENIGN",
                          std::vector<std::string>* warnings = nullptr) {
    if (raw.n_rows() == 0) throw std::invalid_argument("clean: table has no data rows");

    std::size_t label_idx = raw.n_cols();
    if (raw.label_column) {
        for (std::size_t j = 0; j < raw.n_cols(); ++j)
            if (raw.column_names[j] == *raw.label_column) label_idx = j;
    }

    CleanDataset ds;
    for (std::size_t j = 0; j < raw.n_cols(); ++j)
        if (j != label_idx) ds.feature_names.push_back(raw.column_names[j]);
    detail::check_unique_names(ds.feature_names, warnings);

    const std::size_t n = raw.n_rows();
    const std::size_t d = ds.feature_names.size();
    ds.features = Matrix(n, d);

    std::size_t out_j = 0;
    for (std::size_t j = 0; j < raw.n_cols(); ++j) {
        if (j == label_idx) continue;
        double sum = 0.0;
        std::size_t finite = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = raw.cells(i, j);
            if (std::isfinite(v)) {
                sum += v;
                ++finite;
            }
        }
        double fill = 0.0;
        if (finite > 0) {
            fill = sum / static_cast<double>(finite);
        } else if (warnings) {
            warnings->push_back("column '" + ds.feature_names[out_j] + "' has no finite values; filled with 0.0");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double v = raw.cells(i, j);
            ds.features(i, out_j) = std::isfinite(v) ? v : fill;
        }
        ++out_j;
    }

    if (raw.label_column) {
        ds.labels.resize(n);
        for (std::size_t i = 0; i < n; ++i) ds.labels[i] = (raw.label_text[i] == benign_label) ? 0 : 1;
    }
    return ds;
}

// (x - mean) / std per column with population statistics; zero-variance
// columns map to all-zeros.
inline std::pair<CleanDataset, ScalerParams> fit_standardize(const CleanDataset& ds) {
    if (ds.n_rows() == 0) throw std::invalid_argument("fit_standardize: empty dataset");
    const std::size_t n = ds.n_rows(), d = ds.n_features();

    ScalerParams params;
    params.feature_names = ds.feature_names;
    params.means.resize(d);
    params.stds.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += ds.features(i, j);
        const double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = ds.features(i, j) - mean;
            sq += c * c;
        }
        params.means[j] = mean;
        params.stds[j] = std::sqrt(sq / static_cast<double>(n));
    }

    CleanDataset out = ds;
    for (std::size_t j = 0; j < d; ++j) {
        const double mean = params.means[j];
        const double sd = params.stds[j];
        for (std::size_t i = 0; i < n; ++i)
            out.features(i, j) = (sd > 0.0) ? (ds.features(i, j) - mean) / sd : 0.0;
    }
    out.scaler = params;
    return {std::move(out), std::move(params)};
}

inline CleanDataset apply_standardize(const CleanDataset& ds, const ScalerParams& params) {
    if (ds.feature_names != params.feature_names) {
        std::string msg = "apply_standardize: feature names do not match scaler; mismatches:";
        const std::size_t m = std::max(ds.feature_names.size(), params.feature_names.size());
        for (std::size_t j = 0; j < m; ++j) {
            const std::string a = j < ds.feature_names.size() ? ds.feature_names[j] : "<none>";
            const std::string b = j < params.feature_names.size() ? params.feature_names[j] : "<none>";
            if (a != b) msg += " [" + std::to_string(j) + ": '" + a + "' vs '" + b + "']";
        }
        throw std::invalid_argument(msg);
    }
    CleanDataset out = ds;
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        const double mean = params.means[j];
        const double sd = params.stds[j];
        for (std::size_t i = 0; i < ds.n_rows(); ++i)
            out.features(i, j) = (sd > 0.0) ? (ds.features(i, j) - mean) / sd : 0.0;
    }
    out.scaler = params;
    return out;
}

// Deterministic shuffle-then-cut: train gets floor(fraction * n) rows, the
// rest goes to the second part. Together they cover the input exactly once.
inline std::pair<CleanDataset, CleanDataset> split(const CleanDataset& ds, double train_fraction,
                                                   std::uint64_t seed) {
    if (ds.n_rows() < 2) throw std::invalid_argument("split: need at least 2 rows");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split: train_fraction must lie in (0,1)");

    const std::size_t n = ds.n_rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));

    auto take = [&](std::size_t begin, std::size_t end) {
        CleanDataset part;
        part.feature_names = ds.feature_names;
        part.scaler = ds.scaler;
        part.informative_indices = ds.informative_indices;
        part.features = Matrix(end - begin, ds.n_features());
        if (ds.has_labels()) part.labels.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t src = order[i];
            std::copy_n(ds.features.row_ptr(src), ds.n_features(), part.features.row_ptr(i - begin));
            if (ds.has_labels()) part.labels.push_back(ds.labels[src]);
        }
        return part;
    };
    return {take(0, n_train), take(n_train, n)};
}

// Subsets/reorders columns to the requested names; labels ride along.
inline CleanDataset select_columns(const CleanDataset& ds, const std::vector<std::string>& names) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) index.emplace(ds.feature_names[j], j);

    std::set<std::string> requested;
    std::vector<std::size_t> cols;
    cols.reserve(names.size());
    for (const auto& name : names) {
        if (!requested.insert(name).second)
            throw std::invalid_argument("select_columns: duplicate name '" + name + "'");
        const auto it = index.find(name);
        if (it == index.end()) throw std::invalid_argument("select_columns: unknown column '" + name + "'");
        cols.push_back(it->second);
    }

    CleanDataset out;
    out.feature_names = names;
    out.labels = ds.labels;
    out.features = Matrix(ds.n_rows(), cols.size());
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out.features(i, j) = ds.features(i, cols[j]);

    if (ds.scaler) {
        ScalerParams p;
        p.feature_names = names;
        for (std::size_t c : cols) {
            p.means.push_back(ds.scaler->means[c]);
            p.stds.push_back(ds.scaler->stds[c]);
        }
        out.scaler = std::move(p);
    }
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (std::find(ds.informative_indices.begin(), ds.informative_indices.end(), cols[j]) !=
            ds.informative_indices.end())
            out.informative_indices.push_back(j);
    return out;
}

// Benign rows come from a correlated latent-factor model; attack rows are
// identical draws except the planted columns are shifted by `shift` benign
// standard deviations and decorrelated (replaced by matching-scale
// independent noise). With shift = 0 both classes use the same generator,
// so they are indistinguishable by construction.
inline CleanDataset synth_generate(std::size_t n_benign, std::size_t n_attack, std::size_t n_features,
                                   std::size_t n_informative, double shift, std::uint64_t seed) {
    if (n_informative == 0 || n_informative > n_features)
        throw std::invalid_argument("synth_generate: need 0 < n_informative <= n_features");

    Rng rng(seed);
    const std::size_t n_latent = std::max<std::size_t>(2, n_features / 5);

    Matrix loadings(n_features, n_latent);
    const double load_scale = 1.0 / std::sqrt(static_cast<double>(n_latent));
    for (double& v : loadings.data) v = rng.normal() * load_scale;
    const double noise_scale = 0.5;

    std::vector<std::size_t> informative(n_features);
    std::iota(informative.begin(), informative.end(), std::size_t{0});
    rng.shuffle(informative);
    informative.resize(n_informative);
    std::sort(informative.begin(), informative.end());

    // model-implied benign column scales
    std::vector<double> sigma(n_features);
    for (std::size_t j = 0; j < n_features; ++j) {
        double s = noise_scale * noise_scale;
        for (std::size_t k = 0; k < n_latent; ++k) s += loadings(j, k) * loadings(j, k);
        sigma[j] = std::sqrt(s);
    }

    CleanDataset ds;
    ds.feature_names.reserve(n_features);
    for (std::size_t j = 0; j < n_features; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.informative_indices = informative;
    ds.features = Matrix(n_benign + n_attack, n_features);
    ds.labels.assign(n_benign + n_attack, 0);

    std::vector<double> latent(n_latent);
    for (std::size_t i = 0; i < n_benign + n_attack; ++i) {
        const bool attack = i >= n_benign;
        for (double& z : latent) z = rng.normal();
        double* row = ds.features.row_ptr(i);
        for (std::size_t j = 0; j < n_features; ++j) {
            double v = noise_scale * rng.normal();
            for (std::size_t k = 0; k < n_latent; ++k) v += loadings(j, k) * latent[k];
            row[j] = v;
        }
        if (attack) {
            ds.labels[i] = 1;
            if (shift != 0.0)
                for (std::size_t j : informative) row[j] = shift * sigma[j] + sigma[j] * rng.normal();
        }
    }
    return ds;
}

// --- serialization: columnar CSV plus a JSON metadata sidecar -------------

inline std::string dataset_meta_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

inline void save_dataset(const CleanDataset& ds, const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("save_dataset: cannot write '" + csv_path + "'");
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        if (j) out << ',';
        out << ds.feature_names[j];
    }
    if (ds.has_labels()) out << ",label";
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(i, j));
            out << buf;
        }
        if (ds.has_labels()) out << ',' << ds.labels[i];
        out << '\n';
    }

    nlohmann::json meta;
    meta["feature_names"] = ds.feature_names;
    meta["informative_indices"] = ds.informative_indices;
    if (ds.scaler) {
        meta["scaler"] = {{"means", ds.scaler->means}, {"stds", ds.scaler->stds}};
    }
    std::ofstream mout(dataset_meta_path(csv_path));
    if (!mout) throw std::runtime_error("save_dataset: cannot write '" + dataset_meta_path(csv_path) + "'");
    mout << meta.dump(2) << '\n';
}

inline CleanDataset load_dataset(const std::string& csv_path) {
    std::optional<std::string> label_col;
    {
        std::ifstream probe(csv_path);
        std::string header;
        if (probe && std::getline(probe, header))
            for (const auto& name : detail::split_csv_record(header))
                if (detail::trim_copy(name) == "label") label_col = "label";
    }
    RawTable raw = load_csv(csv_path, label_col);
    CleanDataset ds = clean(raw, "0");
    std::ifstream min(dataset_meta_path(csv_path));
    if (min) {
        nlohmann::json meta = nlohmann::json::parse(min);
        if (meta.contains("informative_indices"))
            ds.informative_indices = meta["informative_indices"].get<std::vector<std::size_t>>();
        if (meta.contains("scaler")) {
            ScalerParams p;
            p.means = meta["scaler"]["means"].get<std::vector<double>>();
            p.stds = meta["scaler"]["stds"].get<std::vector<double>>();
            p.feature_names = ds.feature_names;
            ds.scaler = std::move(p);
        }
    }
    return ds;
}

}  // namespace netshap
