// Fully-connected autoencoder trained by mini-batch backpropagation with
// adaptive-moment updates. Hidden layers use relu, the output layer is
// linear (inputs are standardized and can be negative). The per-instance
// mean squared reconstruction error is the anomaly score.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "netshap/dataset.hpp"
#include "netshap/linalg.hpp"
#include "netshap/rng.hpp"

namespace netshap {

struct AEConfig {
    std::vector<std::size_t> hidden_layers{50, 20, 8, 20, 50};
    std::size_t epochs = 100;
    double learning_rate = 0.001;
    std::size_t batch_size = 8192;
    std::string hidden_activation = "relu";
    std::string output_activation = "linear";
    std::uint64_t seed = 0;

    void validate() const {
        if (hidden_layers.empty()) throw std::invalid_argument("AEConfig: hidden_layers must be non-empty");
        for (std::size_t h : hidden_layers)
            if (h == 0) throw std::invalid_argument("AEConfig: hidden layer sizes must be positive");
        if (epochs == 0 || batch_size == 0 || !(learning_rate > 0.0))
            throw std::invalid_argument("AEConfig: epochs, batch_size, learning_rate must be positive");
        if (hidden_activation != "relu")
            throw std::invalid_argument("AEConfig: unsupported hidden activation '" + hidden_activation + "'");
        if (output_activation != "linear")
            throw std::invalid_argument("AEConfig: unsupported output activation '" + output_activation + "'");
    }
};

struct AEModel {
    std::vector<Matrix> weights;               // layer l: [in_l x out_l]
    std::vector<std::vector<double>> biases;   // layer l: out_l
    AEConfig config;
    std::size_t input_dim = 0;

    std::size_t n_layers() const { return weights.size(); }

    // input_dim -> hidden_layers... -> input_dim
    std::vector<std::size_t> layer_dims() const {
        std::vector<std::size_t> dims{input_dim};
        dims.insert(dims.end(), config.hidden_layers.begin(), config.hidden_layers.end());
        dims.push_back(input_dim);
        return dims;
    }
};

struct TrainReport {
    std::vector<double> loss_history;  // per-epoch mean training MSE
    double final_validation_mse = 0.0;
};

// Symmetric uniform init scaled by fan-in + fan-out, biases zero.
inline AEModel make_autoencoder(const AEConfig& config, std::size_t input_dim) {
    config.validate();
    if (input_dim == 0) throw std::invalid_argument("make_autoencoder: input_dim must be >= 1");

    AEModel model;
    model.config = config;
    model.input_dim = input_dim;
    const auto dims = model.layer_dims();

    Rng rng(config.seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (double& v : w.data) v = rng.uniform(-limit, limit);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

// Batched affine-then-activation pass; relu between hidden layers, linear
// output. No finiteness scan here -- callers that need it check results.
inline Matrix forward_batch(const AEModel& model, const Matrix& x) {
    if (x.cols != model.input_dim) throw std::invalid_argument("forward_batch: input width mismatch");
    Matrix act = x;
    Matrix next;
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        const Matrix& w = model.weights[l];
        next = Matrix(act.rows, w.cols);
        matmul(act, w, next);
        const auto& bias = model.biases[l];
        const bool hidden = l + 1 < model.n_layers();
        for (std::size_t i = 0; i < next.rows; ++i) {
            double* row = next.row_ptr(i);
            for (std::size_t j = 0; j < w.cols; ++j) {
                double v = row[j] + bias[j];
                if (hidden && v < 0.0) v = 0.0;
                row[j] = v;
            }
        }
        act = std::move(next);
    }
    return act;
}

inline std::vector<double> forward(const AEModel& model, std::span<const double> x) {
    if (x.size() != model.input_dim) throw std::invalid_argument("forward: input width mismatch");
    Matrix in(1, model.input_dim);
    std::copy(x.begin(), x.end(), in.data.begin());
    Matrix out = forward_batch(model, in);
    if (!out.all_finite()) throw std::runtime_error("forward: non-finite activation (numerical blow-up)");
    return std::move(out.data);
}

// Eq-style anomaly score: (1/N) * sum_i (xhat_i - x_i)^2.
inline double mse(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

inline double reconstruction_error(const AEModel& model, std::span<const double> x) {
    const auto xhat = forward(model, x);
    return mse(xhat, x);
}

inline std::vector<double> score_batch(const AEModel& model, const CleanDataset& ds) {
    if (ds.n_features() != model.input_dim)
        throw std::invalid_argument("score_batch: dataset width does not match model input_dim");
    constexpr std::size_t kChunk = 2048;
    std::vector<double> scores(ds.n_rows());
    for (std::size_t begin = 0; begin < ds.n_rows(); begin += kChunk) {
        const std::size_t rows = std::min(kChunk, ds.n_rows() - begin);
        Matrix chunk(rows, ds.n_features());
        std::copy_n(ds.features.row_ptr(begin), rows * ds.n_features(), chunk.data.begin());
        const Matrix out = forward_batch(model, chunk);
        for (std::size_t i = 0; i < rows; ++i) {
            const double s = mse(out.row(i), chunk.row(i));
            if (!std::isfinite(s)) throw std::runtime_error("score_batch: non-finite score (numerical blow-up)");
            scores[begin + i] = s;
        }
    }
    return scores;
}

struct AEGradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    explicit AEGradients(const AEModel& model) {
        for (std::size_t l = 0; l < model.n_layers(); ++l) {
            weights.emplace_back(model.weights[l].rows, model.weights[l].cols);
            biases.emplace_back(model.biases[l].size(), 0.0);
        }
    }
};

// Loss over the batch (mean over rows of per-row MSE) together with its
// analytic parameter gradients. Exposed so the finite-difference check can
// exercise exactly what training uses.
inline double batch_loss_and_gradients(const AEModel& model, const Matrix& batch, AEGradients& grads) {
    const std::size_t n_layers = model.n_layers();
    const std::size_t b = batch.rows;
    const double n = static_cast<double>(model.input_dim);

    // forward, keeping activations per layer (post-activation)
    std::vector<Matrix> acts;
    acts.reserve(n_layers + 1);
    acts.push_back(batch);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Matrix& w = model.weights[l];
        Matrix out(b, w.cols);
        matmul(acts.back(), w, out);
        const auto& bias = model.biases[l];
        const bool hidden = l + 1 < n_layers;
        for (std::size_t i = 0; i < b; ++i) {
            double* row = out.row_ptr(i);
            for (std::size_t j = 0; j < w.cols; ++j) {
                double v = row[j] + bias[j];
                if (hidden && v < 0.0) v = 0.0;
                row[j] = v;
            }
        }
        acts.push_back(std::move(out));
    }

    double loss = 0.0;
    Matrix delta(b, model.input_dim);
    const double grad_scale = 2.0 / (static_cast<double>(b) * n);
    for (std::size_t i = 0; i < b; ++i) {
        const double* xhat = acts.back().row_ptr(i);
        const double* x = batch.row_ptr(i);
        double* drow = delta.row_ptr(i);
        for (std::size_t j = 0; j < model.input_dim; ++j) {
            const double r = xhat[j] - x[j];
            loss += r * r;
            drow[j] = grad_scale * r;
        }
    }
    loss /= static_cast<double>(b) * n;

    for (std::size_t l = n_layers; l-- > 0;) {
        Matrix& gw = grads.weights[l];
        std::fill(gw.data.begin(), gw.data.end(), 0.0);
        add_At_B(acts[l], delta, gw);
        auto& gb = grads.biases[l];
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t i = 0; i < b; ++i) {
            const double* drow = delta.row_ptr(i);
            for (std::size_t j = 0; j < gb.size(); ++j) gb[j] += drow[j];
        }
        if (l == 0) break;
        Matrix prev(b, model.weights[l].rows);
        matmul_A_Bt(delta, model.weights[l], prev);
        // relu mask: the stored activation is zero exactly where it clipped
        for (std::size_t i = 0; i < b; ++i) {
            const double* arow = acts[l].row_ptr(i);
            double* prow = prev.row_ptr(i);
            for (std::size_t j = 0; j < prev.cols; ++j)
                if (arow[j] <= 0.0) prow[j] = 0.0;
        }
        delta = std::move(prev);
    }
    return loss;
}

// Mini-batch training with per-epoch seeded shuffling and adaptive-moment
// per-parameter steps (decay 0.9/0.999, eps 1e-8). The last incomplete
// batch is used. Labels, if any, are ignored.
inline TrainReport train(AEModel& model, const CleanDataset& train_ds, const CleanDataset& val_ds) {
    model.config.validate();
    if (train_ds.n_features() != model.input_dim || val_ds.n_features() != model.input_dim)
        throw std::invalid_argument("train: dataset width does not match model input_dim");
    if (train_ds.n_rows() == 0) throw std::invalid_argument("train: empty training set");

    const AEConfig& cfg = model.config;
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

    AEGradients grads(model), m(model), v(model);
    std::uint64_t step = 0;

    std::vector<std::size_t> order(train_ds.n_rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, "train-shuffle"));

    TrainReport report;
    report.loss_history.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
            const std::size_t rows = std::min(cfg.batch_size, order.size() - begin);
            Matrix batch(rows, model.input_dim);
            for (std::size_t i = 0; i < rows; ++i)
                std::copy_n(train_ds.features.row_ptr(order[begin + i]), model.input_dim, batch.row_ptr(i));

            const double loss = batch_loss_and_gradients(model, batch, grads);
            if (!std::isfinite(loss))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batch_index));
            epoch_loss += loss * static_cast<double>(rows);

            ++step;
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            for (std::size_t l = 0; l < model.n_layers(); ++l) {
                auto update = [&](double& w, double g, double& mm, double& vv) {
                    mm = kBeta1 * mm + (1.0 - kBeta1) * g;
                    vv = kBeta2 * vv + (1.0 - kBeta2) * g * g;
                    w -= cfg.learning_rate * (mm / bc1) / (std::sqrt(vv / bc2) + kEps);
                };
                for (std::size_t i = 0; i < model.weights[l].data.size(); ++i)
                    update(model.weights[l].data[i], grads.weights[l].data[i], m.weights[l].data[i],
                           v.weights[l].data[i]);
                for (std::size_t i = 0; i < model.biases[l].size(); ++i)
                    update(model.biases[l][i], grads.biases[l][i], m.biases[l][i], v.biases[l][i]);
            }
        }
        report.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
    }

    const auto val_scores = score_batch(model, val_ds);
    report.final_validation_mse =
        std::accumulate(val_scores.begin(), val_scores.end(), 0.0) / static_cast<double>(val_scores.size());
    return report;
}

// --- checkpointing ---------------------------------------------------------

inline void save_model(const AEModel& model, const std::vector<std::string>& feature_names,
                       const std::string& path) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["input_dim"] = model.input_dim;
    j["feature_names"] = feature_names;
    j["config"] = {{"hidden_layers", model.config.hidden_layers},
                   {"epochs", model.config.epochs},
                   {"learning_rate", model.config.learning_rate},
                   {"batch_size", model.config.batch_size},
                   {"hidden_activation", model.config.hidden_activation},
                   {"output_activation", model.config.output_activation},
                   {"seed", model.config.seed}};
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        layers.push_back({{"rows", model.weights[l].rows},
                          {"cols", model.weights[l].cols},
                          {"weights", model.weights[l].data},
                          {"biases", model.biases[l]}});
    }
    j["layers"] = std::move(layers);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

struct LoadedModel {
    AEModel model;
    std::vector<std::string> feature_names;
};

inline LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("load_model: unsupported checkpoint version in '" + path + "'");

    LoadedModel loaded;
    loaded.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    AEModel& model = loaded.model;
    model.input_dim = j.at("input_dim").get<std::size_t>();
    const auto& jc = j.at("config");
    model.config.hidden_layers = jc.at("hidden_layers").get<std::vector<std::size_t>>();
    model.config.epochs = jc.at("epochs").get<std::size_t>();
    model.config.learning_rate = jc.at("learning_rate").get<double>();
    model.config.batch_size = jc.at("batch_size").get<std::size_t>();
    model.config.hidden_activation = jc.at("hidden_activation").get<std::string>();
    model.config.output_activation = jc.at("output_activation").get<std::string>();
    model.config.seed = jc.at("seed").get<std::uint64_t>();

    for (const auto& layer : j.at("layers")) {
        Matrix w(layer.at("rows").get<std::size_t>(), layer.at("cols").get<std::size_t>());
        w.data = layer.at("weights").get<std::vector<double>>();
        if (w.data.size() != w.rows * w.cols) throw std::runtime_error("load_model: corrupt layer in '" + path + "'");
        model.weights.push_back(std::move(w));
        model.biases.push_back(layer.at("biases").get<std::vector<double>>());
    }
    if (!model.weights.empty() &&
        (model.weights.front().rows != model.input_dim || model.weights.back().cols != model.input_dim))
        throw std::runtime_error("load_model: layer dimensions do not chain to input_dim in '" + path + "'");
    return loaded;
}

}  // namespace netshap
