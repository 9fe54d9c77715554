// Model-agnostic KernelSHAP over the reconstruction-error value function.
// Coalition values are fit by a Shapley-kernel-weighted least-squares
// regression on membership indicators, with the empty and grand coalitions
// enforced as hard constraints via elimination. Exact mode enumerates all
// 2^d coalitions and reproduces the classical Shapley values of the game;
// sampled mode fills complete coalition-size classes while the budget
// allows and samples the rest proportionally to kernel mass.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "netshap/autoencoder.hpp"
#include "netshap/kmeans.hpp"
#include "netshap/linalg.hpp"
#include "netshap/rng.hpp"

namespace netshap {

// Feature subset; bit i set means feature i is taken from the explained
// instance rather than the background.
class Coalition {
public:
    explicit Coalition(std::size_t d) : bits_(d, 0) {}

    std::size_t dim() const { return bits_.size(); }
    bool contains(std::size_t i) const { return bits_[i] != 0; }
    void add(std::size_t i) { bits_[i] = 1; }

    std::size_t size() const {
        std::size_t s = 0;
        for (auto b : bits_) s += b;
        return s;
    }
    bool empty() const { return size() == 0; }
    bool full() const { return size() == dim(); }

    Coalition complement() const {
        Coalition c(dim());
        for (std::size_t i = 0; i < dim(); ++i) c.bits_[i] = bits_[i] ? 0 : 1;
        return c;
    }

    // integer mask with bit i == membership of feature i (dims <= 63)
    static Coalition from_mask(std::size_t d, std::uint64_t mask) {
        Coalition c(d);
        for (std::size_t i = 0; i < d; ++i) c.bits_[i] = (mask >> i) & 1u;
        return c;
    }
    std::uint64_t to_mask() const {
        std::uint64_t m = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            if (bits_[i]) m |= (std::uint64_t{1} << i);
        return m;
    }

    const std::vector<std::uint8_t>& members() const { return bits_; }
    bool operator==(const Coalition& other) const { return bits_ == other.bits_; }

private:
    std::vector<std::uint8_t> bits_;
};

struct CoalitionHash {
    std::size_t operator()(const Coalition& c) const {
        std::uint64_t h = 14695981039346656037ULL;
        for (auto b : c.members()) {
            h ^= b;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

enum class ExplainMode { kExact, kSampled };

struct ExplainerConfig {
    ExplainMode mode = ExplainMode::kExact;
    std::size_t sample_budget = 2048;  // total coalitions evaluated in sampled mode
    std::size_t kmeans_k = 10;
    std::uint64_t seed = 0;
};

struct ShapExplanation {
    std::vector<double> phi;
    double base_value = 0.0;  // value of the empty coalition
    double full_value = 0.0;  // value of the grand coalition
    std::size_t instance_index = 0;
    std::vector<std::string> feature_names;
};

// (M-1) / (C(M,s) * s * (M-s)); infinite at s in {0, M} where the
// coalition becomes a hard constraint instead of a regression row.
inline double shapley_kernel_weight(std::size_t m, std::size_t s) {
    if (m < 2 || s > m) throw std::invalid_argument("shapley_kernel_weight: need 0 <= s <= M, M >= 2");
    if (s == 0 || s == m) return std::numeric_limits<double>::infinity();
    double binom = 1.0;
    for (std::size_t i = 1; i <= s; ++i)
        binom *= static_cast<double>(m - s + i) / static_cast<double>(i);
    return static_cast<double>(m - 1) / (binom * static_cast<double>(s) * static_cast<double>(m - s));
}

inline std::vector<Coalition> enumerate_coalitions(std::size_t d) {
    if (d == 0) throw std::invalid_argument("enumerate_coalitions: d must be >= 1");
    if (d > 20)
        throw std::invalid_argument(
            "enumerate_coalitions: d > 20 would enumerate over 2^20 coalitions; use sampled mode");
    std::vector<Coalition> out;
    out.reserve(std::size_t{1} << d);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask)
        out.push_back(Coalition::from_mask(d, mask));
    return out;
}

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) c *= static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

// Regression rows: unique masks with 0 < |S| < d plus their weights. `raw`
// is the emission order (duplicates possible in sampled mode) with the
// empty and grand coalitions always present.
struct CoalitionBatch {
    std::vector<Coalition> raw;
    std::vector<Coalition> masks;
    std::vector<double> weights;
};

inline void append_unique(CoalitionBatch& batch, std::unordered_map<Coalition, std::size_t, CoalitionHash>& seen,
                          const Coalition& c, double weight) {
    auto [it, fresh] = seen.emplace(c, batch.masks.size());
    if (fresh) {
        batch.masks.push_back(c);
        batch.weights.push_back(weight);
    } else {
        batch.weights[it->second] += weight;
    }
}

inline CoalitionBatch build_coalitions(std::size_t d, ExplainMode mode, std::size_t budget, std::uint64_t seed) {
    CoalitionBatch batch;
    if (d == 0) throw std::invalid_argument("build_coalitions: d must be >= 1");

    if (mode == ExplainMode::kExact) {
        batch.raw = enumerate_coalitions(d);
        for (const auto& c : batch.raw) {
            const std::size_t s = c.size();
            if (s == 0 || s == d) continue;
            batch.masks.push_back(c);
            batch.weights.push_back(shapley_kernel_weight(d, s));
        }
        return batch;
    }

    if (budget < 4) throw std::invalid_argument("build_coalitions: sample budget must be >= 4");

    Coalition empty(d);
    Coalition grand = empty.complement();
    batch.raw.push_back(empty);
    batch.raw.push_back(grand);
    if (d == 1) return batch;  // no interior coalitions exist

    // size classes: representative s pairs with d-s; the middle class of an
    // even d is its own complement
    struct SizeClass {
        std::size_t s = 0;
        bool paired = false;
        double mass = 0.0;   // kernel mass of every mask in the class
        double count = 0.0;  // number of masks in the class
        bool complete = false;
    };
    std::vector<SizeClass> classes;
    for (std::size_t s = 1; s <= (d - 1) / 2; ++s) {
        const double mass = static_cast<double>(d - 1) / (static_cast<double>(s) * static_cast<double>(d - s));
        classes.push_back({s, true, 2.0 * mass, 2.0 * binomial(d, s), false});
    }
    if (d % 2 == 0) {
        const std::size_t s = d / 2;
        const double mass = static_cast<double>(d - 1) / (static_cast<double>(s) * static_cast<double>(d - s));
        classes.push_back({s, false, mass, binomial(d, s), false});
    }

    std::unordered_map<Coalition, std::size_t, CoalitionHash> seen;
    std::size_t remaining = budget - 2;

    auto next_combination = [d](std::vector<std::size_t>& idx) -> bool {
        const std::size_t s = idx.size();
        for (std::size_t i = s; i-- > 0;) {
            if (idx[i] + (s - i) < d) {
                ++idx[i];
                for (std::size_t q = i + 1; q < s; ++q) idx[q] = idx[q - 1] + 1;
                return true;
            }
        }
        return false;
    };

    // fill any size class that fits the remaining budget with every one of
    // its masks at the exact kernel weight
    for (auto& cls : classes) {
        if (cls.count > static_cast<double>(remaining)) continue;
        const double w = shapley_kernel_weight(d, cls.s);
        std::vector<std::size_t> idx(cls.s);
        for (std::size_t i = 0; i < cls.s; ++i) idx[i] = i;
        do {
            Coalition c(d);
            for (std::size_t i : idx) c.add(i);
            batch.raw.push_back(c);
            append_unique(batch, seen, c, w);
            if (cls.paired) {
                const Coalition comp = c.complement();
                batch.raw.push_back(comp);
                append_unique(batch, seen, comp, w);
            }
        } while (next_combination(idx));
        cls.complete = true;
        remaining -= static_cast<std::size_t>(cls.count);
    }

    // sample the incomplete classes proportionally to their kernel mass,
    // pairing every mask with its complement; duplicates merge by count
    double mass_incomplete = 0.0;
    for (const auto& cls : classes)
        if (!cls.complete) mass_incomplete += cls.mass;

    if (remaining > 0 && mass_incomplete > 0.0) {
        Rng rng(seed);
        std::vector<double> cumulative;
        std::vector<std::size_t> class_of;
        double acc = 0.0;
        for (std::size_t ci = 0; ci < classes.size(); ++ci) {
            if (classes[ci].complete) continue;
            acc += classes[ci].mass;
            cumulative.push_back(acc);
            class_of.push_back(ci);
        }

        std::vector<std::size_t> all_indices(d);
        for (std::size_t i = 0; i < d; ++i) all_indices[i] = i;

        std::unordered_map<Coalition, std::size_t, CoalitionHash> counts;
        std::vector<Coalition> sampled_order;
        std::size_t n_samples = 0;
        while (remaining > 0) {
            const double target = rng.uniform() * acc;
            std::size_t pick = 0;
            while (pick + 1 < cumulative.size() && cumulative[pick] < target) ++pick;
            const std::size_t s = classes[class_of[pick]].s;

            // partial Fisher-Yates draw of s distinct indices
            for (std::size_t i = 0; i < s; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.index(d - i));
                std::swap(all_indices[i], all_indices[j]);
            }
            Coalition c(d);
            for (std::size_t i = 0; i < s; ++i) c.add(all_indices[i]);

            auto emit = [&](const Coalition& mask) {
                batch.raw.push_back(mask);
                auto [it, fresh] = counts.emplace(mask, 1);
                if (fresh)
                    sampled_order.push_back(mask);
                else
                    ++it->second;
                ++n_samples;
                --remaining;
            };
            emit(c);
            if (remaining > 0) emit(c.complement());
        }

        const double per_sample = mass_incomplete / static_cast<double>(n_samples);
        for (const auto& c : sampled_order)
            append_unique(batch, seen, c, static_cast<double>(counts.at(c)) * per_sample);
    }
    return batch;
}

}  // namespace detail

// Kernel-mass-driven coalition sample: sizes drawn proportionally to the
// Shapley kernel mass per size (classes that fit the budget are enumerated
// outright), each sampled mask paired with its complement, the empty and
// grand coalitions always present. Duplicates are possible and merge by
// weight when the regression is assembled.
inline std::vector<Coalition> sample_coalitions(std::size_t d, std::size_t budget, std::uint64_t seed) {
    if (budget < 4) throw std::invalid_argument("sample_coalitions: budget must be >= 4");
    return detail::build_coalitions(d, ExplainMode::kSampled, budget, seed).raw;
}

// Eq-style coalition value: background features replace the complement of
// S, and the weighted mean reconstruction error is scaled by 1/d.
inline double value_function(const AEModel& model, std::span<const double> x, const Coalition& s,
                             const BackgroundSet& bg) {
    const std::size_t d = model.input_dim;
    if (x.size() != d || s.dim() != d || bg.dim() != d)
        throw std::invalid_argument("value_function: dimension mismatch");
    if (s.full()) return reconstruction_error(model, x) / static_cast<double>(d);

    Matrix hybrids(bg.size(), d);
    for (std::size_t j = 0; j < bg.size(); ++j) {
        double* row = hybrids.row_ptr(j);
        const double* b = bg.points.row_ptr(j);
        for (std::size_t i = 0; i < d; ++i) row[i] = s.contains(i) ? x[i] : b[i];
    }
    const Matrix out = forward_batch(model, hybrids);
    double v = 0.0;
    for (std::size_t j = 0; j < bg.size(); ++j) v += bg.weights[j] * mse(out.row(j), hybrids.row(j));
    return v / static_cast<double>(d);
}

namespace detail {

// Batched coalition values; hybrids are evaluated in chunks so memory stays
// bounded for large coalition sets.
inline std::vector<double> value_function_batch(const AEModel& model, std::span<const double> x,
                                                const std::vector<Coalition>& masks, const BackgroundSet& bg) {
    const std::size_t d = model.input_dim;
    const std::size_t k = bg.size();
    std::vector<double> values(masks.size(), 0.0);
    const std::size_t coal_per_chunk = std::max<std::size_t>(1, 8192 / std::max<std::size_t>(k, 1));

    for (std::size_t begin = 0; begin < masks.size(); begin += coal_per_chunk) {
        const std::size_t count = std::min(coal_per_chunk, masks.size() - begin);
        Matrix hybrids(count * k, d);
        for (std::size_t c = 0; c < count; ++c) {
            const auto& mask = masks[begin + c];
            for (std::size_t j = 0; j < k; ++j) {
                double* row = hybrids.row_ptr(c * k + j);
                const double* b = bg.points.row_ptr(j);
                for (std::size_t i = 0; i < d; ++i) row[i] = mask.contains(i) ? x[i] : b[i];
            }
        }
        const Matrix out = forward_batch(model, hybrids);
        for (std::size_t c = 0; c < count; ++c) {
            double v = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                v += bg.weights[j] * mse(out.row(c * k + j), hybrids.row(c * k + j));
            values[begin + c] = v / static_cast<double>(d);
        }
    }
    return values;
}

// Weighted least squares on membership indicators with the two hard
// constraints handled by elimination: phi_0(empty) = v_empty and
// sum(phi) = v_full - v_empty. The last feature is substituted out, so
// local accuracy holds to arithmetic precision in every mode.
inline ShapExplanation solve_kernel_regression(std::size_t d, const std::vector<Coalition>& masks,
                                               const std::vector<double>& weights,
                                               const std::vector<double>& values, double v_empty, double v_full) {
    ShapExplanation ex;
    ex.base_value = v_empty;
    ex.full_value = v_full;
    const double delta = v_full - v_empty;
    if (d == 1) {
        ex.phi = {delta};
        return ex;
    }

    const std::size_t p = d - 1;
    Matrix a(p, p);
    std::vector<double> rhs(p, 0.0);
    std::vector<double> design(p);

    for (std::size_t r = 0; r < masks.size(); ++r) {
        const auto& mask = masks[r];
        const double w = weights[r];
        if (w <= 0.0) continue;
        const double z_last = mask.contains(d - 1) ? 1.0 : 0.0;
        for (std::size_t j = 0; j < p; ++j) design[j] = (mask.contains(j) ? 1.0 : 0.0) - z_last;
        const double y = values[r] - v_empty - z_last * delta;
        for (std::size_t i = 0; i < p; ++i) {
            const double di = design[i];
            if (di == 0.0) continue;
            const double wdi = w * di;
            rhs[i] += wdi * y;
            double* arow = a.row_ptr(i);
            for (std::size_t j = i; j < p; ++j) arow[j] += wdi * design[j];
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);

    std::vector<double> phi_head;
    if (!solve_linear(a, rhs, phi_head)) {
        for (std::size_t i = 0; i < p; ++i) a(i, i) += 1e-10;  // jitter retry
        if (!solve_linear(a, rhs, phi_head))
            throw std::runtime_error(
                "kernel regression is singular: too few distinct coalitions for the feature count "
                "(increase the sample budget)");
    }

    ex.phi = std::move(phi_head);
    double head_sum = 0.0;
    for (double v : ex.phi) head_sum += v;
    ex.phi.push_back(delta - head_sum);
    return ex;
}

}  // namespace detail

// KernelSHAP for an arbitrary set game; the autoencoder path wraps this
// with the reconstruction-error value function.
inline ShapExplanation explain_game(std::size_t d, const std::function<double(const Coalition&)>& game,
                                    const ExplainerConfig& cfg) {
    const auto batch = detail::build_coalitions(d, cfg.mode, cfg.sample_budget, cfg.seed);
    Coalition empty(d);
    const double v_empty = game(empty);
    const double v_full = game(empty.complement());
    std::vector<double> values(batch.masks.size());
    for (std::size_t i = 0; i < batch.masks.size(); ++i) values[i] = game(batch.masks[i]);
    return detail::solve_kernel_regression(d, batch.masks, batch.weights, values, v_empty, v_full);
}

inline ShapExplanation explain_instance(const AEModel& model, std::span<const double> x, const BackgroundSet& bg,
                                        const ExplainerConfig& cfg) {
    const std::size_t d = model.input_dim;
    if (x.size() != d || bg.dim() != d) throw std::invalid_argument("explain_instance: dimension mismatch");

    const auto batch = detail::build_coalitions(d, cfg.mode, cfg.sample_budget, cfg.seed);
    Coalition empty(d);
    const double v_empty = value_function(model, x, empty, bg);
    const double v_full = value_function(model, x, empty.complement(), bg);
    const auto values = detail::value_function_batch(model, x, batch.masks, bg);
    return detail::solve_kernel_regression(d, batch.masks, batch.weights, values, v_empty, v_full);
}

// One explanation per row. Per-instance seeds are cfg.seed xor row index,
// so results do not depend on evaluation order or thread count.
inline std::vector<ShapExplanation> explain_batch(const AEModel& model, const CleanDataset& instances,
                                                  const BackgroundSet& bg, const ExplainerConfig& cfg,
                                                  std::size_t n_threads = 1) {
    const std::size_t n = instances.n_rows();
    std::vector<ShapExplanation> out(n);
    if (n == 0) return out;

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < n; i += stride) {
            ExplainerConfig local = cfg;
            local.seed = cfg.seed ^ static_cast<std::uint64_t>(i);
            ShapExplanation ex = explain_instance(model, instances.features.row(i), bg, local);
            ex.instance_index = i;
            ex.feature_names = instances.feature_names;
            out[i] = std::move(ex);
        }
    };

    if (n_threads <= 1 || n == 1) {
        work(0, 1);
    } else {
        const std::size_t workers = std::min(n_threads, n);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace netshap
