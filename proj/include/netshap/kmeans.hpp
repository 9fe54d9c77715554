// Seeded k-means++ / Lloyd summarization of a background sample. Cluster
// populations become mixture weights so the summarized set preserves the
// game the explainer plays against.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "netshap/linalg.hpp"
#include "netshap/rng.hpp"

namespace netshap {

struct BackgroundSet {
    Matrix points;                // k x d representative instances
    std::vector<double> weights;  // non-negative, sums to 1
    std::size_t source_count = 0;

    std::size_t size() const { return points.rows; }
    std::size_t dim() const { return points.cols; }
};

namespace detail {

inline double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

}  // namespace detail

inline BackgroundSet kmeans_summarize(const Matrix& data, std::size_t k, std::uint64_t seed) {
    const std::size_t n = data.rows, d = data.cols;
    if (k == 0 || n < k) throw std::invalid_argument("kmeans_summarize: need n >= k >= 1");

    Rng rng(seed);
    Matrix centroids(k, d);
    std::vector<char> chosen(n, 0);

    // k-means++ seeding: D^2 sampling; exact duplicates fall back to a
    // uniform draw among the not-yet-chosen points.
    {
        const std::size_t first = static_cast<std::size_t>(rng.index(n));
        std::copy_n(data.row_ptr(first), d, centroids.row_ptr(0));
        chosen[first] = 1;
        std::vector<double> dist2(n, std::numeric_limits<double>::max());
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dist2[i] = std::min(dist2[i], detail::sq_dist(data.row_ptr(i), centroids.row_ptr(c - 1), d));
                total += dist2[i];
            }
            std::size_t pick = n;
            if (total > 0.0) {
                const double target = rng.uniform() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += dist2[i];
                    if (acc >= target) {
                        pick = i;
                        break;
                    }
                }
                if (pick == n) pick = n - 1;
            } else {
                std::vector<std::size_t> free_idx;
                for (std::size_t i = 0; i < n; ++i)
                    if (!chosen[i]) free_idx.push_back(i);
                pick = free_idx[static_cast<std::size_t>(rng.index(free_idx.size()))];
            }
            std::copy_n(data.row_ptr(pick), d, centroids.row_ptr(c));
            chosen[pick] = 1;
        }
    }

    std::vector<std::size_t> assignment(n, 0);
    std::vector<std::size_t> counts(k, 0);
    constexpr std::size_t kMaxIter = 300;
    constexpr double kTol = 1e-6;

    for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            std::size_t best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d2 = detail::sq_dist(data.row_ptr(i), centroids.row_ptr(c), d);
                if (d2 < best) {
                    best = d2;
                    best_c = c;
                }
            }
            assignment[i] = best_c;
        }

        Matrix next(k, d);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double* crow = next.row_ptr(assignment[i]);
            const double* row = data.row_ptr(i);
            for (std::size_t j = 0; j < d; ++j) crow[j] += row[j];
            ++counts[assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed an empty cluster at the point farthest from its
                // assigned centroid
                double worst = -1.0;
                std::size_t far_i = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d2 =
                        detail::sq_dist(data.row_ptr(i), centroids.row_ptr(assignment[i]), d);
                    if (d2 > worst) {
                        worst = d2;
                        far_i = i;
                    }
                }
                std::copy_n(data.row_ptr(far_i), d, next.row_ptr(c));
                counts[c] = 1;
                assignment[far_i] = c;
            } else {
                double* crow = next.row_ptr(c);
                for (std::size_t j = 0; j < d; ++j) crow[j] /= static_cast<double>(counts[c]);
            }
        }

        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            movement = std::max(movement, std::sqrt(detail::sq_dist(next.row_ptr(c), centroids.row_ptr(c), d)));
        centroids = std::move(next);
        if (movement < kTol) break;
    }

    // final assignment for population weights
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::max();
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double d2 = detail::sq_dist(data.row_ptr(i), centroids.row_ptr(c), d);
            if (d2 < best) {
                best = d2;
                best_c = c;
            }
        }
        ++counts[best_c];
    }

    BackgroundSet bg;
    bg.points = std::move(centroids);
    bg.weights.resize(k);
    for (std::size_t c = 0; c < k; ++c) bg.weights[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    bg.source_count = n;
    return bg;
}

}  // namespace netshap
