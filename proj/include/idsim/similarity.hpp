#pragma once

// Similarity measures over non-negative feature vectors.
//
// IDSIM is a Gaussian kernel gated by feature existence: a feature takes part
// only when it is present (> 0) in the sample or in the reference vector. The
// reference plays the role of the mean, and sigma is the per-feature standard
// deviation of the training set. The exponent divides by sigma, not sigma^2.
//
//   G(x, mu, sigma) = exp(-(x - mu)^2 / sigma)   if x > 0 or mu > 0, else 0
//   H(x, mu)        = 1                          if x > 0 or mu > 0, else 0
//   F_avg           = sum_s G / sum_s H          (0 when no feature exists)
//   IDSIM           = (1 + F_avg) / 2            (0 when no feature exists)
//
// Kernels accept any Eigen vector expression (rows, columns, blocks).

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "idsim/error.hpp"

namespace idsim {

inline constexpr double kDefaultSigmaFloor = 1e-6;

// Per-feature mean and spread of the training set.
struct FeatureStats {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma;
    double sigma_floor = kDefaultSigmaFloor;

    // Column means and n-1 standard deviations (sigma = 0 when n < 2).
    static FeatureStats from_matrix(const Eigen::MatrixXd& values, double sigma_floor = kDefaultSigmaFloor);

    Eigen::VectorXd effective_sigma() const { return sigma.cwiseMax(sigma_floor); }
    Eigen::Index size() const noexcept { return sigma.size(); }
};

enum class MeasureKind { idsim, cosine, jaccard };

std::string to_string(MeasureKind kind);
MeasureKind parse_measure_kind(std::string_view name);

namespace detail {

template <typename A, typename B>
void require_same_length(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.size() != b.size()) {
        throw ValidationError("vector length mismatch: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
}

} // namespace detail

inline bool exists_indicator(double x, double mu) { return x > 0.0 || mu > 0.0; }

// Caller guarantees sigma > 0.
inline double gaussian_term(double x, double mu, double sigma) {
    if (!exists_indicator(x, mu)) return 0.0;
    const double d = x - mu;
    return std::exp(-(d * d) / sigma);
}

// `sigma` must already be floored (see FeatureStats::effective_sigma).
template <typename S, typename R, typename G>
double f_avg(const Eigen::MatrixBase<S>& sample, const Eigen::MatrixBase<R>& reference,
             const Eigen::MatrixBase<G>& sigma) {
    detail::require_same_length(sample, reference);
    detail::require_same_length(sample, sigma);
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index s = 0; s < sample.size(); ++s) {
        const double x = sample.coeff(s);
        const double mu = reference.coeff(s);
        if (!exists_indicator(x, mu)) continue;
        num += gaussian_term(x, mu, sigma.coeff(s));
        den += 1.0;
    }
    return den > 0.0 ? num / den : 0.0;
}

template <typename S, typename R>
double f_avg(const Eigen::MatrixBase<S>& sample, const Eigen::MatrixBase<R>& reference, const FeatureStats& stats) {
    return f_avg(sample, reference, stats.effective_sigma());
}

template <typename S, typename R, typename G>
double idsim(const Eigen::MatrixBase<S>& sample, const Eigen::MatrixBase<R>& reference,
             const Eigen::MatrixBase<G>& sigma) {
    detail::require_same_length(sample, reference);
    bool any = false;
    for (Eigen::Index s = 0; s < sample.size() && !any; ++s) {
        any = exists_indicator(sample.coeff(s), reference.coeff(s));
    }
    if (!any) return 0.0;
    return (1.0 + f_avg(sample, reference, sigma)) / 2.0;
}

template <typename S, typename R>
double idsim(const Eigen::MatrixBase<S>& sample, const Eigen::MatrixBase<R>& reference, const FeatureStats& stats) {
    return idsim(sample, reference, stats.effective_sigma());
}

template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    detail::require_same_length(a, b);
    // One fused loop: for a == b the three sums are bitwise equal, so the result is exactly 1.
    double dot = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double x = a.coeff(i);
        const double y = b.coeff(i);
        dot += x * y;
        aa += x * x;
        bb += y * y;
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(aa * bb), 0.0, 1.0);
}

// Entries are thresholded at > 0. Two empty sets are identical (1).
template <typename A, typename B>
double jaccard(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    detail::require_same_length(a, b);
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const bool x = a.coeff(i) > 0.0;
        const bool y = b.coeff(i) > 0.0;
        inter += (x && y) ? 1 : 0;
        uni += (x || y) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Immutable measure: kind plus the training statistics IDSIM needs.
class SimilarityMeasure {
public:
    explicit SimilarityMeasure(MeasureKind kind, FeatureStats stats = {})
        : kind_(kind), stats_(std::move(stats)), sigma_(stats_.effective_sigma()) {
        if (kind_ == MeasureKind::idsim && stats_.size() == 0) {
            throw ConfigError("idsim requires feature statistics");
        }
        if (stats_.mu.size() != stats_.sigma.size()) throw ConfigError("feature statistics length mismatch");
        if (!(stats_.sigma_floor > 0.0)) throw ConfigError("sigma floor must be positive");
    }

    MeasureKind kind() const noexcept { return kind_; }
    const FeatureStats& stats() const noexcept { return stats_; }

    template <typename A, typename B>
    double similarity(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
        switch (kind_) {
        case MeasureKind::idsim:
            detail::require_same_length(a, sigma_);
            return idsim(a, b, sigma_);
        case MeasureKind::cosine: return cosine(a, b);
        case MeasureKind::jaccard: return jaccard(a, b);
        }
        return 0.0;
    }

    // 1 - similarity, in [0, 1].
    template <typename A, typename B>
    double distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
        return 1.0 - similarity(a, b);
    }

private:
    MeasureKind kind_;
    FeatureStats stats_;
    Eigen::VectorXd sigma_;
};

} // namespace idsim
