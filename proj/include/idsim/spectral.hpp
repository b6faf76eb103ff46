#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "idsim/ingest.hpp"

namespace idsim {

// Per-column statistics with the n-1 divisor.
struct ColumnStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
    std::vector<bool> zero_variance;
};

ColumnStats column_stats(const Eigen::MatrixXd& values);

struct Standardized {
    Eigen::MatrixXd values;
    ColumnStats stats;
};

// Centers every column and scales it to unit variance; zero-variance columns are only centered.
Standardized standardize(const Eigen::MatrixXd& values);
inline Standardized standardize(const FrequencyMatrix& matrix) { return standardize(matrix.values); }

// Thin SVD: A = U diag(S) V^T with r = min(n, m) singular values, non-increasing.
struct SvdResult {
    Eigen::MatrixXd U;
    Eigen::VectorXd S;
    Eigen::MatrixXd V;
};

SvdResult svd(const Eigen::MatrixXd& a);

// lambda_i = s_i^2 / (n - 1)
Eigen::VectorXd eigenvalues_from_singular(const Eigen::VectorXd& singular_values, Eigen::Index n);

// Indices with eigenvalue >= 1; the single largest component when none qualifies.
std::vector<std::size_t> kaiser_filter(const Eigen::VectorXd& eigenvalues);

struct EnergySelection {
    std::vector<std::size_t> components;
    double fraction_achieved = 0.0;
};

// Smallest prefix whose squared-singular-value share reaches `fraction`.
EnergySelection energy_retain(const Eigen::VectorXd& singular_values, double fraction);

struct SyscallSelection {
    std::vector<std::size_t> selected;
    Eigen::VectorXd scores;
};

// score_j = sum over components of s_i^2 * V(j, i)^2. Keeps columns scoring at least the mean,
// or the top `keep_count` when given (ties to the lower column index).
SyscallSelection select_syscalls(const Eigen::MatrixXd& V, const Eigen::VectorXd& singular_values,
                                 const std::vector<std::size_t>& components,
                                 std::optional<std::size_t> keep_count = std::nullopt);

FrequencyMatrix reduce_matrix(const FrequencyMatrix& matrix, std::vector<std::size_t> selected);

struct SpectralOptions {
    double energy_fraction = 0.90;
    bool kaiser = true;
    std::optional<std::size_t> keep_count;
};

struct SpectralReport {
    Eigen::VectorXd singular_values;
    Eigen::VectorXd eigenvalues;
    std::vector<std::size_t> kaiser_retained;
    std::vector<std::size_t> energy_retained;
    Eigen::VectorXd syscall_scores;
    std::vector<std::size_t> selected_columns;
    double energy_fraction_achieved = 0.0;
};

// standardize -> svd -> Kaiser filter -> energy prefix (within the Kaiser set) -> column scores.
SpectralReport analyze(const FrequencyMatrix& matrix, const SpectralOptions& options = {});

} // namespace idsim
