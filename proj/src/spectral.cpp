#include "idsim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idsim/error.hpp"

namespace idsim {

ColumnStats column_stats(const Eigen::MatrixXd& values) {
    const Eigen::Index n = values.rows();
    if (n < 2) throw ValidationError("insufficient samples: need at least 2 rows, got " + std::to_string(n));
    ColumnStats stats;
    stats.mean = values.colwise().mean().transpose();
    stats.stddev.resize(values.cols());
    stats.zero_variance.resize(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const double ss = (values.col(j).array() - stats.mean(j)).square().sum();
        stats.stddev(j) = std::sqrt(ss / static_cast<double>(n - 1));
        stats.zero_variance[static_cast<std::size_t>(j)] = stats.stddev(j) == 0.0;
    }
    return stats;
}

Standardized standardize(const Eigen::MatrixXd& values) {
    Standardized out{values, column_stats(values)};
    out.values.rowwise() -= out.stats.mean.transpose();
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        if (!out.stats.zero_variance[static_cast<std::size_t>(j)]) {
            out.values.col(j) /= out.stats.stddev(j);
        }
    }
    return out;
}

SvdResult svd(const Eigen::MatrixXd& a) {
    if (!a.allFinite()) throw ValidationError("svd input has non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXd> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Eigen::VectorXd eigenvalues_from_singular(const Eigen::VectorXd& singular_values, Eigen::Index n) {
    if (n < 2) throw ValidationError("insufficient samples: need at least 2 rows");
    return singular_values.array().square() / static_cast<double>(n - 1);
}

std::vector<std::size_t> kaiser_filter(const Eigen::VectorXd& eigenvalues) {
    if (eigenvalues.size() == 0) throw ValidationError("kaiser_filter: no eigenvalues");
    std::vector<std::size_t> kept;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues(i) >= 1.0) kept.push_back(static_cast<std::size_t>(i));
    }
    if (kept.empty()) {
        Eigen::Index best = 0;
        eigenvalues.maxCoeff(&best);
        kept.push_back(static_cast<std::size_t>(best));
    }
    return kept;
}

EnergySelection energy_retain(const Eigen::VectorXd& singular_values, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("energy fraction out of range (0, 1]");
    const Eigen::VectorXd energy = singular_values.array().square();
    // Sequential sum so the full prefix reproduces `total` bit for bit.
    double total = 0.0;
    for (Eigen::Index i = 0; i < energy.size(); ++i) total += energy(i);
    if (!(total > 0.0)) throw ValidationError("zero-energy matrix");

    EnergySelection sel;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < energy.size(); ++i) {
        acc += energy(i);
        sel.components.push_back(static_cast<std::size_t>(i));
        if (acc / total >= fraction) break;
    }
    sel.fraction_achieved = std::min(1.0, acc / total);
    return sel;
}

SyscallSelection select_syscalls(const Eigen::MatrixXd& V, const Eigen::VectorXd& singular_values,
                                 const std::vector<std::size_t>& components,
                                 std::optional<std::size_t> keep_count) {
    if (components.empty()) throw ValidationError("select_syscalls: no components");
    SyscallSelection out;
    out.scores = Eigen::VectorXd::Zero(V.rows());
    for (auto c : components) {
        const auto i = static_cast<Eigen::Index>(c);
        const double s2 = singular_values(i) * singular_values(i);
        out.scores += s2 * V.col(i).array().square().matrix();
    }

    const auto m = static_cast<std::size_t>(V.rows());
    if (keep_count) {
        if (*keep_count == 0) throw ConfigError("keep_count must be positive");
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return out.scores(static_cast<Eigen::Index>(a)) > out.scores(static_cast<Eigen::Index>(b));
        });
        order.resize(std::min(*keep_count, m));
        std::sort(order.begin(), order.end());
        out.selected = std::move(order);
    } else {
        const double mean = out.scores.mean();
        for (std::size_t j = 0; j < m; ++j) {
            if (out.scores(static_cast<Eigen::Index>(j)) >= mean) out.selected.push_back(j);
        }
    }
    return out;
}

FrequencyMatrix reduce_matrix(const FrequencyMatrix& matrix, std::vector<std::size_t> selected) {
    if (selected.empty()) throw ValidationError("empty column selection");
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
    if (selected.back() >= static_cast<std::size_t>(matrix.m())) {
        throw ValidationError("selected column " + std::to_string(selected.back()) + " out of range");
    }
    FrequencyMatrix out;
    out.rows = matrix.rows;
    out.labels = matrix.labels;
    out.mode = matrix.mode;
    out.vocab = matrix.vocab.slice(selected);
    out.values.resize(matrix.n(), static_cast<Eigen::Index>(selected.size()));
    for (std::size_t j = 0; j < selected.size(); ++j) {
        out.values.col(static_cast<Eigen::Index>(j)) = matrix.values.col(static_cast<Eigen::Index>(selected[j]));
    }
    if (out.mode == MatrixMode::normalized) normalize_rows(out.values);
    return out;
}

SpectralReport analyze(const FrequencyMatrix& matrix, const SpectralOptions& options) {
    if (!(options.energy_fraction > 0.0 && options.energy_fraction <= 1.0)) {
        throw ConfigError("energy fraction out of range (0, 1]");
    }
    const auto standardized = standardize(matrix);
    const auto decomposition = svd(standardized.values);

    SpectralReport report;
    report.singular_values = decomposition.S;
    report.eigenvalues = eigenvalues_from_singular(decomposition.S, matrix.n());

    if (options.kaiser) {
        report.kaiser_retained = kaiser_filter(report.eigenvalues);
    } else {
        for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i) {
            report.kaiser_retained.push_back(static_cast<std::size_t>(i));
        }
    }

    // Kaiser-retained components form a prefix of the sorted spectrum, so the
    // energy prefix is taken over that leading block.
    Eigen::VectorXd kept(static_cast<Eigen::Index>(report.kaiser_retained.size()));
    for (std::size_t i = 0; i < report.kaiser_retained.size(); ++i) {
        kept(static_cast<Eigen::Index>(i)) = decomposition.S(static_cast<Eigen::Index>(report.kaiser_retained[i]));
    }
    const auto energy = energy_retain(kept, options.energy_fraction);
    for (auto i : energy.components) report.energy_retained.push_back(report.kaiser_retained[i]);
    report.energy_fraction_achieved = energy.fraction_achieved;

    auto selection = select_syscalls(decomposition.V, decomposition.S, report.energy_retained, options.keep_count);
    report.syscall_scores = std::move(selection.scores);
    report.selected_columns = std::move(selection.selected);
    return report;
}

} // namespace idsim
