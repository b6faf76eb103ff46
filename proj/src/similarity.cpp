#include "idsim/similarity.hpp"

#include "idsim/spectral.hpp"

namespace idsim {

FeatureStats FeatureStats::from_matrix(const Eigen::MatrixXd& values, double sigma_floor) {
    FeatureStats stats;
    stats.sigma_floor = sigma_floor;
    const Eigen::Index n = values.rows();
    if (n == 0) throw ValidationError("feature statistics need at least one row");
    if (n < 2) {
        stats.mu = values.colwise().mean().transpose();
        stats.sigma = Eigen::VectorXd::Zero(values.cols());
        return stats;
    }
    auto cols = column_stats(values);
    stats.mu = std::move(cols.mean);
    stats.sigma = std::move(cols.stddev);
    return stats;
}

std::string to_string(MeasureKind kind) {
    switch (kind) {
    case MeasureKind::idsim: return "idsim";
    case MeasureKind::cosine: return "cosine";
    case MeasureKind::jaccard: return "jaccard";
    }
    return "idsim";
}

MeasureKind parse_measure_kind(std::string_view name) {
    if (name == "idsim") return MeasureKind::idsim;
    if (name == "cosine") return MeasureKind::cosine;
    if (name == "jaccard") return MeasureKind::jaccard;
    throw ConfigError("unknown similarity measure '" + std::string(name) + "'");
}

} // namespace idsim
