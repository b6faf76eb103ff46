#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "idsim/ingest.hpp"
#include "idsim/similarity.hpp"

namespace idsim {

struct ClusterModel {
    std::size_t k = 0;
    Eigen::MatrixXd centroids;  // k x m
    std::vector<std::size_t> assignments;
    FeatureStats stats;
    MeasureKind measure_kind = MeasureKind::idsim;
    std::uint64_t seed = 0;
    std::size_t iterations_run = 0;
    bool converged = false;

    SimilarityMeasure measure() const { return SimilarityMeasure(measure_kind, stats); }
    std::vector<std::size_t> members_of(std::size_t cluster) const;
};

struct KMeansOptions {
    std::size_t max_iter = 100;
    double tol = 1e-6;
};

// Lloyd iterations with the measure's distance for assignment and arithmetic
// means for the update. Initial centroids are k distinct rows drawn with `seed`.
ClusterModel kmeans_fit(const FrequencyMatrix& matrix, std::size_t k, const SimilarityMeasure& measure,
                        std::uint64_t seed, const KMeansOptions& options = {});

// Nearest centroid; ties go to the lowest cluster index.
template <typename Derived>
std::size_t nearest_centroid(const Eigen::MatrixBase<Derived>& sample, const Eigen::MatrixXd& centroids,
                             const SimilarityMeasure& measure) {
    std::size_t best = 0;
    double best_d = 0.0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d = measure.distance(sample, centroids.row(c));
        if (c == 0 || d < best_d) {
            best = static_cast<std::size_t>(c);
            best_d = d;
        }
    }
    return best;
}

std::size_t assign(const Eigen::Ref<const Eigen::VectorXd>& sample, const ClusterModel& model);

// Refills every empty cluster with the sample farthest from its current
// centroid (lowest index on ties), taken from clusters that keep >= 1 member.
// Returns the clusters that were reseeded, in increasing order.
std::vector<std::size_t> handle_empty_clusters(const Eigen::MatrixXd& data, Eigen::MatrixXd& centroids,
                                               std::vector<std::size_t>& assignments,
                                               const SimilarityMeasure& measure);

// Member means; clusters without members keep their current centroid.
Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& data, const std::vector<std::size_t>& assignments,
                                 const Eigen::MatrixXd& current);

} // namespace idsim
