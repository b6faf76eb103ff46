#include "idsim/scalar_reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idsim/error.hpp"

namespace idsim {
namespace {

template <typename Row>
double centroid_distance_sum(const Row& row, const ClusterModel& model, const SimilarityMeasure& measure) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < model.centroids.rows(); ++c) {
        total += measure.distance(row, model.centroids.row(c));
    }
    return total;
}

void check_model_width(const FrequencyMatrix& matrix, const ClusterModel& model) {
    if (matrix.m() != model.centroids.cols()) {
        throw ValidationError("matrix has " + std::to_string(matrix.m()) + " columns, model expects " +
                              std::to_string(model.centroids.cols()));
    }
}

} // namespace

ScalarFeatureSet reduce_train(const FrequencyMatrix& matrix, const ClusterModel& model) {
    check_model_width(matrix, model);
    const auto n = static_cast<std::size_t>(matrix.n());
    if (model.assignments.size() != n) {
        throw ValidationError("model has " + std::to_string(model.assignments.size()) +
                              " assignments for " + std::to_string(n) + " rows");
    }
    const auto measure = model.measure();
    ScalarFeatureSet out;
    out.source = FeatureSource::train;
    out.sample_ids = matrix.rows;
    out.labels = matrix.labels;
    out.cluster_of = model.assignments;
    out.values.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto row = matrix.values.row(static_cast<Eigen::Index>(i));
        const double d_centers = centroid_distance_sum(row, model, measure);
        double d_nn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || model.assignments[j] != model.assignments[i]) continue;
            d_nn = std::min(d_nn, measure.distance(row, matrix.values.row(static_cast<Eigen::Index>(j))));
        }
        if (std::isinf(d_nn)) d_nn = 0.0;
        out.values[i] = d_centers + d_nn;
    }
    return out;
}

ScalarFeatureSet reduce_test(const FrequencyMatrix& matrix, const ClusterModel& model,
                             const FrequencyMatrix& train_matrix) {
    if (!(matrix.vocab == train_matrix.vocab)) {
        throw ValidationError("test vocabulary does not match the training vocabulary");
    }
    check_model_width(matrix, model);
    if (model.assignments.size() != static_cast<std::size_t>(train_matrix.n())) {
        throw ValidationError("model assignments do not align with the training matrix");
    }
    const auto measure = model.measure();
    const auto n = static_cast<std::size_t>(matrix.n());
    ScalarFeatureSet out;
    out.source = FeatureSource::test;
    out.sample_ids = matrix.rows;
    out.labels = matrix.labels;
    out.cluster_of.resize(n);
    out.values.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto row = matrix.values.row(static_cast<Eigen::Index>(i));
        const std::size_t cluster = nearest_centroid(row, model.centroids, measure);
        const double d_centers = centroid_distance_sum(row, model, measure);
        double d_nn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < model.assignments.size(); ++j) {
            if (model.assignments[j] != cluster) continue;
            d_nn = std::min(d_nn, measure.distance(row, train_matrix.values.row(static_cast<Eigen::Index>(j))));
        }
        if (std::isinf(d_nn)) d_nn = 0.0;
        out.cluster_of[i] = cluster;
        out.values[i] = d_centers + d_nn;
    }
    return out;
}

} // namespace idsim
