#include "idsim/clustering.hpp"

#include "idsim/error.hpp"
#include "idsim/random.hpp"

namespace idsim {

std::vector<std::size_t> ClusterModel::members_of(std::size_t cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == cluster) out.push_back(i);
    }
    return out;
}

std::size_t assign(const Eigen::Ref<const Eigen::VectorXd>& sample, const ClusterModel& model) {
    if (sample.size() != model.centroids.cols()) {
        throw ValidationError("sample has " + std::to_string(sample.size()) + " features, model expects " +
                              std::to_string(model.centroids.cols()));
    }
    return nearest_centroid(sample, model.centroids, model.measure());
}

Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& data, const std::vector<std::size_t>& assignments,
                                 const Eigen::MatrixXd& current) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(current.rows(), current.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(current.rows()), 0);
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        sums.row(static_cast<Eigen::Index>(assignments[i])) += data.row(static_cast<Eigen::Index>(i));
        ++counts[assignments[i]];
    }
    Eigen::MatrixXd out = current;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0) out.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
    return out;
}

std::vector<std::size_t> handle_empty_clusters(const Eigen::MatrixXd& data, Eigen::MatrixXd& centroids,
                                               std::vector<std::size_t>& assignments,
                                               const SimilarityMeasure& measure) {
    const auto k = static_cast<std::size_t>(centroids.rows());
    std::vector<std::size_t> counts(k, 0);
    for (auto a : assignments) ++counts[a];

    std::vector<std::size_t> reseeded;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        std::size_t pick = assignments.size();
        double pick_d = -1.0;
        for (std::size_t i = 0; i < assignments.size(); ++i) {
            if (counts[assignments[i]] < 2) continue;
            const auto row = static_cast<Eigen::Index>(i);
            const double d = measure.distance(data.row(row), centroids.row(static_cast<Eigen::Index>(assignments[i])));
            if (d > pick_d) {
                pick = i;
                pick_d = d;
            }
        }
        if (pick == assignments.size()) throw ValidationError("cannot reseed empty cluster: k exceeds sample count");
        --counts[assignments[pick]];
        assignments[pick] = c;
        counts[c] = 1;
        centroids.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(pick));
        reseeded.push_back(c);
    }
    return reseeded;
}

ClusterModel kmeans_fit(const FrequencyMatrix& matrix, std::size_t k, const SimilarityMeasure& measure,
                        std::uint64_t seed, const KMeansOptions& options) {
    const auto n = static_cast<std::size_t>(matrix.n());
    if (k == 0) throw ConfigError("k must be at least 1");
    if (k > n) throw ConfigError("k = " + std::to_string(k) + " exceeds sample count " + std::to_string(n));
    if (options.max_iter == 0) throw ConfigError("max_iter must be at least 1");
    if (!(options.tol >= 0.0)) throw ConfigError("tol must be non-negative");
    if (measure.kind() == MeasureKind::idsim && measure.stats().size() != matrix.m()) {
        throw ValidationError("feature statistics do not match matrix width");
    }

    const Eigen::MatrixXd& data = matrix.values;
    ClusterModel model;
    model.k = k;
    model.stats = measure.stats();
    model.measure_kind = measure.kind();
    model.seed = seed;

    Rng rng(seed);
    const auto init = rng.sample_distinct(n, k);
    model.centroids.resize(static_cast<Eigen::Index>(k), data.cols());
    for (std::size_t c = 0; c < k; ++c) {
        model.centroids.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(init[c]));
    }

    std::vector<std::size_t> previous;
    model.assignments.assign(n, 0);
    for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
        model.iterations_run = iter;
        for (std::size_t i = 0; i < n; ++i) {
            model.assignments[i] = nearest_centroid(data.row(static_cast<Eigen::Index>(i)), model.centroids, measure);
        }
        handle_empty_clusters(data, model.centroids, model.assignments, measure);

        Eigen::MatrixXd next = update_centroids(data, model.assignments, model.centroids);
        const double shift = (next - model.centroids).rowwise().norm().maxCoeff();
        model.centroids = std::move(next);

        if (model.assignments == previous || shift <= options.tol) {
            model.converged = true;
            break;
        }
        previous = model.assignments;
    }
    return model;
}

} // namespace idsim
