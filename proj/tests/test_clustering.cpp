#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "idsim/clustering.hpp"
#include "idsim/random.hpp"

using namespace idsim;

namespace {

FrequencyMatrix make_matrix(const Eigen::MatrixXd& values) {
    FrequencyMatrix fm;
    std::vector<std::string> tokens;
    for (Eigen::Index j = 0; j < values.cols(); ++j) tokens.push_back("c" + std::to_string(j));
    fm.vocab = SyscallVocabulary(tokens);
    fm.values = values;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        fm.rows.push_back("r" + std::to_string(i));
        fm.labels.emplace_back(std::nullopt);
    }
    return fm;
}

Eigen::MatrixXd blobs() {
    Eigen::MatrixXd b(4, 2);
    b << 0, 0, 0.1, 0, 10, 0, 10.1, 0;
    return b;
}

Eigen::MatrixXd noisy_groups(std::uint64_t seed, int per_group) {
    Rng rng(seed);
    Eigen::MatrixXd v(3 * per_group, 4);
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < per_group; ++i) {
            for (int j = 0; j < 4; ++j) {
                const double base = (j == g) ? 12.0 : 1.0;
                v(g * per_group + i, j) = std::floor(base + rng.unit() * 3.0);
            }
        }
    }
    return v;
}

} // namespace

TEST_CASE("n equal to k gives one cluster per row in one iteration") {
    Eigen::MatrixXd v(3, 2);
    v << 1, 0, 0, 1, 1, 1;
    const auto fm = make_matrix(v);
    const auto model = kmeans_fit(fm, 3, SimilarityMeasure(MeasureKind::cosine), 4);
    CHECK(model.converged);
    CHECK(model.iterations_run == 1);
    std::set<std::size_t> distinct(model.assignments.begin(), model.assignments.end());
    CHECK(distinct.size() == 3);
}

TEST_CASE("well separated blobs end up in separate clusters") {
    const auto fm = make_matrix(blobs());
    const SimilarityMeasure m(MeasureKind::idsim, FeatureStats::from_matrix(fm.values));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto model = kmeans_fit(fm, 2, m, seed);
        CHECK(model.assignments[0] == model.assignments[1]);
        CHECK(model.assignments[2] == model.assignments[3]);
        CHECK(model.assignments[0] != model.assignments[2]);

        Eigen::Vector2d near_b(10.05, 0);
        CHECK(assign(near_b, model) == model.assignments[2]);
    }
}

TEST_CASE("k = 1 gives the column mean") {
    const auto fm = make_matrix(noisy_groups(3, 5));
    const auto model = kmeans_fit(fm, 1, SimilarityMeasure(MeasureKind::cosine), 1);
    CHECK(model.converged);
    CHECK((model.centroids.row(0) - fm.values.colwise().mean()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("assign picks the matching centroid and breaks ties low") {
    ClusterModel model;
    model.k = 3;
    model.measure_kind = MeasureKind::cosine;
    model.centroids.resize(3, 2);
    model.centroids << 1, 0, 0, 1, 1, 1;
    CHECK(assign(Eigen::Vector2d(1, 1), model) == 2);
    CHECK(assign(Eigen::Vector2d(1, 0), model) == 0);

    model.centroids << 1, 0, 0, 1, 5, 5;
    CHECK(assign(Eigen::Vector2d(0, 0), model) == 0);

    ClusterModel tie;
    tie.k = 2;
    tie.measure_kind = MeasureKind::cosine;
    tie.centroids.resize(2, 2);
    tie.centroids << 1, 0, 0, 1;
    CHECK(assign(Eigen::Vector2d(3, 3), tie) == 0);
    CHECK_THROWS_AS(assign(Eigen::Vector3d(1, 1, 1), tie), ValidationError);
}

TEST_CASE("empty clusters are reseeded with the farthest sample") {
    Eigen::MatrixXd data(3, 2);
    data << 1, 0, 1, 0.2, 0.2, 1;
    Eigen::MatrixXd centroids(3, 2);
    centroids << 1, 0, 0, 1, 0, 1;
    std::vector<std::size_t> assignments{0, 0, 1};
    const SimilarityMeasure m(MeasureKind::cosine);
    const auto reseeded = handle_empty_clusters(data, centroids, assignments, m);
    CHECK(reseeded == std::vector<std::size_t>{2});
    CHECK(assignments == std::vector<std::size_t>{0, 2, 1});
    CHECK(centroids.row(2) == data.row(1));

    std::vector<std::size_t> full{0, 1, 2};
    Eigen::MatrixXd same = centroids;
    CHECK(handle_empty_clusters(data, same, full, m).empty());
    CHECK(same == centroids);
}

TEST_CASE("reseed tie goes to the lower sample index") {
    Eigen::MatrixXd data(3, 2);
    data << 0, 1, 0, 1, 1, 0;
    Eigen::MatrixXd centroids(2, 2);
    centroids << 1, 0, 1, 1;
    std::vector<std::size_t> assignments{0, 0, 0};
    const auto reseeded = handle_empty_clusters(data, centroids, assignments, SimilarityMeasure(MeasureKind::cosine));
    CHECK(reseeded == std::vector<std::size_t>{1});
    CHECK(assignments == std::vector<std::size_t>{1, 0, 0});
}

TEST_CASE("fit is deterministic per seed") {
    const auto fm = make_matrix(noisy_groups(11, 8));
    const SimilarityMeasure m(MeasureKind::idsim, FeatureStats::from_matrix(fm.values));
    const auto a = kmeans_fit(fm, 3, m, 42);
    const auto b = kmeans_fit(fm, 3, m, 42);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    CHECK(a.iterations_run == b.iterations_run);
}

TEST_CASE("termination, membership and fixed point over seeds and measures") {
    const auto fm = make_matrix(noisy_groups(17, 7));
    const auto stats = FeatureStats::from_matrix(fm.values);
    for (auto kind : {MeasureKind::idsim, MeasureKind::cosine, MeasureKind::jaccard}) {
        const SimilarityMeasure m(kind, stats);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            KMeansOptions opts;
            opts.max_iter = 50;
            opts.tol = 0.0;
            const auto model = kmeans_fit(fm, 3, m, seed, opts);
            CHECK(model.iterations_run <= opts.max_iter);
            std::vector<std::size_t> count(3, 0);
            for (auto c : model.assignments) {
                REQUIRE(c < 3);
                ++count[c];
            }
            for (auto c : count) CHECK(c >= 1);
            for (std::size_t c = 0; c < 3; ++c) {
                Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(fm.m());
                for (auto i : model.members_of(c)) mean += fm.values.row(static_cast<Eigen::Index>(i));
                mean /= static_cast<double>(count[c]);
                CHECK((mean - model.centroids.row(static_cast<Eigen::Index>(c))).cwiseAbs().maxCoeff() <= 1e-9);
            }
            if (model.converged) {
                std::vector<std::size_t> again(model.assignments.size());
                for (std::size_t i = 0; i < again.size(); ++i) {
                    again[i] = nearest_centroid(fm.values.row(static_cast<Eigen::Index>(i)), model.centroids, m);
                }
                // A further round, including the empty-cluster repair the fit applies.
                Eigen::MatrixXd centroids = model.centroids;
                handle_empty_clusters(fm.values, centroids, again, m);
                CHECK(again == model.assignments);
                const auto next = update_centroids(fm.values, again, centroids);
                CHECK((next - model.centroids).cwiseAbs().maxCoeff() <= 1e-12);
            }
        }
    }
}

TEST_CASE("invalid k and options are rejected") {
    const auto fm = make_matrix(blobs());
    const SimilarityMeasure m(MeasureKind::cosine);
    CHECK_THROWS_AS(kmeans_fit(fm, 0, m, 1), ConfigError);
    CHECK_THROWS_AS(kmeans_fit(fm, 5, m, 1), ConfigError);
    KMeansOptions opts;
    opts.max_iter = 0;
    CHECK_THROWS_AS(kmeans_fit(fm, 2, m, 1, opts), ConfigError);
    opts.max_iter = 10;
    opts.tol = -1.0;
    CHECK_THROWS_AS(kmeans_fit(fm, 2, m, 1, opts), ConfigError);
}
