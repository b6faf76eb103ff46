#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "idsim/random.hpp"
#include "idsim/scalar_reduce.hpp"
#include "oracles.hpp"

using namespace idsim;

namespace {

FrequencyMatrix make_matrix(const Eigen::MatrixXd& values, const std::string& prefix = "r") {
    FrequencyMatrix fm;
    std::vector<std::string> tokens;
    for (Eigen::Index j = 0; j < values.cols(); ++j) tokens.push_back("c" + std::to_string(j));
    fm.vocab = SyscallVocabulary(tokens);
    fm.values = values;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        fm.rows.push_back(prefix + std::to_string(i));
        fm.labels.emplace_back(i % 2 ? "b" : "a");
    }
    return fm;
}

ClusterModel manual_model(const Eigen::MatrixXd& centroids, std::vector<std::size_t> assignments,
                          MeasureKind kind, FeatureStats stats = {}) {
    ClusterModel m;
    m.k = static_cast<std::size_t>(centroids.rows());
    m.centroids = centroids;
    m.assignments = std::move(assignments);
    m.measure_kind = kind;
    m.stats = std::move(stats);
    return m;
}

// Literal recomputation: every centroid, every candidate neighbour.
std::vector<double> oracle_values(const Eigen::MatrixXd& rows, const std::vector<std::size_t>& clusters,
                                  const Eigen::MatrixXd& pool, const std::vector<std::size_t>& pool_clusters,
                                  const ClusterModel& model, bool skip_self) {
    const auto measure = model.measure();
    std::vector<double> out;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        double d1 = 0.0;
        for (Eigen::Index c = 0; c < model.centroids.rows(); ++c) d1 += measure.distance(rows.row(i), model.centroids.row(c));
        double d2 = std::numeric_limits<double>::infinity();
        bool found = false;
        for (Eigen::Index j = 0; j < pool.rows(); ++j) {
            if (skip_self && j == i) continue;
            if (pool_clusters[static_cast<std::size_t>(j)] != clusters[static_cast<std::size_t>(i)]) continue;
            const double d = measure.distance(rows.row(i), pool.row(j));
            if (!found || d < d2) d2 = d;
            found = true;
        }
        out.push_back(d1 + (found ? d2 : 0.0));
    }
    return out;
}

Eigen::MatrixXd random_counts(Rng& rng, Eigen::Index n, Eigen::Index m) {
    Eigen::MatrixXd v(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) v(i, j) = rng.unit() < 0.3 ? 0.0 : std::floor(rng.unit() * 6.0);
    return v;
}

} // namespace

TEST_CASE("two identical rows with k = 1 reduce to zero") {
    Eigen::MatrixXd v(2, 3);
    v << 1, 2, 3, 1, 2, 3;
    const auto fm = make_matrix(v);
    const auto stats = FeatureStats::from_matrix(fm.values);
    const auto model = kmeans_fit(fm, 1, SimilarityMeasure(MeasureKind::idsim, stats), 0);
    const auto out = reduce_train(fm, model);
    CHECK(out.values == std::vector<double>{0.0, 0.0});
    CHECK(out.size() == 2);
    CHECK(out.sample_ids == fm.rows);
    CHECK(out.labels == fm.labels);
}

TEST_CASE("singleton cluster contributes only the centroid sum") {
    Eigen::MatrixXd v(3, 2);
    v << 1, 0, 1, 0.5, 0, 1;
    Eigen::MatrixXd c(2, 2);
    c << 1, 0.25, 0, 1;
    const auto fm = make_matrix(v);
    const auto model = manual_model(c, {0, 0, 1}, MeasureKind::cosine);
    const auto out = reduce_train(fm, model);
    const SimilarityMeasure cos(MeasureKind::cosine);
    CHECK(out.values[2] == cos.distance(v.row(2), c.row(0)) + cos.distance(v.row(2), c.row(1)));
    const double d1 = cos.distance(v.row(0), c.row(0)) + cos.distance(v.row(0), c.row(1));
    CHECK(out.values[0] == d1 + cos.distance(v.row(0), v.row(1)));
}

TEST_CASE("test side: identical sample and forced neighbour") {
    Eigen::MatrixXd train(4, 2);
    train << 3, 0, 3, 0, 2.5, 0.5, 0, 4;
    const auto tm = make_matrix(train);
    const auto stats = FeatureStats::from_matrix(train);
    Eigen::MatrixXd c(2, 2);
    c << 17.0 / 6.0, 0.5 / 3.0, 0, 4;
    const auto model = manual_model(c, {0, 0, 0, 1}, MeasureKind::idsim, stats);
    const auto train_set = reduce_train(tm, model);

    Eigen::MatrixXd test(2, 2);
    test << 3, 0, 0.2, 3.5;
    const auto qm = make_matrix(test, "q");
    const auto out = reduce_test(qm, model, tm);
    CHECK(out.source == FeatureSource::test);
    CHECK(out.cluster_of == std::vector<std::size_t>{0, 1});
    CHECK(out.values[0] == train_set.values[0]);
    const auto m = model.measure();
    const double d1 = m.distance(test.row(1), c.row(0)) + m.distance(test.row(1), c.row(1));
    CHECK(out.values[1] == d1 + m.distance(test.row(1), train.row(3)));
}

TEST_CASE("reduce_train and reduce_test match the literal recomputation") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.below(18));
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.below(6));
        const std::size_t k = 1 + rng.below(std::min<std::uint64_t>(4, static_cast<std::uint64_t>(n)));
        const auto fm = make_matrix(random_counts(rng, n, m));
        const MeasureKind kind = trial % 3 == 0 ? MeasureKind::idsim : (trial % 3 == 1 ? MeasureKind::cosine : MeasureKind::jaccard);
        const auto stats = FeatureStats::from_matrix(fm.values);
        const auto model = kmeans_fit(fm, k, SimilarityMeasure(kind, stats), rng.below(1000));
        const auto got = reduce_train(fm, model);
        const auto want = oracle_values(fm.values, model.assignments, fm.values, model.assignments, model, true);
        CHECK(got.values == want);
        for (double v : got.values) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
            CHECK(v <= static_cast<double>(k) + 1.0);
        }

        const auto qm = make_matrix(random_counts(rng, 5, m), "q");
        const auto test = reduce_test(qm, model, fm);
        std::vector<std::size_t> assigned;
        for (Eigen::Index i = 0; i < 5; ++i) assigned.push_back(assign(qm.values.row(i).transpose(), model));
        CHECK(test.cluster_of == assigned);
        CHECK(test.values == oracle_values(qm.values, assigned, fm.values, model.assignments, model, false));
    }
}

TEST_CASE("misaligned inputs are rejected") {
    Eigen::MatrixXd v(3, 2);
    v << 1, 0, 0, 1, 1, 1;
    const auto fm = make_matrix(v);
    Eigen::MatrixXd c(1, 2);
    c << 1, 1;
    CHECK_THROWS_AS(reduce_train(fm, manual_model(c, {0, 0}, MeasureKind::cosine)), ValidationError);

    Eigen::MatrixXd wide(1, 3);
    wide << 1, 1, 1;
    auto other = make_matrix(wide);
    CHECK_THROWS_AS(reduce_test(other, manual_model(c, {0, 0, 0}, MeasureKind::cosine), fm), ValidationError);
}
