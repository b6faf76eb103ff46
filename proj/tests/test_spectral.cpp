#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "idsim/error.hpp"
#include "idsim/random.hpp"
#include "idsim/spectral.hpp"

using namespace idsim;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd a(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) a(i, j) = rng.unit() * 10.0 - 3.0;
    return a;
}

FrequencyMatrix as_matrix(const Eigen::MatrixXd& values, MatrixMode mode = MatrixMode::count) {
    FrequencyMatrix fm;
    fm.mode = mode;
    std::vector<std::string> tokens;
    for (Eigen::Index j = 0; j < values.cols(); ++j) tokens.push_back("s" + std::to_string(10 + j));
    fm.vocab = SyscallVocabulary(tokens);
    fm.values = values;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        fm.rows.push_back("r" + std::to_string(i));
        fm.labels.emplace_back(i % 2 ? "attack" : "normal");
    }
    return fm;
}

void check_svd_contract(const Eigen::MatrixXd& a) {
    const auto r = svd(a);
    const Eigen::Index k = std::min(a.rows(), a.cols());
    REQUIRE(r.S.size() == k);
    const Eigen::MatrixXd rebuilt = r.U * r.S.asDiagonal() * r.V.transpose();
    CHECK((rebuilt - a).norm() <= 1e-6 * std::max(1.0, a.norm()));
    CHECK((r.U.transpose() * r.U - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((r.V.transpose() * r.V - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-6);
    for (Eigen::Index i = 1; i < k; ++i) CHECK(r.S(i) <= r.S(i - 1));
    CHECK((r.S.array() >= 0.0).all());
}

} // namespace

TEST_CASE("standardize uses the n-1 divisor") {
    Eigen::MatrixXd col(2, 1);
    col << 1, 3;
    const auto s = standardize(col);
    CHECK(s.stats.mean(0) == 2.0);
    CHECK(s.stats.stddev(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s.values(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(s.values(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("standardize: column [1,3] becomes [-1,+1] after dividing by sigma") {
    // The hand example: centered values are -1, +1 and sigma = sqrt(2).
    Eigen::MatrixXd col(2, 1);
    col << 1, 3;
    const auto s = standardize(col);
    CHECK(s.values(0, 0) * s.stats.stddev(0) == doctest::Approx(-1.0));
    CHECK(s.values(1, 0) * s.stats.stddev(0) == doctest::Approx(1.0));
}

TEST_CASE("constant column is centered only and flagged") {
    Eigen::MatrixXd a(3, 2);
    a << 5, 1, 5, 2, 5, 3;
    const auto s = standardize(a);
    CHECK(s.stats.zero_variance[0]);
    CHECK_FALSE(s.stats.zero_variance[1]);
    CHECK(s.values.col(0).isZero(0.0));
}

TEST_CASE("already centered column keeps zero mean") {
    Eigen::MatrixXd a(3, 1);
    a << -1, 0, 1;
    const auto s = standardize(a);
    CHECK(std::abs(s.values.col(0).mean()) <= 1e-12);
}

TEST_CASE("standardized columns have zero mean on random data") {
    const auto s = standardize(random_matrix(15, 6, 3));
    CHECK(s.values.colwise().mean().cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("standardize needs two samples") {
    CHECK_THROWS_AS(standardize(Eigen::MatrixXd::Ones(1, 3)), ValidationError);
}

TEST_CASE("svd of diag(3,2)") {
    Eigen::MatrixXd d(2, 2);
    d << 3, 0, 0, 2;
    const auto r = svd(d);
    CHECK(r.S(0) == doctest::Approx(3.0));
    CHECK(r.S(1) == doctest::Approx(2.0));
    CHECK((r.U.cwiseAbs() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((r.V.cwiseAbs() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("svd of a rank-1 matrix") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 2, 4;
    const auto r = svd(a);
    CHECK(r.S(0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.S(1) <= 1e-9);
}

TEST_CASE("svd reconstruction and orthonormality on seeded matrices") {
    check_svd_contract(random_matrix(6, 4, 11));
    check_svd_contract(random_matrix(4, 6, 12));
    check_svd_contract(random_matrix(20, 8, 13));
}

TEST_CASE("svd rejects non-finite input") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd(a), ValidationError);
}

TEST_CASE("kaiser filter") {
    CHECK(kaiser_filter(Eigen::Vector4d(2.5, 1.0, 0.7, 0.1)) == std::vector<std::size_t>{0, 1});
    CHECK(kaiser_filter(Eigen::Vector2d(0.4, 0.3)) == std::vector<std::size_t>{0});
    CHECK(kaiser_filter(Eigen::VectorXd::Constant(1, 1.0)) == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(kaiser_filter(Eigen::VectorXd()), ValidationError);
}

TEST_CASE("energy retention on hand examples") {
    const auto a = energy_retain(Eigen::Vector2d(3, 1), 0.9);
    CHECK(a.components == std::vector<std::size_t>{0});
    CHECK(a.fraction_achieved == doctest::Approx(0.9));

    const auto b = energy_retain(Eigen::Vector4d(1, 1, 1, 1), 0.9);
    CHECK(b.components == std::vector<std::size_t>{0, 1, 2, 3});

    const auto c = energy_retain(Eigen::Vector4d(4, 2, 1, 0), 1.0);
    CHECK(c.components == std::vector<std::size_t>{0, 1, 2});
    CHECK(c.fraction_achieved == 1.0);
}

TEST_CASE("energy retention errors") {
    CHECK_THROWS_WITH_AS(energy_retain(Eigen::Vector2d(0, 0), 0.9), "zero-energy matrix", ValidationError);
    CHECK_THROWS_AS(energy_retain(Eigen::Vector2d(1, 0), 1.5), ConfigError);
    CHECK_THROWS_AS(energy_retain(Eigen::Vector2d(1, 0), 0.0), ConfigError);
}

TEST_CASE("energy retention is monotone in the fraction") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd s(6);
        for (Eigen::Index i = 0; i < 6; ++i) s(i) = rng.unit() * 5.0;
        std::sort(s.data(), s.data() + s.size(), std::greater<>());
        std::size_t prev = 0;
        for (double f = 0.05; f <= 1.0; f += 0.05) {
            const auto n = energy_retain(s, f).components.size();
            CHECK(n >= prev);
            prev = n;
        }
    }
}

TEST_CASE("select_syscalls scoring") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    const auto sel = select_syscalls(eye, Eigen::Vector2d(3, 1), {0});
    CHECK(sel.scores(0) == 9.0);
    CHECK(sel.scores(1) == 0.0);
    CHECK(sel.selected == std::vector<std::size_t>{0});

    const auto tie = select_syscalls(Eigen::MatrixXd::Constant(2, 1, std::sqrt(0.5)), Eigen::VectorXd::Constant(1, std::sqrt(10.0)), {0}, 1);
    CHECK(tie.scores(0) == doctest::Approx(tie.scores(1)));
    CHECK(tie.selected == std::vector<std::size_t>{0});
}

TEST_CASE("scores with all components conserve energy") {
    const auto r = svd(random_matrix(12, 5, 21));
    const auto sel = select_syscalls(r.V, r.S, {0, 1, 2, 3, 4});
    CHECK((sel.scores.array() >= 0.0).all());
    CHECK(sel.scores.sum() == doctest::Approx(r.S.squaredNorm()).epsilon(1e-6));
}

TEST_CASE("eigenvalue/energy consistency") {
    const auto s = standardize(random_matrix(20, 8, 4));
    const auto r = svd(s.values);
    const auto lambda = eigenvalues_from_singular(r.S, 20);
    CHECK(lambda.sum() * 19.0 == doctest::Approx(r.S.squaredNorm()).epsilon(1e-6));
}

TEST_CASE("reduce_matrix projects columns and keeps rows") {
    Eigen::MatrixXd v(2, 3);
    v << 1, 2, 3, 4, 5, 6;
    const auto fm = as_matrix(v);
    const auto out = reduce_matrix(fm, {2, 0});
    Eigen::MatrixXd expected(2, 2);
    expected << 1, 3, 4, 6;
    CHECK(out.values == expected);
    CHECK(out.vocab.tokens() == std::vector<std::string>{"s10", "s12"});
    CHECK(out.rows == fm.rows);
    CHECK(out.labels == fm.labels);

    const auto same = reduce_matrix(fm, {0, 1, 2});
    CHECK(same.values == fm.values);
    CHECK(same.vocab == fm.vocab);

    CHECK_THROWS_AS(reduce_matrix(fm, {}), ValidationError);
    CHECK_THROWS_AS(reduce_matrix(fm, {3}), ValidationError);
}

TEST_CASE("reduce_matrix renormalizes normalized rows") {
    Eigen::MatrixXd v(1, 3);
    v << 0.5, 0.25, 0.25;
    FrequencyMatrix fm = as_matrix(v, MatrixMode::normalized);
    fm.labels.resize(1);
    fm.rows.resize(1);
    const auto out = reduce_matrix(fm, {0, 1});
    CHECK(out.values(0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(out.values(0, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("analyze is deterministic and its report is self-consistent") {
    const auto fm = as_matrix(random_matrix(30, 7, 77).cwiseAbs().array().floor());
    const auto a = analyze(fm);
    const auto b = analyze(fm);
    CHECK(a.singular_values == b.singular_values);
    CHECK(a.selected_columns == b.selected_columns);
    CHECK(a.syscall_scores.isApprox(b.syscall_scores, 1e-12));
    CHECK_FALSE(a.selected_columns.empty());
    for (auto c : a.energy_retained) {
        CHECK(std::find(a.kaiser_retained.begin(), a.kaiser_retained.end(), c) != a.kaiser_retained.end());
    }
    for (std::size_t i = 0; i < a.energy_retained.size(); ++i) CHECK(a.energy_retained[i] == i);
    CHECK(a.energy_fraction_achieved >= 0.9);
    CHECK(a.energy_fraction_achieved <= 1.0);
}

TEST_CASE("analyze validates the energy fraction") {
    const auto fm = as_matrix(random_matrix(5, 3, 1));
    SpectralOptions opts;
    opts.energy_fraction = 1.5;
    CHECK_THROWS_WITH_AS(analyze(fm, opts), "energy fraction out of range (0, 1]", ConfigError);
}
