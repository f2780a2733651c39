#include "mvtl/tsk.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace mvtl;

namespace {

ViewAntecedents random_bank(std::mt19937_64& rng, Eigen::Index K, Eigen::Index d) {
    ViewAntecedents a;
    a.centers = oracle::random_matrix(rng, K, d);
    a.spreads = (oracle::random_matrix(rng, K, d).array().abs() + 0.5).matrix();
    return a;
}

}  // namespace

TEST_SUITE("tsk") {

TEST_CASE("ridge hand cases") {
    const Matrix G = Matrix::Ones(1, 1);
    const Matrix Y = Matrix::Constant(1, 1, 2.0);
    CHECK(ridge_consequents(G, Y, 0.0).P(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ridge_consequents(G, Y, 1.0).P(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

    std::mt19937_64 rng(1);
    const Matrix A = oracle::random_matrix(rng, 6, 4);
    CHECK(ridge_consequents(A, Matrix::Zero(6, 2), 0.3).P.isZero(0.0));
}

TEST_CASE("ridge singular system is reported") {
    const Matrix G = Matrix::Zero(3, 2);
    CHECK_THROWS_AS(ridge_consequents(G, Matrix::Ones(3, 1), 0.0), NumericalError);
    CHECK_NOTHROW(ridge_consequents(G, Matrix::Ones(3, 1), 1e-3));
}

TEST_CASE("ridge solution has zero gradient") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 30; ++t) {
        const Matrix G = oracle::random_matrix(rng, 5, 4);
        const Matrix Y = oracle::random_matrix(rng, 5, 2);
        const double lam = 0.1 + static_cast<double>(rng() % 100) / 50.0;
        const Matrix P = ridge_consequents(G, Y, lam).P;
        auto f = [&](const Matrix& Q) { return (G * Q - Y).squaredNorm() + lam * Q.squaredNorm(); };
        const Matrix g = oracle::numeric_gradient(f, P, 1e-6);
        const double scale = std::max(1.0, (G.transpose() * Y).cwiseAbs().maxCoeff());
        CHECK(g.cwiseAbs().maxCoeff() / scale < 1e-4);
    }
}

TEST_CASE("decision values") {
    std::mt19937_64 rng(3);
    TskModel m{random_bank(rng, 2, 3), {Matrix::Zero(8, 2), 0.0}, 2};
    CHECK(decision_value(m, Vector::Ones(3)).isZero(0.0));

    TskModel lin{random_bank(rng, 1, 2), {Matrix(3, 1), 0.0}, 1};
    lin.consequents.P << 0.5, 2.0, -1.0;
    Vector x(2);
    x << 3.0, 4.0;
    CHECK(decision_value(lin, x)(0) == doctest::Approx(0.5 + 6.0 - 4.0).epsilon(1e-14));
}

TEST_CASE("fuzzy-space output equals the rule-by-rule weighted average") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index K = 2 + static_cast<Eigen::Index>(rng() % 3), d = 1 + static_cast<Eigen::Index>(rng() % 4);
        TskModel m{random_bank(rng, K, d), {oracle::random_matrix(rng, K * (d + 1), 3), 0.0}, 3};
        const Vector x = oracle::random_matrix(rng, d, 1);
        const Vector ref = oracle::rule_by_rule_output(x, m.antecedents.centers, m.antecedents.spreads, m.consequents.P);
        CHECK((decision_value(m, x) - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("predict_class") {
    Vector f(2);
    f << 0.2, 0.9;
    auto p = predict_class(f);
    CHECK(p.label == 1);
    CHECK(p.one_hot(0) == 0.0);
    CHECK(p.one_hot(1) == 1.0);
    f << 0.5, 0.5;
    CHECK(predict_class(f).label == 0);
    Vector g(3);
    g << -1, -2, -0.5;
    CHECK(predict_class(g).label == 2);
}

TEST_CASE("predict_class ignores a constant shift") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        const Vector f = oracle::random_matrix(rng, 4, 1);
        const double c = oracle::random_matrix(rng, 1, 1, 10.0)(0, 0);
        CHECK(predict_class(f).label == predict_class((f.array() + c).matrix()).label);
    }
}

TEST_CASE("train_tsk separates two blobs") {
    std::mt19937_64 rng(6);
    Matrix x = oracle::random_matrix(rng, 60, 2, 0.5);
    std::vector<std::size_t> labels(60);
    for (Eigen::Index i = 0; i < 60; ++i) {
        labels[static_cast<std::size_t>(i)] = i % 2;
        x.row(i).array() += (i % 2 ? 2.0 : -2.0);
    }
    const Matrix Y = one_hot_encode(labels, 2);
    const auto m = train_tsk(x, Y, 3, 0.1);
    CHECK(argmax_decode(decision_values(m, x)) == labels);
}

}
