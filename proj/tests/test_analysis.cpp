#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dplms/analysis.hpp"

using namespace dplms;

namespace {

Matrix random_spd(std::size_t m, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (auto& c : g.reshaped()) c = normal(rng);
    return g * g.transpose() / static_cast<double>(m) + 0.1 * Matrix::Identity(g.rows(), g.cols());
}

double eigen_radius(const Matrix& b) {
    return Eigen::EigenSolver<Matrix>(b, false).eigenvalues().cwiseAbs().maxCoeff();
}

// Doubly stochastic matrix from a convex mix of permutation matrices.
Eigen::MatrixXd doubly_stochastic(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double w = unit(rng);
        for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i])) += w;
        total += w;
        std::shuffle(perm.begin(), perm.end(), rng);
    }
    return a / total;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("msd examples") {
    Vector wo(2);
    wo << 1.0, 0.0;
    std::vector<Vector> same(3, wo);
    CHECK(msd(wo, same) == 0.0);
    std::vector<Vector> zeros(4, Vector::Zero(2));
    CHECK(msd(wo, zeros) == 1.0);
    Vector a(2), b(2);
    a << 0.0, 0.0;
    b << 1.0, 1.0;
    std::vector<Vector> mixed{a, b};
    CHECK(msd(wo, mixed) == doctest::Approx(1.0));
}

TEST_CASE("msd matches a double loop and ignores node labels") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 7;
        const int m = 1 + trial % 5;
        Vector wo(m);
        for (auto& c : wo) c = normal(rng);
        std::vector<Vector> nodes(static_cast<std::size_t>(n), Vector(m));
        for (auto& v : nodes)
            for (auto& c : v) c = normal(rng);
        double expected = 0.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < m; ++j) {
                const double diff = wo[j] - nodes[static_cast<std::size_t>(k)][j];
                expected += diff * diff;
            }
        expected /= n;
        CHECK(std::abs(msd(wo, nodes) - expected) <= 1e-12 * std::max(1.0, expected));
        auto shuffled = nodes;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(msd(wo, shuffled) == doctest::Approx(msd(wo, nodes)).epsilon(1e-14));
    }
}

TEST_CASE("curve dB and CSV layout") {
    MsdCurve curve{{1.0, 0.1, 0.01}, 1.0};
    const auto db = curve.db();
    CHECK(db[1] == doctest::Approx(-10.0));
    CHECK(curve.steady_state_db(2) == doctest::Approx(to_db(0.055)));
    std::ostringstream out;
    write_msd_csv(out, curve);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "iteration,msd_linear,msd_db");
    std::getline(in, line);
    CHECK(line.rfind("1,1,0", 0) == 0);
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("mean error matrix: mu = 0 gives A^T kron I") {
    MeanRecursionModel model;
    model.combination = Eigen::MatrixXd(2, 2);
    model.combination << 0.7, 0.4, 0.3, 0.6;
    model.adaptation = Eigen::MatrixXd::Identity(2, 2);
    model.alphas = {0.5, 0.8};
    model.covariances = {Matrix::Identity(3, 3), 2.0 * Matrix::Identity(3, 3)};
    model.mu = 0.0;
    const Matrix b = mean_error_matrix(model);
    Matrix expected = Matrix::Zero(6, 6);
    for (int n = 0; n < 2; ++n)
        for (int l = 0; l < 2; ++l) expected.block(3 * n, 3 * l, 3, 3) = model.combination(l, n) * Matrix::Identity(3, 3);
    CHECK((b - expected).norm() == 0.0);
}

TEST_CASE("mean error matrix: scalar single node") {
    MeanRecursionModel model;
    model.combination = Eigen::MatrixXd::Identity(1, 1);
    model.adaptation = Eigen::MatrixXd::Identity(1, 1);
    model.alphas = {0.5};
    model.covariances = {Matrix::Constant(1, 1, 2.0)};
    model.mu = 0.3;
    CHECK(mean_error_matrix(model)(0, 0) == doctest::Approx(1.0 - 0.3 * 0.5 * 2.0));
}

TEST_CASE("mean error matrix matches brute-force block assembly") {
    std::mt19937_64 rng(21);
    const std::size_t n = 3;
    const std::size_t m = 2;
    MeanRecursionModel model;
    model.combination = doubly_stochastic(n, rng);
    model.adaptation = doubly_stochastic(n, rng);
    model.alphas = {0.3, 0.5, 0.9};
    for (std::size_t k = 0; k < n; ++k) model.covariances.push_back(random_spd(m, rng));
    model.mu = 0.4;

    // (A kron I)^T (I - mu diag_n(sum_l alpha_l c_{l,n} R_l)) built element by element.
    Matrix at = Matrix::Zero(6, 6);
    Matrix sr = Matrix::Identity(6, 6);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t i = 0; i < m; ++i)
                at(static_cast<Eigen::Index>(r * m + i), static_cast<Eigen::Index>(c * m + i)) =
                    model.combination(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
    for (std::size_t blk = 0; blk < n; ++blk)
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    sr(static_cast<Eigen::Index>(blk * m + i), static_cast<Eigen::Index>(blk * m + j)) -=
                        model.mu * model.alphas[l] *
                        model.adaptation(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(blk)) *
                        model.covariances[l](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    CHECK((mean_error_matrix(model) - at * sr).norm() < 1e-14);
}

TEST_CASE("stability bound examples") {
    const std::vector<double> one{1.0};
    const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(1, 1);
    std::vector<Matrix> r{0.5 * Matrix::Identity(4, 4)};
    CHECK(stability_bound(one, c, r) == doctest::Approx(4.0));

    std::mt19937_64 rng(1);
    std::vector<Matrix> base{random_spd(3, rng), random_spd(3, rng)};
    std::vector<Matrix> doubled{2.0 * base[0], 2.0 * base[1]};
    const std::vector<double> alphas{0.4, 0.7};
    const Eigen::MatrixXd c2 = Eigen::MatrixXd::Constant(2, 2, 0.5);
    CHECK(stability_bound(alphas, c2, doubled) == doctest::Approx(0.5 * stability_bound(alphas, c2, base)));

    std::vector<Matrix> bad{Matrix::Identity(2, 2)};
    bad[0](0, 0) = -1.0;
    CHECK_THROWS_AS(stability_bound(one, c, bad), std::invalid_argument);
    std::vector<Matrix> asym{Matrix::Identity(2, 2)};
    asym[0](0, 1) = 0.5;
    CHECK_THROWS_AS(stability_bound(one, c, asym), std::invalid_argument);
}

TEST_CASE("stability bound on three nodes against a power-iteration oracle") {
    const std::vector<double> alphas{0.8, 0.6, 0.5};
    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
    std::vector<Matrix> r;
    for (double v : {0.5, 1.0, 1.5}) r.push_back(v * Matrix::Identity(2, 2));
    // Every block is (sum_l alpha_l v_l / 3) I.
    const double lambda = (0.8 * 0.5 + 0.6 * 1.0 + 0.5 * 1.5) / 3.0;
    Matrix block = lambda * Matrix::Identity(2, 2);
    Vector v = Vector::Ones(2);
    double rho = 0.0;
    for (int k = 0; k < 200; ++k) {
        const Vector w = block * v;
        rho = w.norm() / v.norm();
        v = w / w.norm();
    }
    CHECK(stability_bound(alphas, c, r) == doctest::Approx(2.0 / rho).epsilon(1e-12));
    CHECK(stability_bound(alphas, c, r, BoundVariant::literal_diagonal) ==
          doctest::Approx(2.0 / lambda).epsilon(1e-12));
}

TEST_CASE("spectral radius") {
    CHECK(spectral_radius(Matrix::Identity(4, 4)) == doctest::Approx(1.0).epsilon(1e-10));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.2;
    d(1, 1) = 0.9;
    CHECK(spectral_radius(d) == doctest::Approx(0.9).epsilon(1e-10));
    Matrix pm = Matrix::Zero(2, 2);
    pm(0, 0) = 0.7;
    pm(1, 1) = -0.7;
    CHECK(spectral_radius(pm) == doctest::Approx(0.7).epsilon(1e-10));

    std::mt19937_64 rng(6);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix g(6, 6);
        for (auto& c : g.reshaped()) c = normal(rng);
        const Matrix sym = 0.5 * (g + g.transpose());
        const double expected = Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().cwiseAbs().maxCoeff();
        CHECK(spectral_radius(sym) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("step sizes under the bound give a contracting mean recursion") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> nodes(1, 5);
    std::uniform_int_distribution<std::size_t> taps(1, 4);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        MeanRecursionModel model;
        const auto n = nodes(rng);
        const auto m = taps(rng);
        model.combination = doubly_stochastic(n, rng);
        model.adaptation = doubly_stochastic(n, rng);
        for (std::size_t k = 0; k < n; ++k) {
            model.alphas.push_back(unit(rng));
            model.covariances.push_back(random_spd(m, rng));
        }
        const double bound = stability_bound(model.alphas, model.adaptation, model.covariances);
        model.mu = 0.95 * bound * unit(rng);
        CHECK(eigen_radius(mean_error_matrix(model)) < 1.0);
    }
}

}
