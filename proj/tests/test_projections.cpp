#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "hill/errors.hpp"
#include "hill/projections.hpp"

using namespace hill;

namespace {

// Spectral projector from an eigendecomposition: sum of rank-one pieces for eigenvalues inside the rectangle.
Eigen::MatrixXcd eigen_projector(const Eigen::MatrixXcd& A, const ContourRect& R) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A);
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::MatrixXcd W = V.inverse();
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(A.rows(), A.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (R.contains(es.eigenvalues()(i))) P += V.col(i) * W.row(i);
    return P;
}

Eigen::VectorXcd diag_of(const Eigen::MatrixXcd& M) { return M.diagonal(); }

}  // namespace

TEST_CASE("scalar residues") {
    CHECK(scalar_residue(4, 2, 2) == doctest::Approx(-1.0 / 12));
    CHECK(scalar_residue(2, 4, 2) == doctest::Approx(-1.0 / 12));  // the integrand is symmetric in m, k
    CHECK(scalar_residue(4, 2, 1) == 0.0);
    CHECK(scalar_residue(1, 1, 3) == 0.0);
    CHECK(scalar_residue(1, -1, 0) == 0.0);
    CHECK(scalar_residue(0, 5, 7) == 0.0);
    for (auto [m, k, N] : {std::tuple{4L, 2L, 2}, std::tuple{3L, 0L, 2}, std::tuple{-5L, 1L, 4}, std::tuple{2L, -2L, 1}})
        CHECK(std::abs(scalar_contour_oracle(m, k, N).value - scalar_residue(m, k, N)) < 1e-10);
    CHECK(scalar_contour_oracle(4, 2, 2).nodes > 0);
}

TEST_CASE("free projectors") {
    const auto P1 = free_projector(Lattice::PerPlus, 2, index_window(Lattice::PerPlus, 4));
    Eigen::VectorXcd d1(5);
    d1 << 0, 1, 1, 1, 0;
    CHECK((diag_of(P1) - d1).norm() == 0.0);
    CHECK((P1 - Eigen::MatrixXcd(d1.asDiagonal())).norm() == 0.0);

    const auto P2 = free_projector(Lattice::Dir, 1, index_window(Lattice::Dir, 3));
    Eigen::VectorXcd d2(3);
    d2 << 1, 0, 0;
    CHECK((diag_of(P2) - d2).norm() == 0.0);

    const auto P3 = free_projector(Lattice::PerMinus, 3, index_window(Lattice::PerMinus, 5));
    Eigen::VectorXcd d3(6);
    d3 << 0, 1, 1, 1, 1, 0;
    CHECK((diag_of(P3) - d3).norm() == 0.0);
}

TEST_CASE("first-order deviation entries") {
    const CoeffSeq V(Lattice::PerPlus, CoeffRole::V, {{2, cplx(0, 2)}});
    const auto w = index_window(Lattice::PerPlus, 6);
    const auto T = tn_matrix(V, 2, w);
    // row 4 (outside X_N window), column 2 (inside): -V(2)/|16-4|
    CHECK(std::abs(T(w.position(4), w.position(2)) - cplx(0, -1.0 / 6)) < 1e-15);
    CHECK(std::abs(T(w.position(2), w.position(4))) == 0.0);
    CHECK(std::abs(T(w.position(2), w.position(0))) == 0.0);  // both inside

    const CoeffSeq Vd(Lattice::Dir, CoeffRole::V, {{3, 1.0}});
    const auto wd = index_window(Lattice::Dir, 5);
    const auto Td = tn_matrix(Vd, 1, wd);
    // entry (1, 2): -(V~(1) - V~(3)) / sqrt2 / |1 - 4|
    CHECK(Td(wd.position(1), wd.position(2)).real() == doctest::Approx(1.0 / (3 * std::sqrt(2.0))));
    CHECK(Td(wd.position(2), wd.position(1)).real() == doctest::Approx(1.0 / (3 * std::sqrt(2.0))));
}

TEST_CASE("free operator has no deviation") {
    for (Lattice bc : {Lattice::PerPlus, Lattice::PerMinus, Lattice::Dir}) {
        const CoeffSeq V(is_periodic(bc) ? Lattice::PerPlus : Lattice::Dir, CoeffRole::V);
        const auto P = deviation_set(assemble_operator(V, index_window(bc, 14)), V, 3);
        CHECK(P.D.norm() < 1e-10);
        CHECK(P.T.norm() == 0.0);
    }
}

TEST_CASE("Riesz projector of the Mathieu operator") {
    const auto pot = make_potential(PotentialSpec::parse("mathieu:amp=1"), Lattice::PerPlus, 128, 1);
    const int N = 8;
    const auto w = index_window(Lattice::PerPlus, 4 * N + 8);
    const auto L = assemble_operator(pot.V, w);
    const auto P = deviation_set(L, pot.V, N);
    CHECK(P.idempotency < 1e-8);
    CHECK(std::abs(P.trace - cplx(N + 1, 0)) < 1e-8);  // even indices with |k| <= 8
    CHECK(P.B.norm() < P.T.norm());
    CHECK(((P.T + P.B) - P.D).norm() < 1e-14);
    CHECK((P.S - eigen_projector(L.matrix, P.rect)).norm() < 1e-8);
}

TEST_CASE("resolvent routes agree with the eigendecomposition") {
    const auto pot = make_potential(PotentialSpec::parse("trig:2=3,-2=1i,4=0.5"), Lattice::PerPlus, 32, 1);
    const auto w = index_window(Lattice::PerPlus, 24);
    const auto L = assemble_operator(pot.V, w);
    RieszOptions schur, lu;
    lu.route = ResolventRoute::DenseLU;
    const auto a = riesz_projector(L, 4, schur);
    const auto b = riesz_projector(L, 4, lu);
    CHECK((a.S - b.S).norm() < 1e-9);
    CHECK((a.S - eigen_projector(L.matrix, a.rect)).norm() < 1e-8);
    CHECK((a.S * a.S - a.S).norm() < 1e-8);
}

TEST_CASE("first-order part by quadrature") {
    for (Lattice bc : {Lattice::PerPlus, Lattice::Dir}) {
        const auto pot = make_potential(PotentialSpec::parse("sawtooth:amp=1"), bc, 64, 1);
        const auto w = index_window(bc, 14);
        const auto L = assemble_operator(pot.V, w);
        CHECK((tn_matrix(pot.V, 3, w) - tn_quadrature(pot.V, 3, w, default_rect(3, L))).norm() < 1e-8);
    }
}

TEST_CASE("selection sets") {
    const auto s = selection_sets(2, 1, index_window(Lattice::Dir, 4));
    CHECK(s.delta == std::vector<std::pair<long, long>>{{2, 3}});
    for (auto [m, k] : s.X) CHECK(((std::labs(m) > 2) != (std::labs(k) > 2)));

    const auto p = selection_sets(2, 1, index_window(Lattice::PerPlus, 4));
    // inside {-2,0,2}, outside {-4,4}: 3 * 2 ordered both ways
    CHECK(p.X.size() == 12);
}

TEST_CASE("eigenvalue on the contour is refused") {
    // diagonal shift that puts an eigenvalue exactly at N^2 + N
    const CoeffSeq V(Lattice::PerPlus, CoeffRole::V, {{0, 2.0}});
    const auto L = assemble_operator(V, index_window(Lattice::PerPlus, 8));
    RieszOptions opt;
    opt.max_retries = 0;
    CHECK_THROWS_AS(riesz_projector(L, 2, opt), ContourError);
}
