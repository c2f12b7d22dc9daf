#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hill/coeffs.hpp"

namespace hill {

struct IndexWindow {
    Lattice lattice = Lattice::PerPlus;
    std::vector<long> indices;  // sorted, unique

    Eigen::Index size() const { return static_cast<Eigen::Index>(indices.size()); }
    long max_abs() const;
    Eigen::Index position(long k) const;  // -1 when absent
};

IndexWindow index_window(Lattice bc, long K_max);

// Pi_N = {-omega <= Re z <= N^2 + N, |Im z| <= h}
struct ContourRect {
    int N = 0;
    double omega = 5.0;
    double h = 10.0;
    double right() const { return static_cast<double>(N) * N + N; }
    bool contains(cplx z) const { return z.real() >= -omega && z.real() <= right() && std::abs(z.imag()) <= h; }
    double boundary_distance(cplx z) const;  // distance from z to the rectangle boundary
};

struct TruncatedOperator {
    IndexWindow window;
    Eigen::MatrixXcd matrix;
    Lattice bc = Lattice::PerPlus;
    std::string potential_id;
    long K_max = 0;
};

// Single entry (row, col) of the potential part, for indices anywhere on the lattice.
cplx potential_entry(const CoeffSeq& V, Lattice bc, long row, long col);

// Potential part only: V(k-m) for Per+-, (V~(|k-m|) - V~(k+m))/sqrt2 for Dir.
Eigen::MatrixXcd potential_matrix(const CoeffSeq& V, const IndexWindow& w);

TruncatedOperator assemble_operator(const CoeffSeq& V, const IndexWindow& w, const std::string& id = "");

// z^{1/2} = sqrt(r) e^{i phi/2} with phi in [0, 2 pi).
cplx sqrt_branch(cplx z);

Eigen::VectorXcd k_lambda_diag(cplx lambda, const IndexWindow& w);

Eigen::MatrixXcd kvk_matrix(const CoeffSeq& V, cplx lambda, const IndexWindow& w);

struct KvkNorm {
    double hs = 0.0;
    // square root of sum over j, m in Z, |j|, |m| <= window radius, of |V_Z(j-m)|^2 / (|lambda-j^2||lambda-m^2|),
    // where V_Z = V on 2Z (zero on odd) for Per+- and V_Z(s) = V~(|s|) for Dir; dominates hs.
    double unified_bound = 0.0;
};
KvkNorm kvk_hs_norm(const CoeffSeq& V, cplx lambda, const IndexWindow& w);

struct AbSums {
    double a = 0.0;  // sum_{k in Z} 1/|lambda - k^2|
    double b = 0.0;  // sum_{k in Z} 1/|lambda - k^2|^2
    double tail_a = 0.0, tail_b = 0.0;
};
// lambda = N^2 + N + iy; direct sum over |k| <= window then integral tail.
AbSums ab_sums(int N, double y, long window);

struct PsiBound {
    double exact = 0.0;
    double bound = 0.0;
    double tail = 0.0;  // analytic completion included in exact
};
// q on 2Z (periodic) or on N (Dirichlet, extended evenly to Z). q(0) does not enter.
PsiBound psi_and_bound(const CoeffSeq& q, int N, double y);

// Solves (lambda I - L) X = F by LU with partial pivoting.
Eigen::MatrixXcd resolvent_apply(const TruncatedOperator& L, cplx lambda, const Eigen::MatrixXcd& F);

void write_matrix_csv(const Eigen::MatrixXcd& M, const IndexWindow& w, const std::string& path);

}  // namespace hill
