#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hill/operators.hpp"

namespace hill {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A(z, r) = (sum_{k >= 0} |z - k^2|^{-r})^{1/r}; direct sum up to max(window, 2 sqrt|z| + 64) plus integral tail.
double a_sum(cplx z, double r, long window = 0);

// sum_{k=0}^{N} sum_{m > N} 1/(m^2 - k^2)
double cross_pair_sum(int N);
double cross_pair_closed_form(int N);  // pi^2/6 - (1/4) sum_{n <= N} n^{-2}

// sum over {(k, m): 0 <= k <= N < m, m - k <= H} of 1/(m^2 - k^2)
double band_pair_sum(int N, int H);

struct KernelGrid {
    int G = 0;
    Lattice bc = Lattice::PerPlus;
    Eigen::MatrixXcd samples;  // K(x_i, y_j), x_i = i pi / G
    Eigen::MatrixXcd basis;    // u_k(x_i), G x n
    Eigen::MatrixXcd coeffs;   // M
    // false once samples carry terms outside basis * coeffs * basis^*; grid operations then use samples directly
    bool factored = true;
};

// Basis samples u_k(x_i) for the window.
Eigen::MatrixXcd basis_on_grid(const IndexWindow& w, int G);

KernelGrid kernel_from_matrix(const Eigen::MatrixXcd& M, const IndexWindow& w, int G);

// Applies (Af)(x_i) = (1/G) sum_j K(x_i, y_j) f(y_j), through the factored form when available.
Eigen::VectorXcd kernel_apply(const KernelGrid& K, const Eigen::VectorXcd& f);
Eigen::VectorXcd kernel_apply_adjoint(const KernelGrid& K, const Eigen::VectorXcd& g);

double grid_lp(const Eigen::VectorXcd& f, double p);

enum class Endpoint { OneToInf, OneToB, AToInf, TwoToTwo };

// Exact endpoint norms; p is b for OneToB and a for AToInf.
double opnorm_endpoint(const KernelGrid& K, Endpoint mode, double p = kInf);
double opnorm_two(const Eigen::MatrixXcd& M);

struct NormBracket {
    double lower = 0.0;
    double upper = 0.0;
    double a = 1.0, b = kInf;
    int iterations = 0;
};

NormBracket opnorm_general(const KernelGrid& K, double a, double b, int iters = 200, std::uint64_t seed = 7);

double wiener_norm(const Eigen::VectorXcd& c);
double wiener_norm(const Eigen::MatrixXcd& M);  // max over columns of the l1 norm

// Regime asymptotes along Re z = N^2 + N.
enum class Regime { Low, Middle, High };
Regime regime_of(int N, double y);
double a_asymptote(int N, double y, double r);

struct RegimeRow {
    int N;
    double r, y;
    Regime regime;
    double value, asymptote, ratio;
};
std::vector<RegimeRow> asymptote_check(const std::vector<int>& Ns, const std::vector<double>& rs);

// int_{|y| <= Y} A(N^2+N+iy, r)^p dy; Y = kInf adds the analytic tail beyond 1e4 (N^2+N)^2 when convergent.
double lambda_line_integral(int N, double r, double p, double Y = kInf);

// c_r = lim_{y -> inf} A(iy, r) y^{1 - 1/(2r)}.
double a_high_constant(double r);

}  // namespace hill
