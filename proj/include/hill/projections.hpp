#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "hill/operators.hpp"

namespace hill {

// Closed-form (1/2 pi i) \oint dz / ((z - m^2)(z - k^2)) over the level-N rectangle.
double scalar_residue(long m, long k, int N);

struct ScalarQuad {
    cplx value;
    int nodes = 0;
};
// Numerical value of the same integral by panel Gauss-Legendre quadrature; rect defaults to omega = 5, h = max(N, 10).
ScalarQuad scalar_contour_oracle(long m, long k, int N, std::optional<ContourRect> rect = std::nullopt);

Eigen::MatrixXcd free_projector(Lattice bc, int N, const IndexWindow& w);

enum class ResolventRoute { Schur, DenseLU };

struct RieszOptions {
    ResolventRoute route = ResolventRoute::Schur;
    double tol = 1e-9;          // successive-refinement Frobenius tolerance
    int max_doublings = 6;
    double idempotency_gate = 1e-8;
    double min_clearance = 0.1;  // spectrum-to-boundary
    int max_retries = 8;
    std::optional<double> omega, h;  // overrides
};

struct RieszResult {
    Eigen::MatrixXcd S;
    ContourRect rect;
    Eigen::VectorXcd eigenvalues;
    int nodes = 0;
    int retries = 0;
    int inside = 0;
    double quad_diff = 0.0;
    double min_distance = 0.0;
    double idempotency = 0.0;
};

ContourRect default_rect(int N, const TruncatedOperator& L);

RieszResult riesz_projector(const TruncatedOperator& L, int N, const RieszOptions& opt = {});

// First-order deviation on X(N): -A(m,k)/|m^2 - k^2| with A the potential matrix.
Eigen::MatrixXcd tn_matrix(const CoeffSeq& V, int N, const IndexWindow& w);

// Direct quadrature of (1/2 pi i) \oint R0 V R0 dz over the rectangle.
Eigen::MatrixXcd tn_quadrature(const CoeffSeq& V, int N, const IndexWindow& w, const ContourRect& rect);

struct ProjectorSet {
    Lattice bc = Lattice::PerPlus;
    int N = 0;
    IndexWindow window;
    Eigen::MatrixXcd S, S0, D, T, B;
    ContourRect rect;
    int nodes = 0;
    double min_distance = 0.0;
    double idempotency = 0.0;
    double quad_diff = 0.0;
    int inside = 0;
    cplx trace;
};

ProjectorSet deviation_set(const TruncatedOperator& L, const CoeffSeq& V, int N, const RieszOptions& opt = {});

void write_projector_set(const ProjectorSet& P, const std::string& dir);

struct SelectionSet {
    std::vector<std::pair<long, long>> X;      // (m, k): exactly one of |m|, |k| exceeds N
    std::vector<std::pair<long, long>> delta;  // (k, m): 0 <= k <= N < m, m - k <= H
};

SelectionSet selection_sets(int N, int H, const IndexWindow& w);

}  // namespace hill
