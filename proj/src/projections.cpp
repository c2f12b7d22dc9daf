#include "hill/projections.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

#include "contour.hpp"
#include "json.hpp"

namespace hill {

namespace {

// Near-normal operators give Schur factors whose strict upper part is at roundoff level; products of such
// entries fall into the subnormal range and stall the FPU. They are far below every tolerance in use.
class FlushSubnormals {
public:
    FlushSubnormals() {
#if defined(__SSE2__)
        csr_ = _mm_getcsr();
        _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
        _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
#endif
    }
    ~FlushSubnormals() {
#if defined(__SSE2__)
        _mm_setcsr(csr_);
#endif
    }
    FlushSubnormals(const FlushSubnormals&) = delete;
    FlushSubnormals& operator=(const FlushSubnormals&) = delete;

private:
    unsigned csr_ = 0;
};

// Accumulates w (z - T)^{-1} for upper-triangular T, column by column with axpy updates.
class TriangularResolvent {
public:
    explicit TriangularResolvent(const Eigen::MatrixXcd& T) : n_(T.rows()), tr_(n_ * n_), ti_(n_ * n_), d_(n_) {
        for (Eigen::Index j = 0; j < n_; ++j) {
            d_[j] = T(j, j);
            for (Eigen::Index i = 0; i < j; ++i) {
                tr_[j * n_ + i] = T(i, j).real();
                ti_[j * n_ + i] = T(i, j).imag();
            }
        }
    }

    void add(cplx z, cplx w, Eigen::MatrixXcd& P) const {
        const FlushSubnormals ftz;
        std::vector<double> inv_r(n_), inv_i(n_), xr(n_), xi(n_), ar(n_), ai(n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            const cplx v = 1.0 / (z - d_[i]);
            inv_r[i] = v.real();
            inv_i[i] = v.imag();
        }
        for (Eigen::Index j = 0; j < n_; ++j) {
            std::fill(ar.begin(), ar.begin() + j, 0.0);
            std::fill(ai.begin(), ai.begin() + j, 0.0);
            xr[j] = inv_r[j];
            xi[j] = inv_i[j];
            for (Eigen::Index k = j; k >= 1; --k) {
                const double pr = xr[k], pi = xi[k];
                const double* cr = &tr_[k * n_];
                const double* ci = &ti_[k * n_];
                double* __restrict a_r = ar.data();
                double* __restrict a_i = ai.data();
                for (Eigen::Index i = 0; i < k; ++i) {
                    a_r[i] += cr[i] * pr - ci[i] * pi;
                    a_i[i] += cr[i] * pi + ci[i] * pr;
                }
                const Eigen::Index m = k - 1;
                xr[m] = ar[m] * inv_r[m] - ai[m] * inv_i[m];
                xi[m] = ar[m] * inv_i[m] + ai[m] * inv_r[m];
            }
            for (Eigen::Index i = 0; i <= j; ++i) P(i, j) += w * cplx(xr[i], xi[i]);
        }
    }

private:
    Eigen::Index n_;
    std::vector<double> tr_, ti_;  // strict upper part, column-major
    std::vector<cplx> d_;
};

bool level_inside(cplx z, int N) { return z.real() <= static_cast<double>(N) * N + N; }

std::vector<cplx> free_poles(const IndexWindow& w) {
    std::vector<cplx> p;
    for (long k : w.indices) p.emplace_back(static_cast<double>(k) * k, 0.0);
    std::sort(p.begin(), p.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
}

}  // namespace

double scalar_residue(long m, long k, int N) {
    const bool mi = std::labs(m) <= N, ki = std::labs(k) <= N;
    if (mi == ki) return 0.0;
    const double diff = static_cast<double>(m) * m - static_cast<double>(k) * k;
    return mi ? 1.0 / diff : -1.0 / diff;
}

ScalarQuad scalar_contour_oracle(long m, long k, int N, std::optional<ContourRect> rect) {
    const ContourRect R = rect.value_or(ContourRect{N, 5.0, std::max(10.0, static_cast<double>(N))});
    const cplx pm(static_cast<double>(m) * m, 0.0), pk(static_cast<double>(k) * k, 0.0);
    if (R.boundary_distance(pm) < 0.1 || R.boundary_distance(pk) < 0.1)
        throw ContourError("pole within 0.1 of the contour");
    auto eval = [&](cplx z, cplx w, cplx& acc) { acc += w / ((z - pm) * (z - pk)); };
    auto res = detail::integrate_adaptive(detail::build_panels(R, {pm, pk}), cplx{}, eval, 1e-13, 8);
    return {res.value, res.nodes};
}

Eigen::MatrixXcd free_projector(Lattice bc, int N, const IndexWindow& w) {
    if (w.lattice != bc) throw LatticeMismatch("window lattice differs from boundary condition");
    if (w.max_abs() < N) throw InvalidArgument("window too small for level " + std::to_string(N));
    Eigen::MatrixXcd S0 = Eigen::MatrixXcd::Zero(w.size(), w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (std::labs(w.indices[static_cast<std::size_t>(i)]) <= N) S0(i, i) = 1.0;
    return S0;
}

ContourRect default_rect(int N, const TruncatedOperator& L) {
    // l1 norm of the potential coefficients present in the window, read off the first column/row structure
    double l1 = 0.0;
    const Eigen::Index n = L.matrix.rows();
    Eigen::MatrixXcd A = L.matrix;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k = static_cast<double>(L.window.indices[static_cast<std::size_t>(i)]);
        A(i, i) -= k * k;
    }
    for (Eigen::Index j = 0; j < n; ++j) l1 = std::max(l1, A.col(j).cwiseAbs().sum());
    return ContourRect{N, 5.0 + 2 * l1, std::max(10.0, static_cast<double>(N))};
}

RieszResult riesz_projector(const TruncatedOperator& L, int N, const RieszOptions& opt) {
    const Eigen::Index n = L.matrix.rows();
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(L.matrix);
    if (schur.info() != Eigen::Success) throw Error("Schur decomposition failed");
    const Eigen::MatrixXcd& T = schur.matrixT();
    const Eigen::MatrixXcd& U = schur.matrixU();

    RieszResult out;
    out.eigenvalues = T.diagonal();
    ContourRect R = default_rect(N, L);
    if (opt.omega) R.omega = *opt.omega;
    if (opt.h) R.h = *opt.h;

    auto offending = [&](const ContourRect& rc, bool& low) {
        int bad = 0;
        low = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const cplx z = out.eigenvalues(i);
            const bool near = rc.boundary_distance(z) < opt.min_clearance;
            const bool escaped = level_inside(z, N) && !rc.contains(z);
            if (near || escaped) {
                ++bad;
                if (z.real() < -rc.omega + opt.min_clearance) low = true;
            }
        }
        return bad;
    };
    bool low = false;
    int bad = offending(R, low);
    while (bad > 0 && out.retries < opt.max_retries) {
        ++out.retries;
        R.h *= 1.5;
        if (low) R.omega = 1.5 * R.omega + 5.0;
        bad = offending(R, low);
    }
    if (bad > 0) {
        std::ostringstream msg;
        msg << bad << " eigenvalue(s) within " << opt.min_clearance << " of the level-" << N
            << " rectangle after " << out.retries << " retries; grow h or perturb omega";
        throw ContourError(msg.str());
    }
    out.rect = R;
    out.min_distance = std::numeric_limits<double>::infinity();
    std::vector<cplx> poles(out.eigenvalues.data(), out.eigenvalues.data() + n);
    for (const auto& z : poles) {
        out.min_distance = std::min(out.min_distance, R.boundary_distance(z));
        if (R.contains(z)) ++out.inside;
    }
    const auto panels = detail::build_panels(R, poles);
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(n, n);

    if (opt.route == ResolventRoute::Schur) {
        const TriangularResolvent tri(T);
        auto eval = [&](cplx z, cplx w, Eigen::MatrixXcd& acc) { tri.add(z, w, acc); };
        auto res = detail::integrate_adaptive(panels, zero, eval, opt.tol, opt.max_doublings);
        out.nodes = res.nodes;
        out.quad_diff = res.last_diff;
        if (!res.converged) throw NonIdempotent("contour quadrature did not converge", res.last_diff);
        Eigen::MatrixXcd P = res.value.triangularView<Eigen::Upper>();
        out.S = U * P * U.adjoint();
    } else {
        const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
        auto eval = [&](cplx z, cplx w, Eigen::MatrixXcd& acc) { acc += w * resolvent_apply(L, z, I); };
        auto res = detail::integrate_adaptive(panels, zero, eval, opt.tol, opt.max_doublings);
        out.nodes = res.nodes;
        out.quad_diff = res.last_diff;
        if (!res.converged) throw NonIdempotent("contour quadrature did not converge", res.last_diff);
        out.S = res.value;
    }
    out.idempotency = (out.S * out.S - out.S).norm();
    if (out.idempotency > opt.idempotency_gate)
        throw NonIdempotent("projector fails idempotency gate: " + std::to_string(out.idempotency), out.idempotency);
    return out;
}

Eigen::MatrixXcd tn_matrix(const CoeffSeq& V, int N, const IndexWindow& w) {
    Eigen::MatrixXcd T = potential_matrix(V, w);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const long m = w.indices[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            const long k = w.indices[static_cast<std::size_t>(j)];
            const bool mi = std::labs(m) <= N, ki = std::labs(k) <= N;
            if (mi == ki) {
                T(i, j) = 0.0;
                continue;
            }
            const double gap = std::fabs(static_cast<double>(m) * m - static_cast<double>(k) * k);
            T(i, j) = -T(i, j) / gap;
        }
    }
    return T;
}

Eigen::MatrixXcd tn_quadrature(const CoeffSeq& V, int N, const IndexWindow& w, const ContourRect& rect) {
    if (rect.N != N) throw InvalidArgument("rectangle level differs from N");
    const Eigen::MatrixXcd A = potential_matrix(V, w);
    Eigen::VectorXd sq(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double k = static_cast<double>(w.indices[static_cast<std::size_t>(i)]);
        sq(i) = k * k;
    }
    const auto poles = free_poles(w);
    for (const auto& p : poles)
        if (rect.boundary_distance(p) < 0.1) throw ContourError("free eigenvalue within 0.1 of the contour");
    auto eval = [&](cplx z, cplx wt, Eigen::MatrixXcd& acc) {
        const Eigen::VectorXcd r = (z - sq.array().cast<cplx>()).inverse().matrix();
        acc += wt * (r.asDiagonal() * A * r.asDiagonal());
    };
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(w.size(), w.size());
    auto res = detail::integrate_adaptive(detail::build_panels(rect, poles), zero, eval, 1e-11, 8);
    return res.value;
}

ProjectorSet deviation_set(const TruncatedOperator& L, const CoeffSeq& V, int N, const RieszOptions& opt) {
    const auto rz = riesz_projector(L, N, opt);
    ProjectorSet P;
    P.bc = L.bc;
    P.N = N;
    P.window = L.window;
    P.S = rz.S;
    P.S0 = free_projector(L.bc, N, L.window);
    P.T = tn_matrix(V, N, L.window);
    P.D = P.S - P.S0;
    P.B = P.D - P.T;
    P.rect = rz.rect;
    P.nodes = rz.nodes;
    P.min_distance = rz.min_distance;
    P.idempotency = rz.idempotency;
    P.quad_diff = rz.quad_diff;
    P.inside = rz.inside;
    P.trace = rz.S.trace();
    return P;
}

void write_projector_set(const ProjectorSet& P, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::pair<const char*, const Eigen::MatrixXcd*> mats[] = {
        {"S", &P.S}, {"S0", &P.S0}, {"D", &P.D}, {"T", &P.T}, {"B", &P.B}};
    for (const auto& [name, M] : mats) write_matrix_csv(*M, P.window, dir + "/" + name + ".csv");
    nlohmann::json meta{{"bc", to_string(P.bc)},
                        {"N", P.N},
                        {"K_max", P.window.max_abs()},
                        {"omega", P.rect.omega},
                        {"h", P.rect.h},
                        {"nodes", P.nodes},
                        {"min_contour_distance", P.min_distance},
                        {"idempotency_defect", P.idempotency},
                        {"quadrature_refinement_diff", P.quad_diff},
                        {"eigenvalues_inside", P.inside},
                        {"trace_re", P.trace.real()},
                        {"trace_im", P.trace.imag()},
                        {"norm_D_fro", P.D.norm()},
                        {"norm_T_fro", P.T.norm()},
                        {"norm_B_fro", P.B.norm()}};
    std::ofstream os(dir + "/metadata.json");
    if (!os) throw Error("cannot write metadata in " + dir);
    os << std::setw(2) << meta << '\n';
}

SelectionSet selection_sets(int N, int H, const IndexWindow& w) {
    if (H <= 0 || H >= N) throw InvalidArgument("selection sets need 0 < H < N");
    SelectionSet s;
    for (long m : w.indices)
        for (long k : w.indices)
            if ((std::labs(m) <= N) != (std::labs(k) <= N)) s.X.emplace_back(m, k);
    for (long k : w.indices)
        for (long m : w.indices)
            if (k >= 0 && k <= N && m > N && m - k <= H) s.delta.emplace_back(k, m);
    return s;
}

}  // namespace hill
