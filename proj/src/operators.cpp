#include "hill/operators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "tail.hpp"

namespace hill {

namespace {
const double sqrt2 = std::sqrt(2.0);

void require_compatible(const CoeffSeq& V, const IndexWindow& w) {
    const Lattice need = w.lattice == Lattice::Dir ? Lattice::Dir : Lattice::PerPlus;
    if (V.lattice() != need)
        throw LatticeMismatch("potential on " + to_string(V.lattice()) + " does not fit window on " +
                              to_string(w.lattice));
}

}  // namespace

double ContourRect::boundary_distance(cplx z) const {
    const double x = z.real(), y = z.imag(), R = right();
    auto seg = [](double px, double py, double ax, double ay, double bx, double by) {
        const double dx = bx - ax, dy = by - ay;
        double t = ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy);
        t = std::clamp(t, 0.0, 1.0);
        return std::hypot(px - ax - t * dx, py - ay - t * dy);
    };
    return std::min({seg(x, y, -omega, -h, R, -h), seg(x, y, R, -h, R, h), seg(x, y, R, h, -omega, h),
                     seg(x, y, -omega, h, -omega, -h)});
}

long IndexWindow::max_abs() const {
    if (indices.empty()) return 0;
    return std::max(std::labs(indices.front()), std::labs(indices.back()));
}

Eigen::Index IndexWindow::position(long k) const {
    auto it = std::lower_bound(indices.begin(), indices.end(), k);
    if (it == indices.end() || *it != k) return -1;
    return static_cast<Eigen::Index>(it - indices.begin());
}

IndexWindow index_window(Lattice bc, long K_max) {
    if (K_max < 2) throw InvalidArgument("K_max must be at least 2");
    IndexWindow w{bc, {}};
    switch (bc) {
        case Lattice::PerPlus:
        case Lattice::PerMinus:
            for (long k = -K_max; k <= K_max; ++k)
                if (on_lattice(bc, k)) w.indices.push_back(k);
            break;
        case Lattice::Dir:
            for (long k = 1; k <= K_max; ++k) w.indices.push_back(k);
            break;
        case Lattice::Integers:  // selection-set bookkeeping only
            for (long k = -K_max; k <= K_max; ++k) w.indices.push_back(k);
            break;
    }
    return w;
}

cplx potential_entry(const CoeffSeq& V, Lattice bc, long k, long m) {
    if (bc == Lattice::Dir) {
        const long d = std::labs(k - m);
        return ((d == 0 ? cplx{} : V[d]) - V[k + m]) / sqrt2;
    }
    return V[k - m];
}

Eigen::MatrixXcd potential_matrix(const CoeffSeq& V, const IndexWindow& w) {
    require_compatible(V, w);
    const Eigen::Index n = w.size();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const long k = w.indices[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j)
            M(i, j) = potential_entry(V, w.lattice, k, w.indices[static_cast<std::size_t>(j)]);
    }
    return M;
}

TruncatedOperator assemble_operator(const CoeffSeq& V, const IndexWindow& w, const std::string& id) {
    TruncatedOperator L;
    L.window = w;
    L.bc = w.lattice;
    L.potential_id = id;
    L.K_max = w.max_abs();
    L.matrix = potential_matrix(V, w);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double k = static_cast<double>(w.indices[static_cast<std::size_t>(i)]);
        L.matrix(i, i) += k * k;
    }
    return L;
}

cplx sqrt_branch(cplx z) {
    double phi = std::atan2(z.imag(), z.real());
    if (phi < 0) phi += 2 * std::numbers::pi;
    return std::polar(std::sqrt(std::abs(z)), phi / 2);
}

Eigen::VectorXcd k_lambda_diag(cplx lambda, const IndexWindow& w) {
    Eigen::VectorXcd K(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double j = static_cast<double>(w.indices[static_cast<std::size_t>(i)]);
        const cplx z = lambda - j * j;
        if (std::abs(z) <= 1e-14 * (1.0 + j * j))
            throw SingularityError("lambda lies on the free spectrum at j = " + std::to_string(static_cast<long>(j)));
        K(i) = 1.0 / sqrt_branch(z);
    }
    return K;
}

Eigen::MatrixXcd kvk_matrix(const CoeffSeq& V, cplx lambda, const IndexWindow& w) {
    const Eigen::VectorXcd K = k_lambda_diag(lambda, w);
    return K.asDiagonal() * potential_matrix(V, w) * K.asDiagonal();
}

KvkNorm kvk_hs_norm(const CoeffSeq& V, cplx lambda, const IndexWindow& w) {
    KvkNorm out;
    out.hs = kvk_matrix(V, lambda, w).norm();
    const bool dir = w.lattice == Lattice::Dir;
    const long R = w.max_abs();
    std::vector<double> inv(static_cast<std::size_t>(2 * R + 1));
    for (long j = -R; j <= R; ++j) inv[static_cast<std::size_t>(j + R)] = 1.0 / std::abs(lambda - static_cast<double>(j * j));
    double s2 = 0.0;
    for (long j = -R; j <= R; ++j)
        for (long m = -R; m <= R; ++m) {
            const long d = j - m;
            if (d == 0) continue;
            const cplx v = dir ? V[std::labs(d)] : (d % 2 == 0 ? V[d] : cplx{});
            if (v == cplx{}) continue;
            s2 += std::norm(v) * inv[static_cast<std::size_t>(j + R)] * inv[static_cast<std::size_t>(m + R)];
        }
    out.unified_bound = std::sqrt(s2);
    return out;
}

AbSums ab_sums(int N, double y, long window) {
    if (window < 4L * N) throw InvalidArgument("ab_sums window must be at least 4N");
    const double x = static_cast<double>(N) * N + N;
    const cplx lam(x, y);
    const long W = std::max<long>(window, static_cast<long>(4 * std::sqrt(x)) + 256);
    AbSums s;
    for (long k = -W; k <= W; ++k) {
        const double d = std::abs(lam - static_cast<double>(k * k));
        if (d == 0.0) throw SingularityError("lambda on the free spectrum");
        s.a += 1.0 / d;
        s.b += 1.0 / (d * d);
    }
    auto g = [&](double k) { return (k * k - x) * (k * k - x) + y * y; };  // |lambda - k^2|^2
    s.tail_a = 2 * detail::tail_sum(static_cast<double>(W + 1), [&](double k) { return std::pow(g(k), -0.5); });
    s.tail_b = 2 * detail::tail_sum(static_cast<double>(W + 1), [&](double k) { return 1.0 / g(k); });
    s.a += s.tail_a;
    s.b += s.tail_b;
    return s;
}

PsiBound psi_and_bound(const CoeffSeq& q, int N, double y) {
    // Extend q to Z: periodic sequences live on 2Z already; Dirichlet ones are extended evenly.
    CoeffSeq qz(Lattice::Integers, CoeffRole::Q);
    if (q.lattice() == Lattice::Dir) {
        for (const auto& [m, v] : q.entries()) {
            qz.set(m, v);
            qz.set(-m, v);
        }
    } else if (q.lattice() == Lattice::PerPlus || q.lattice() == Lattice::Integers) {
        for (const auto& [k, v] : q.entries())
            if (k != 0) qz.set(k, v);
    } else {
        throw LatticeMismatch("psi_and_bound expects q on 2Z, N or Z");
    }
    PsiBound out;
    if (qz.empty()) return out;
    const double x = static_cast<double>(N) * N + N;
    const cplx lam(x, y);
    const long S = qz.radius();
    const long W = std::max<long>(64L * N, static_cast<long>(4 * std::sqrt(x)) + 256) + S;
    auto inv = [&](long j) { return 1.0 / std::abs(lam - static_cast<double>(j) * j); };
    for (const auto& [s, v] : qz.entries()) {
        const double w = static_cast<double>(s) * s * std::norm(v);
        double inner = 0.0;
        for (long m = -W; m <= W; ++m) inner += inv(m + s) * inv(m);
        // both tails |m| > W: terms ~ 1/|lambda - (m+s)^2||lambda - m^2|
        auto f = [&](double m) {
            const double a = m * m - x, b = (m + s) * (m + s) - x;
            return 1.0 / std::sqrt((a * a + y * y) * (b * b + y * y));
        };
        auto fneg = [&](double m) {
            const double a = m * m - x, b = (m - s) * (m - s) - x;
            return 1.0 / std::sqrt((a * a + y * y) * (b * b + y * y));
        };
        const double tail =
            detail::tail_sum(static_cast<double>(W + 1), f) + detail::tail_sum(static_cast<double>(W + 1), fneg);
        out.tail += w * tail;
        out.exact += w * (inner + tail);
    }
    const AbSums ab = ab_sums(N, y, 4L * N);
    const double qn = weighted_norm(qz);
    const double e_sqrt = remainder(qz, std::sqrt(static_cast<double>(N)));
    const double e_4n = remainder(qz, 4.0 * N);
    const double Nd = static_cast<double>(N);
    out.bound = Nd * Nd * (qn * qn / Nd + 16 * e_sqrt * e_sqrt) * ab.b + 16 * e_4n * e_4n * ab.a;
    return out;
}

Eigen::MatrixXcd resolvent_apply(const TruncatedOperator& L, cplx lambda, const Eigen::MatrixXcd& F) {
    const Eigen::Index n = L.matrix.rows();
    Eigen::MatrixXcd A = -L.matrix;
    A.diagonal().array() += lambda;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    const double rc = lu.rcond();
    if (!(rc > 1e-12))
        throw ContourError("resolvent system near singular at lambda = (" + std::to_string(lambda.real()) + ", " +
                           std::to_string(lambda.imag()) + ")");
    Eigen::MatrixXcd X = lu.solve(F);
    const double res = (A * X - F).norm();
    if (res > 1e-10 * std::max(F.norm(), 1e-300) && n > 0)
        throw ContourError("resolvent residual " + std::to_string(res) + " exceeds tolerance");
    return X;
}

void write_matrix_csv(const Eigen::MatrixXcd& M, const IndexWindow& w, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << "row,col,re,im\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            if (M(i, j) != cplx{})
                os << w.indices[static_cast<std::size_t>(i)] << ',' << w.indices[static_cast<std::size_t>(j)] << ','
                   << M(i, j).real() << ',' << M(i, j).imag() << '\n';
}

}  // namespace hill
