#include "hill/norms.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "tail.hpp"

namespace hill {

namespace {
constexpr double pi = std::numbers::pi;

double dual_exponent(double p) {
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

// |f|^{p-1} phase(f), scaled so that its grid L^p norm is one.
Eigen::VectorXcd holder_align(const Eigen::VectorXcd& f, double p) {
    const Eigen::Index G = f.size();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(G);
    if (std::isinf(p)) {  // dual of L^1 attained by |f| = max: unit mass point
        Eigen::Index i = 0;
        f.cwiseAbs().maxCoeff(&i);
        const double m = std::abs(f(i));
        out(i) = (m > 0 ? f(i) / m : cplx(1.0)) * static_cast<double>(G);
        return out;
    }
    const double peak = f.cwiseAbs().maxCoeff();
    if (peak == 0.0) {
        out.setOnes();
        return out;
    }
    for (Eigen::Index i = 0; i < G; ++i) {
        const double m = std::abs(f(i)) / peak;
        if (m > 0) out(i) = std::pow(m, p - 1.0) * (f(i) / std::abs(f(i)));
    }
    return out / grid_lp(out, p);
}

// unit-L^a vector aligned with z in the Holder-dual sense (maximizes Re<f, z>)
Eigen::VectorXcd primal_from_dual(const Eigen::VectorXcd& z, double a) {
    const double ap = dual_exponent(a);
    if (a == 1.0) return holder_align(z, kInf);
    Eigen::VectorXcd f = holder_align(z, ap);  // |z|^{a'-1} phase, normalized in L^{a'}
    // |z|^{a'-1} already has L^a norm proportional; renormalize in L^a
    return f / grid_lp(f, a);
}

Eigen::VectorXcd dual_from_primal(const Eigen::VectorXcd& y, double b) {
    if (std::isinf(b)) {
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(y.size());
        Eigen::Index i = 0;
        y.cwiseAbs().maxCoeff(&i);
        const double m = std::abs(y(i));
        g(i) = (m > 0 ? y(i) / m : cplx(1.0)) * static_cast<double>(y.size());
        return g;
    }
    const double bp = dual_exponent(b);
    Eigen::VectorXcd g = holder_align(y, b);  // |y|^{b-1} phase
    return g / grid_lp(g, bp);
}

struct Known {
    double s, t, value;  // (1/a, 1/b) and norm
};

double interpolate_upper(const std::vector<Known>& pts, double s, double t) {
    double best = kInf;
    const double eps = 1e-12;
    for (const auto& p : pts)
        if (std::fabs(p.s - s) < eps && std::fabs(p.t - t) < eps) best = std::min(best, p.value);
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& P = pts[i];
            const auto& Q = pts[j];
            const double dx = Q.s - P.s, dy = Q.t - P.t;
            const double len2 = dx * dx + dy * dy;
            if (len2 < eps) continue;
            const double th = ((s - P.s) * dx + (t - P.t) * dy) / len2;
            if (th < -eps || th > 1 + eps) continue;
            const double ex = P.s + th * dx - s, ey = P.t + th * dy - t;
            if (ex * ex + ey * ey > eps * eps) continue;
            const double c = std::clamp(th, 0.0, 1.0);
            best = std::min(best, std::pow(P.value, 1 - c) * std::pow(Q.value, c));
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const auto& A = pts[i];
                const auto& B = pts[j];
                const auto& C = pts[k];
                const double det = (B.s - A.s) * (C.t - A.t) - (C.s - A.s) * (B.t - A.t);
                if (std::fabs(det) < 1e-14) continue;
                const double l1 = ((s - A.s) * (C.t - A.t) - (C.s - A.s) * (t - A.t)) / det;
                const double l2 = ((B.s - A.s) * (t - A.t) - (s - A.s) * (B.t - A.t)) / det;
                const double l0 = 1 - l1 - l2;
                if (l0 < -eps || l1 < -eps || l2 < -eps) continue;
                best = std::min(best, std::pow(A.value, std::max(l0, 0.0)) * std::pow(B.value, std::max(l1, 0.0)) *
                                          std::pow(C.value, std::max(l2, 0.0)));
            }
    return best;
}

double lp_value(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& f, double a, double b) {
    const double na = grid_lp(f, a);
    if (na == 0.0) return 0.0;
    return grid_lp(A * f, b) / na;
}

}  // namespace

double a_sum(cplx z, double r, long window) {
    if (r < 1.0) throw InvalidArgument("A(z, r) needs r >= 1");
    const double x = z.real(), y = z.imag();
    const long K1 = std::max<long>(window, static_cast<long>(4 * std::sqrt(std::max(x, 0.0))) + 256);
    double s = 0.0;
    for (long k = K1; k >= 0; --k) {
        const double d = std::abs(z - static_cast<double>(k) * k);
        if (d == 0.0) throw SingularityError("A(z, r) evaluated on the free spectrum");
        s += std::pow(d, -r);
    }
    s += detail::tail_sum(static_cast<double>(K1 + 1), [&](double k) {
        const double u = k * k - x;
        return std::pow(u * u + y * y, -r / 2);
    });
    return std::pow(s, 1.0 / r);
}

double cross_pair_sum(int N) {
    if (N < 0) throw InvalidArgument("N must be nonnegative");
    const long M = N + 1000;
    double total = 0.0;
    for (long k = N; k >= 0; --k) {
        const double kd = static_cast<double>(k);
        double inner = 0.0;
        // exact m-tail beyond M: trigamma for k = 0, telescoped harmonic block otherwise
        if (k == 0) {
            inner = boost::math::trigamma(static_cast<double>(M + 1));
        } else {
            double h = 0.0;
            for (long j = M + k; j >= M + 1 - k; --j) h += 1.0 / static_cast<double>(j);
            inner = h / (2 * kd);
        }
        for (long m = M; m >= N + 1; --m) inner += 1.0 / (static_cast<double>(m) * m - kd * kd);
        total += inner;
    }
    return total;
}

double cross_pair_closed_form(int N) {
    double s = 0.0;
    for (int n = N; n >= 1; --n) s += 1.0 / (static_cast<double>(n) * n);
    return pi * pi / 6 - s / 4;
}

double band_pair_sum(int N, int H) {
    if (H <= 0 || H >= N) throw InvalidArgument("band_pair_sum needs 0 < H < N");
    double s = 0.0;
    for (long k = N + 1 - H; k <= N; ++k)
        for (long m = N + 1; m <= k + H; ++m) s += 1.0 / (static_cast<double>(m) * m - static_cast<double>(k) * k);
    return s;
}

Eigen::MatrixXcd basis_on_grid(const IndexWindow& w, int G) {
    Eigen::MatrixXcd U(G, w.size());
    const double sqrt2 = std::sqrt(2.0);
    for (int i = 0; i < G; ++i) {
        const double x = i * pi / G;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            const double k = static_cast<double>(w.indices[static_cast<std::size_t>(j)]);
            U(i, j) = w.lattice == Lattice::Dir ? cplx(sqrt2 * std::sin(k * x)) : std::polar(1.0, k * x);
        }
    }
    return U;
}

KernelGrid kernel_from_matrix(const Eigen::MatrixXcd& M, const IndexWindow& w, int G) {
    if (M.rows() != w.size() || M.cols() != w.size()) throw InvalidArgument("matrix does not match window");
    if (static_cast<long>(G) < 4 * w.max_abs())
        throw UndersampledGrid("grid size " + std::to_string(G) + " below 4 x max index " + std::to_string(w.max_abs()));
    KernelGrid K;
    K.G = G;
    K.bc = w.lattice;
    K.basis = basis_on_grid(w, G);
    K.coeffs = M;
    K.samples = K.basis * M * K.basis.adjoint();
    return K;
}

Eigen::VectorXcd kernel_apply(const KernelGrid& K, const Eigen::VectorXcd& f) {
    if (!K.factored) return K.samples * f / static_cast<double>(K.G);
    return K.basis * (K.coeffs * (K.basis.adjoint() * f)) / static_cast<double>(K.G);
}

Eigen::VectorXcd kernel_apply_adjoint(const KernelGrid& K, const Eigen::VectorXcd& g) {
    if (!K.factored) return K.samples.adjoint() * g / static_cast<double>(K.G);
    return K.basis * (K.coeffs.adjoint() * (K.basis.adjoint() * g)) / static_cast<double>(K.G);
}

double grid_lp(const Eigen::VectorXcd& f, double p) {
    if (f.size() == 0) return 0.0;
    const double peak = f.cwiseAbs().maxCoeff();
    if (std::isinf(p) || peak == 0.0) return peak;
    double s = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) s += std::pow(std::abs(f(i)) / peak, p);
    return peak * std::pow(s / static_cast<double>(f.size()), 1.0 / p);
}

double opnorm_two(const Eigen::MatrixXcd& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    return svd.singularValues()(0);
}

double opnorm_endpoint(const KernelGrid& K, Endpoint mode, double p) {
    const Eigen::MatrixXcd& S = K.samples;
    switch (mode) {
        case Endpoint::OneToInf: return S.cwiseAbs().maxCoeff();
        case Endpoint::OneToB: {
            double best = 0.0;
            for (Eigen::Index j = 0; j < S.cols(); ++j) best = std::max(best, grid_lp(S.col(j), p));
            return best;
        }
        case Endpoint::AToInf: {
            const double q = dual_exponent(p);
            double best = 0.0;
            for (Eigen::Index i = 0; i < S.rows(); ++i) best = std::max(best, grid_lp(S.row(i).transpose(), q));
            return best;
        }
        case Endpoint::TwoToTwo: return K.factored ? opnorm_two(K.coeffs) : opnorm_two(S) / K.G;
    }
    return 0.0;
}

NormBracket opnorm_general(const KernelGrid& K, double a, double b, int iters, std::uint64_t seed) {
    if (!(a >= 1.0 && a <= b)) throw InvalidArgument("need 1 <= a <= b <= inf");
    NormBracket nb;
    nb.a = a;
    nb.b = b;
    const Eigen::Index G = K.G;
    const Eigen::MatrixXcd A = K.samples / static_cast<double>(G);
    const Eigen::MatrixXcd Ah = A.adjoint();

    // Known exact values at (1/a, 1/b) corners used by the interpolation bound.
    const double n1inf = opnorm_endpoint(K, Endpoint::OneToInf);
    const double n11 = opnorm_endpoint(K, Endpoint::OneToB, 1.0);
    const double ninfinf = opnorm_endpoint(K, Endpoint::AToInf, kInf);
    const double n22 = opnorm_endpoint(K, Endpoint::TwoToTwo);
    const double n1b = opnorm_endpoint(K, Endpoint::OneToB, b);
    const double nainf = opnorm_endpoint(K, Endpoint::AToInf, a);
    const double s = 1.0 / a, t = std::isinf(b) ? 0.0 : 1.0 / b;
    std::vector<Known> pts{{1, 0, n1inf}, {1, 1, n11}, {0, 0, ninfinf}, {0.5, 0.5, n22}, {1, t, n1b}, {s, 0, nainf}};
    nb.upper = interpolate_upper(pts, s, t);

    // Feasible starting points.
    std::vector<Eigen::VectorXcd> starts;
    if (K.coeffs.size() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(K.coeffs, Eigen::ComputeThinV);
        starts.push_back(K.basis * svd.matrixV().col(0));
    }
    {
        Eigen::Index jbest = 0;
        double vbest = -1;
        for (Eigen::Index j = 0; j < G; ++j) {
            const double v = grid_lp(K.samples.col(j), b);
            if (v > vbest) vbest = v, jbest = j;
        }
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(G);
        d(jbest) = static_cast<double>(G);
        starts.push_back(d);
        Eigen::Index ibest = 0;
        const double q = dual_exponent(a);
        vbest = -1;
        for (Eigen::Index i = 0; i < G; ++i) {
            const double v = grid_lp(K.samples.row(i).transpose(), q);
            if (v > vbest) vbest = v, ibest = i;
        }
        starts.push_back(primal_from_dual(K.samples.row(ibest).adjoint(), a));
    }
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int r = 0; r < 3; ++r) {
        Eigen::VectorXcd f(G);
        for (Eigen::Index i = 0; i < G; ++i) f(i) = {nd(gen), nd(gen)};
        starts.push_back(f);
    }

    double best = 0.0;
    int total_iters = 0;
    for (auto f : starts) {
        double na = grid_lp(f, a);
        if (na == 0.0) continue;
        f /= na;
        double val = grid_lp(A * f, b);
        best = std::max(best, val);
        for (int it = 0; it < iters; ++it) {
            ++total_iters;
            const Eigen::VectorXcd y = A * f;
            if (y.cwiseAbs().maxCoeff() == 0.0) break;
            const Eigen::VectorXcd g = dual_from_primal(y, b);
            const Eigen::VectorXcd z = Ah * g;
            if (z.cwiseAbs().maxCoeff() == 0.0) break;
            Eigen::VectorXcd fn = primal_from_dual(z, a);
            const double nv = lp_value(A, fn, a, b);
            if (!(nv > val * (1 + 1e-6))) {
                val = std::max(val, nv);
                break;
            }
            val = nv;
            f = fn;
        }
        best = std::max(best, val);
    }
    nb.lower = best;
    nb.iterations = total_iters;
    return nb;
}

double wiener_norm(const Eigen::VectorXcd& c) { return c.cwiseAbs().sum(); }

double wiener_norm(const Eigen::MatrixXcd& M) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < M.cols(); ++j) best = std::max(best, M.col(j).cwiseAbs().sum());
    return best;
}

Regime regime_of(int N, double y) {
    const double ay = std::fabs(y);
    if (ay <= N) return Regime::Low;
    if (ay < static_cast<double>(N) * N) return Regime::Middle;
    return Regime::High;
}

double a_asymptote(int N, double y, double r) {
    const double Nd = N, ay = std::fabs(y);
    const bool one = r == 1.0;
    switch (regime_of(N, y)) {
        case Regime::Low: return one ? std::log(Nd) / Nd : 1.0 / Nd;
        case Regime::Middle:
            return one ? std::log(1 + Nd * Nd / ay) / Nd : std::pow(Nd, -1.0 / r) * std::pow(ay, -1.0 + 1.0 / r);
        case Regime::High: return one ? 1.0 / std::sqrt(ay) : std::pow(ay, -1.0 + 1.0 / (2 * r));
    }
    return 0.0;
}

std::vector<RegimeRow> asymptote_check(const std::vector<int>& Ns, const std::vector<double>& rs) {
    std::vector<RegimeRow> rows;
    for (int N : Ns) {
        const double Nd = N;
        const double x = Nd * Nd + Nd;
        const std::array<double, 5> ys{0.0, Nd / 2, std::pow(Nd, 1.5), 4 * Nd * Nd, Nd * Nd * Nd};
        for (double r : rs)
            for (double y : ys) {
                const double v = a_sum({x, y}, r);
                const double as = a_asymptote(N, y, r);
                rows.push_back({N, r, y, regime_of(N, y), v, as, v / as});
            }
    }
    return rows;
}

double a_high_constant(double r) { return std::pow(0.25 * std::beta(0.25, r / 2 - 0.25), 1.0 / r); }

double lambda_line_integral(int N, double r, double p, double Y) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double Nd = N;
    const double x = Nd * Nd + Nd;
    const double ymax = std::isinf(Y) ? 1e4 * x * x : Y;
    auto f = [&](double y) { return std::pow(a_sum({x, y}, r), p); };
    // log-variable pieces: y = e^u
    auto g = [&](double u) {
        const double y = std::exp(u);
        return f(y) * y;
    };
    const double tol = 1e-9;
    double total = 0.0;
    const std::array<double, 4> cuts{0.0, std::min(Nd, ymax), std::min(Nd * Nd, ymax), ymax};
    total += GK::integrate(f, cuts[0], cuts[1], 15, tol);
    for (int i = 1; i < 3; ++i)
        if (cuts[i + 1] > cuts[i]) {
            // split long logarithmic ranges into decades to keep the adaptive rule honest
            const double u0 = std::log(cuts[i]), u1 = std::log(cuts[i + 1]);
            const int pieces = std::max(1, static_cast<int>(std::ceil((u1 - u0) / std::log(10.0))));
            for (int k = 0; k < pieces; ++k) {
                const double ua = u0 + (u1 - u0) * k / pieces, ub = u0 + (u1 - u0) * (k + 1) / pieces;
                total += GK::integrate(g, ua, ub, 15, tol);
            }
        }
    if (std::isinf(Y)) {
        const double e = p * (-1.0 + 1.0 / (2 * r)) + 1.0;
        if (e >= 0.0) return kInf;
        total += std::pow(a_high_constant(r), p) * std::pow(ymax, e) / (-e);
    }
    return 2 * total;
}

}  // namespace hill
