// Acceptance runner: `acceptance` runs every criterion, `acceptance 07` runs one.
// Prints "criterion NN: PASS|FAIL: detail" per criterion; exit code = number of failures.
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/trigamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hill/harness.hpp"

using namespace hill;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Residue sum of 1/((z - m^2)(z - k^2)) over poles with |index| <= N.
double residue_reference(long m, long k, int N) {
    const bool mi = std::labs(m) <= N, ki = std::labs(k) <= N;
    const double m2 = double(m) * m, k2 = double(k) * k;
    if (m2 == k2 || mi == ki) return 0.0;
    return mi ? 1.0 / (m2 - k2) : 1.0 / (k2 - m2);
}

Outcome c01() {
    const auto t0 = Clock::now();
    double worst_ref = 0, worst_lib = 0;
    int cases = 0;
    for (int N = 1; N <= 8; ++N)
        for (long m = -20; m <= 20; ++m)
            for (long k = -20; k <= 20; ++k) {
                const cplx q = scalar_contour_oracle(m, k, N).value;
                worst_ref = std::max(worst_ref, std::abs(q - residue_reference(m, k, N)));
                worst_lib = std::max(worst_lib, std::abs(q - scalar_residue(m, k, N)));
                ++cases;
            }
    const double t = seconds_since(t0);
    return {worst_ref <= 1e-8 && worst_lib <= 1e-8 && t < 10,
            std::to_string(cases) + " cases, max defect " + num(std::max(worst_ref, worst_lib)) + ", " + num(t) + " s"};
}

// Sum over k <= N < m of 1/(m^2 - k^2), using partial fractions for k >= 1 and trigamma for k = 0.
double cross_pair_reference(int N) {
    double s = boost::math::trigamma(static_cast<double>(N) + 1);
    for (int k = 1; k <= N; ++k) {
        double h = 0;
        for (int j = N + 1 - k; j <= N + k; ++j) h += 1.0 / j;
        s += h / (2.0 * k);
    }
    return s;
}

Outcome c02() {
    const auto t0 = Clock::now();
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double worst = 0, rec = 0, partial = 0;
    bool toward = true;
    for (int N = 0; N <= 50; ++N) {
        if (N) partial += 1.0 / (double(N) * N);
        const double closed = pi2 / 6 - partial / 4;
        worst = std::max({worst, std::abs(cross_pair_sum(N) - closed), std::abs(cross_pair_reference(N) - closed),
                          std::abs(cross_pair_closed_form(N) - closed)});
        const double d = cross_pair_sum(N + 1) - cross_pair_sum(N);
        rec = std::max(rec, std::abs(d + 1.0 / (4.0 * (N + 1) * (N + 1))));
        toward = toward && d < 0 && cross_pair_sum(N + 1) > pi2 / 8;
    }
    const double gap = cross_pair_sum(50) - pi2 / 8;
    const double t = seconds_since(t0);
    return {worst <= 1e-8 && rec <= 1e-10 && toward && gap < 0.01 && t < 5,
            "closed-form defect " + num(worst) + ", recurrence defect " + num(rec) + ", A_50 - pi^2/8 = " + num(gap) +
                ", " + num(t) + " s"};
}

Outcome c03() {
    const auto t0 = Clock::now();
    double worst = -1, lib_defect = 0;
    for (int N = 2; N <= 200; ++N) {
        double sigma = 0;
        for (int H = 1; H < N; ++H) {
            // pairs with m - k = H, 0 <= k <= N < m
            for (long k = std::max(0, N - H + 1); k <= N; ++k) {
                const long m = k + H;
                sigma += 1.0 / (double(m) * m - double(k) * k);
            }
            worst = std::max(worst, sigma - double(H) / N);
            lib_defect = std::max(lib_defect, std::abs(band_pair_sum(N, H) - sigma) / sigma);
        }
    }
    const double t = seconds_since(t0);
    return {worst <= 0 && lib_defect <= 1e-12 && t < 30,
            "max sigma(N,H) - H/N = " + num(worst) + ", library vs direct " + num(lib_defect) + ", " + num(t) + " s"};
}

Outcome c04() {
    const auto t0 = Clock::now();
    struct Case {
        const char* spec;
        Lattice bc;
    };
    const std::vector<Case> cases{{"mathieu:amp=1", Lattice::PerPlus},  {"mathieu:amp=1", Lattice::Dir},
                                  {"sawtooth:amp=1", Lattice::PerPlus}, {"sawtooth:amp=1", Lattice::Dir},
                                  {"sobolev:alpha=0.3", Lattice::PerPlus}, {"lp:beta=0.3", Lattice::PerMinus}};
    double worst = 0;
    int n = 0;
    for (const auto& cs : cases) {
        const auto pot = make_potential(PotentialSpec::parse(cs.spec), cs.bc, 512, 5);
        for (int N : {16, 32, 64}) {
            const double Nd = N;
            for (double y : {0.0, Nd, Nd * Nd, 2 * Nd * Nd}) {
                const auto pb = psi_and_bound(*pot.Q, N, y);
                worst = std::max(worst, pb.exact / pb.bound);
                ++n;
            }
        }
    }
    // independent evaluation for a single harmonic q = {2: 1} on 2Z: psi = 4 sum_m 1/(|l-(m+2)^2||l-m^2|)
    double brute_defect = 0;
    const CoeffSeq q(Lattice::PerPlus, CoeffRole::Q, {{2, 1.0}});
    for (int N : {16, 32}) {
        const cplx lam(double(N) * N + N, double(N));
        double brute = 0;
        for (long m = -200000; m <= 200000; ++m)
            brute += 4.0 / (std::abs(lam - double(m + 2) * (m + 2)) * std::abs(lam - double(m) * m));
        brute_defect = std::max(brute_defect, std::abs(psi_and_bound(q, N, N).exact - brute) / brute);
    }
    const double t = seconds_since(t0);
    return {worst <= 1 && brute_defect <= 1e-6 && t < 60,
            "max exact/bound " + num(worst) + " over " + std::to_string(n) + " cases, explicit-sum defect " +
                num(brute_defect) + ", " + num(t) + " s"};
}

Outcome c05() {
    double worst = 0;
    for (Lattice bc : {Lattice::PerPlus, Lattice::PerMinus, Lattice::Dir})
        for (int N = 1; N <= 16; ++N) {
            const CoeffSeq V(is_periodic(bc) ? Lattice::PerPlus : Lattice::Dir, CoeffRole::V);
            const auto P = deviation_set(assemble_operator(V, index_window(bc, 2 * N + 8)), V, N);
            worst = std::max(worst, (P.S - P.S0).norm());
        }
    return {worst <= 1e-10, "max ||S_N - S_N^0||_F = " + num(worst) + " over 3 boundary conditions, N <= 16"};
}

Outcome c06() {
    double worst = 0;
    for (const char* s : {"mathieu:amp=1", "dirac:amp=1"})
        for (Lattice bc : {Lattice::PerPlus, Lattice::PerMinus, Lattice::Dir})
            for (int N = 1; N <= 8; ++N) {
                const auto w = index_window(bc, 2 * N + 8);
                const auto pot = make_potential(PotentialSpec::parse(s), bc, 4 * w.max_abs(), 1);
                const auto L = assemble_operator(pot.V, w);
                worst = std::max(worst, (tn_matrix(pot.V, N, w) - tn_quadrature(pot.V, N, w, default_rect(N, L))).norm());
            }
    return {worst <= 1e-8, "max Frobenius defect " + num(worst) + ", Mathieu and Dirac comb, N <= 8"};
}

// Lowest eigenvalue of k^2 + (shift by +-2 with weight 1) on |k| <= K, k even.
double mathieu_lowest(long K) {
    const long n = K + 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (long i = 0; i < n; ++i) {
        const double k = -K + 2.0 * i;
        M(i, i) = k * k;
        if (i + 1 < n) M(i, i + 1) = M(i + 1, i) = 1.0;
    }
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

Outcome c07() {
    const auto lib = [](long K) {
        const auto pot = make_potential(PotentialSpec::parse("mathieu:amp=1"), Lattice::PerPlus, 2 * K, 1);
        const auto L = assemble_operator(pot.V, index_window(Lattice::PerPlus, K));
        return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(L.matrix, Eigen::EigenvaluesOnly).eigenvalues()(0);
    };
    const double l32 = lib(32), l64 = lib(64), l128 = lib(128);
    const double r256 = mathieu_lowest(256), r512 = mathieu_lowest(512);
    const double oracle = r512 + (r512 - r256) / 3;
    const double d1 = std::abs(l64 - l32), d2 = std::abs(l128 - l64);
    // Entries decay super-exponentially; by K = 32 both differences sit at the rounding floor.
    const double floor = 1e-12;
    const bool shrink = d2 <= floor || d1 >= 4 * d2;
    const double err = std::abs(l128 - oracle);
    // tabulated Mathieu characteristic value a_0(q = 1)
    const double table = -0.45513860410741364;
    const double terr = std::abs(l128 - table);
    return {err <= 1e-6 && terr <= 1e-6 && shrink,
            "lambda_0 = " + num(l128) + " (oracle " + num(oracle) + ", defect " + num(err) + ", vs table " + num(terr) +
                                       "), differences " + num(d1) + " -> " + num(d2) +
                                       (d2 <= floor ? " (both below the 1e-12 rounding floor)" : "")};
}

std::string sweep_detail(const RateTable& t) {
    std::string s = t.potential + " " + t.bc + " lower:";
    for (const auto& r : t.rows) s += " " + num(r.lower);
    if (t.fit) s += ", slope " + num(t.fit->slope);
    s += ", gate change " + num(t.gate_change);
    return s;
}

RateTable one_sweep(Lattice bc, const std::string& potential, double a, double b) {
    ExperimentConfig cfg;
    cfg.bc = bc;
    cfg.potential = potential;
    cfg.n_list = {8, 16, 32, 64};
    cfg.pairs = {{a, b}};
    return run_rate_sweep(cfg).at(0);
}

Outcome c08() {
    const auto t0 = Clock::now();
    const auto t = one_sweep(Lattice::PerPlus, "mathieu:amp=1", 1, kInf);
    const double s = seconds_since(t0);
    return {t.fit && t.fit->slope <= -0.45 && t.gate_passed && s < 300, sweep_detail(t) + ", " + num(s) + " s"};
}

Outcome c09() {
    const auto t = one_sweep(Lattice::PerPlus, "sawtooth:amp=1", 2, kInf);
    return {t.fit && t.fit->slope <= -0.4 && t.gate_passed, sweep_detail(t)};
}

bool strictly_decreasing(const RateTable& t) {
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        if (!(t.rows[i].lower < t.rows[i - 1].lower)) return false;
    return !t.rows.empty();
}

Outcome c10() {
    const auto s = one_sweep(Lattice::PerPlus, "sobolev:alpha=0.5,real=1", 1, kInf);
    const double alpha = 0.6;
    const auto d = one_sweep(Lattice::PerPlus, "dirac:amp=1", 2 / (3 - 2 * alpha), kInf);
    return {strictly_decreasing(s) && strictly_decreasing(d) && s.gate_passed && d.gate_passed,
            sweep_detail(s) + "; " + sweep_detail(d)};
}

Outcome c11() {
    const auto t0 = Clock::now();
    const std::vector<int> Ns{16, 32, 64, 128};
    auto spread = [&](auto&& f) {
        double lo = kInf, hi = 0;
        for (int N : Ns) {
            const double v = f(double(N)) ;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return std::isfinite(hi) && lo > 0 ? hi / lo : kInf;
    };
    const double cubic = spread([](double N) { return N * lambda_line_integral(int(N), 1, 3); });
    const double r3 = spread([](double N) { return N * lambda_line_integral(int(N), 3, 2); });
    const double r2 = spread([](double N) { return N / std::log(N) * lambda_line_integral(int(N), 2, 2); });
    const double r15 = spread([](double N) { return std::pow(N, 2 * (1 - 1 / 1.5)) * lambda_line_integral(int(N), 1.5, 2); });
    const bool bounded = cubic <= 1.5 && r3 <= 1.5 && r2 <= 1.5 && r15 <= 1.5;

    // Divergent square integral: test the stated sqrt(Y) growth by the log-log slope of the partial integral.
    const int N = 16;
    std::vector<double> Y, I;
    for (double y = 1e4; y <= 1e8; y *= 10) {
        Y.push_back(y);
        I.push_back(lambda_line_integral(N, 1, 2, y));
    }
    const double slope = std::log(I.back() / I.front()) / std::log(Y.back() / Y.front());
    const double per_decade = (I.back() - I.front()) / (double(Y.size()) - 1);
    const double c1 = a_high_constant(1);
    const double log_law = 2 * c1 * c1 * std::log(10.0);
    const bool infinite = std::isinf(lambda_line_integral(N, 1, 2));
    const bool sqrt_growth = infinite && std::abs(slope - 0.5) <= 0.1;
    const double t = seconds_since(t0);
    return {bounded && sqrt_growth && t < 120,
            "spreads N*intA^3 " + num(cubic) + ", r=3 " + num(r3) + ", r=2 " + num(r2) + ", r=1.5 " + num(r15) +
                "; partial int A^2 log-log slope " + num(slope) + " (sqrt(Y) needs 0.5); growth per decade " +
                num(per_decade) + " vs 2 c_1^2 log 10 = " + num(log_law) + ", i.e. logarithmic; " + num(t) + " s"};
}

Outcome c12() {
    std::vector<HilbertStat> st;
    for (long w : {64L, 128L, 256L, 512L}) st.push_back(hilbert_weighted_statistic(0.4, w, 8, 11));
    double growth = 0;
    for (const auto& s : st)
        growth = std::max({growth, s.max_ratio / st[0].max_ratio, s.matrix_norm / st[0].matrix_norm});

    std::vector<CoeffSeq> qs;
    qs.push_back(CoeffSeq(Lattice::PerPlus, CoeffRole::Q, {{2, 1.0}, {-2, -1.0}}));
    qs.push_back(CoeffSeq(Lattice::PerPlus, CoeffRole::Q, {{2, cplx(0.5, 1)}, {-4, cplx(-0.5, 0.25)}, {6, cplx(0, -1.25)}}));
    qs.push_back(CoeffSeq(Lattice::PerPlus, CoeffRole::Q, {{0, -3.0}, {2, 1.0}, {4, 1.0}, {-8, 1.0}}));
    double rt = 0;
    const int G = 8192;
    for (const auto& q : qs) {
        const auto s = exp_to_sine(q, 2048);
        // direct synthesis of both expansions on the grid
        double acc = 0;
        for (int j = 0; j < G; ++j) {
            const double x = std::numbers::pi * j / G;
            cplx f = 0, g = 0;
            for (const auto& [k, c] : q.entries()) f += c * std::exp(cplx(0, double(k) * x));
            for (const auto& [k, c] : s.coeffs.entries()) g += c * std::sqrt(2.0) * std::sin(double(k) * x);
            acc += std::norm(f - g);
        }
        rt = std::max(rt, std::sqrt(acc / G));
        const auto back = sine_to_exp(s.coeffs, 2 * q.radius());
        for (long k = -2 * q.radius(); k <= 2 * q.radius(); k += 2) rt = std::max(rt, std::abs(back.coeffs[k] - q[k]));
    }
    return {growth < 2 && rt <= 1e-6, "Hilbert ratio growth " + num(growth) + " over windows 64 -> 512, norm " +
                                          num(st.back().matrix_norm) + "; round-trip defect " + num(rt)};
}

Outcome c13() {
    const auto w = index_window(Lattice::PerPlus, 10);
    const Eigen::Index n = w.size();
    std::mt19937_64 gen(99);
    std::normal_distribution<double> nd;
    double d22 = 0, d1i = 0;
    int ordered = 0;
    for (int s = 0; s < 100; ++s) {
        Eigen::MatrixXcd M(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) M(i, j) = cplx(nd(gen), nd(gen));
        const auto K = kernel_from_matrix(M, w, 48);
        const double sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(M).singularValues()(0);
        d22 = std::max(d22, std::abs(opnorm_general(K, 2, 2, 200, s).lower - sv) / sv);
        const double sup = K.samples.cwiseAbs().maxCoeff();
        d1i = std::max(d1i, std::abs(opnorm_general(K, 1, kInf, 200, s).lower - sup) / sup);
        const auto b = opnorm_general(K, 1.5, 3.0, 200, s);
        if (b.lower <= b.upper * (1 + 1e-12)) ++ordered;
    }
    return {d22 <= 1e-4 && d1i <= 1e-4 && ordered == 100, "(2,2) defect " + num(d22) + ", (1,inf) defect " + num(d1i) +
                                                             ", " + std::to_string(ordered) + "/100 brackets ordered"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria{c01, c02, c03, c04, c05, c06, c07,
                                                         c08, c09, c10, c11, c12, c13};
    std::vector<int> which;
    if (argc > 1) {
        for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    } else {
        for (int i = 1; i <= 13; ++i) which.push_back(i);
    }
    int failures = 0;
    for (int id : which) {
        if (id < 1 || id > 13) {
            std::cerr << "unknown criterion " << id << '\n';
            ++failures;
            continue;
        }
        Outcome o;
        try {
            o = criteria[static_cast<std::size_t>(id - 1)]();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("criterion %02d: %s: %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures;
}
