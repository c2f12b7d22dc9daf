#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "hill/coeffs.hpp"
#include "hill/errors.hpp"

using namespace hill;
using std::numbers::pi;

namespace {

// (1/pi) int_0^pi f(x) dx, split into pieces so smooth oscillatory integrands stay accurate.
template <class F>
double mean_on_interval(F f, int pieces = 16) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    double s = 0;
    for (int i = 0; i < pieces; ++i) s += GK::integrate(f, i * pi / pieces, (i + 1) * pi / pieces, 0, 1e-14);
    return s / pi;
}

cplx eval_exp(const CoeffSeq& q, double x) {
    cplx s{};
    for (const auto& [k, v] : q.entries()) s += v * std::polar(1.0, k * x);
    return s;
}

}  // namespace

TEST_CASE("lattice membership and names") {
    CHECK(on_lattice(Lattice::PerPlus, -4));
    CHECK_FALSE(on_lattice(Lattice::PerPlus, 3));
    CHECK(on_lattice(Lattice::PerMinus, -3));
    CHECK_FALSE(on_lattice(Lattice::PerMinus, 0));
    CHECK(on_lattice(Lattice::Dir, 1));
    CHECK_FALSE(on_lattice(Lattice::Dir, 0));
    CHECK_FALSE(on_lattice(Lattice::Dir, -2));
    for (Lattice L : {Lattice::PerPlus, Lattice::PerMinus, Lattice::Dir, Lattice::Integers})
        CHECK(lattice_from_string(to_string(L)) == L);
    CHECK_THROWS_AS(lattice_from_string("neumann"), InvalidArgument);
}

TEST_CASE("coefficient storage rejects off-lattice indices") {
    CoeffSeq c(Lattice::PerPlus, CoeffRole::Q);
    c.set(2, 1.0);
    CHECK_THROWS_AS(c.set(3, 1.0), LatticeMismatch);
    CHECK(c[5] == cplx{});
    CHECK(c.radius() == 2);
    c.add(-6, cplx(0, 1));
    CHECK(c.radius() == 6);
    CHECK(c.scaled(2.0)[-6] == cplx(0, 2));
}

TEST_CASE("weighted norms and remainders against direct sums") {
    CoeffSeq q(Lattice::Integers, CoeffRole::Q);
    for (long k = -30; k <= 30; ++k)
        if (k) q.set(k, cplx(1.0 / k, 0.5 / (k * k)));
    double brute = 0, brute_tail = 0;
    for (long k = -30; k <= 30; ++k) {
        if (!k) continue;
        const double w = std::pow(1.0 + static_cast<double>(k) * k, 0.15);
        brute += std::norm(q[k]) * w * w;
        if (std::abs(k) >= 7) brute_tail += std::norm(q[k]);
    }
    CHECK(weighted_norm(q, Weight::sobolev(0.3)) == doctest::Approx(std::sqrt(brute)).epsilon(1e-12));
    CHECK(remainder(q, 7) == doctest::Approx(std::sqrt(brute_tail)).epsilon(1e-12));
    CHECK(remainder(q, 6.5) == doctest::Approx(std::sqrt(brute_tail)).epsilon(1e-12));
}

TEST_CASE("discrete Hilbert transform of unit vectors") {
    CoeffSeq d0(Lattice::Integers, CoeffRole::Function, {{0, 1.0}});
    const auto h0 = hilbert_transform(d0, 20);
    CHECK(h0.coeffs[0] == cplx{});
    for (long n = 1; n <= 20; ++n) {
        CHECK(h0.coeffs[n].real() == doctest::Approx(1.0 / n));
        CHECK(h0.coeffs[-n].real() == doctest::Approx(-1.0 / n));
    }
    CoeffSeq d1(Lattice::Integers, CoeffRole::Function, {{1, 1.0}});
    const auto h1 = hilbert_transform(d1, 20);
    CHECK(h1.coeffs[1] == cplx{});
    for (long n : {-5L, 0L, 2L, 9L}) CHECK(h1.coeffs[n].real() == doctest::Approx(1.0 / (n - 1)));
    CHECK(h1.tail_bound > 0);
}

TEST_CASE("weighted Hilbert statistic stays below the operator norm") {
    const auto st = hilbert_weighted_statistic(0.4, 64, 4, 5);
    CHECK(st.max_ratio > 0);
    CHECK(st.max_ratio <= st.matrix_norm * (1 + 1e-6));
}

TEST_CASE("exponential to sine coefficients match quadrature") {
    CoeffSeq q(Lattice::PerPlus, CoeffRole::Q, {{2, cplx(0.5, 1)}, {-4, cplx(-0.5, 0.25)}, {6, cplx(0, -1.25)}});
    const auto s = exp_to_sine(q, 64);
    CHECK(s.coeffs.lattice() == Lattice::Dir);
    for (long m = 1; m <= 12; ++m) {
        const double re = mean_on_interval([&](double x) { return eval_exp(q, x).real() * std::sqrt(2.0) * std::sin(m * x); });
        const double im = mean_on_interval([&](double x) { return eval_exp(q, x).imag() * std::sqrt(2.0) * std::sin(m * x); });
        CHECK(std::abs(s.coeffs[m] - cplx(re, im)) < 1e-10);
    }
    CHECK(std::isfinite(s.tail_bound));
}

TEST_CASE("sine to exponential coefficients match quadrature") {
    CoeffSeq qt(Lattice::Dir, CoeffRole::Q, {{1, 1.0}, {2, cplx(0, -0.5)}, {5, 0.25}});
    const auto e = sine_to_exp(qt, 24);
    auto g = [&](double x) {
        cplx s{};
        for (const auto& [m, v] : qt.entries()) s += v * std::sqrt(2.0) * std::sin(m * x);
        return s;
    };
    for (long k = -10; k <= 10; k += 2) {
        const double re = mean_on_interval([&](double x) { return (g(x) * std::polar(1.0, -k * x)).real(); });
        const double im = mean_on_interval([&](double x) { return (g(x) * std::polar(1.0, -k * x)).imag(); });
        CHECK(std::abs(e.coeffs[k] - cplx(re, im)) < 1e-10);
    }
}

TEST_CASE("exponential to sine needs a vanishing coefficient sum") {
    CoeffSeq q(Lattice::PerPlus, CoeffRole::Q, {{2, 1.0}});
    CHECK_THROWS_AS(exp_to_sine(q), NormalizationError);
    CoeffSeq wrong(Lattice::Dir, CoeffRole::Q, {{1, 1.0}});
    CHECK_THROWS_AS(exp_to_sine(wrong), LatticeMismatch);
}

TEST_CASE("grid synthesis") {
    CoeffSeq c(Lattice::PerPlus, CoeffRole::Function, {{2, 1.0}, {-2, 1.0}});
    const auto f = synthesize_on_grid(c, Lattice::PerPlus, 16);
    for (int j = 0; j < 16; ++j) CHECK(f[j].real() == doctest::Approx(2 * std::cos(2 * j * pi / 16)));
    CHECK(grid_l2(f) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(synthesize_on_grid(c, Lattice::PerPlus, 3), UndersampledGrid);
}

TEST_CASE("potential label parsing") {
    auto s = PotentialSpec::parse("Mathieu: amp = 2");
    CHECK(s.family == Family::Mathieu);
    CHECK(s.param("amp", 0) == 2);
    CHECK(PotentialSpec::parse("sawtoothbv").family == Family::Sawtooth);
    CHECK(PotentialSpec::parse("randomsobolevtail:alpha=0.3").family == Family::SobolevTail);
    auto t = PotentialSpec::parse("trig:2=1+2i,-2=i");
    REQUIRE(t.trig.size() == 2);
    CHECK(t.trig[0].second == cplx(1, 2));
    CHECK(t.trig[1].second == cplx(0, 1));
    CHECK_THROWS_AS(PotentialSpec::parse("gaussian:amp=1"), UnknownFamily);
    CHECK_THROWS_AS(PotentialSpec::parse("lp:beta=1"), InvalidArgument);
    CHECK_THROWS_AS(PotentialSpec::parse("sobolev:alpha=2"), InvalidArgument);
    CHECK_THROWS_AS(PotentialSpec::parse("mathieu:amp"), InvalidArgument);
}

TEST_CASE("sawtooth coefficients match quadrature") {
    const auto P = make_potential(PotentialSpec::parse("sawtooth:amp=1.5"), Lattice::PerPlus, 20, 1);
    auto v = [](double x) { return 1.5 * (pi / 2 - x); };
    for (long k = -8; k <= 8; k += 2) {
        const double re = mean_on_interval([&](double x) { return v(x) * std::cos(k * x); });
        const double im = mean_on_interval([&](double x) { return -v(x) * std::sin(k * x); });
        CHECK(std::abs(P.V[k] - cplx(re, im)) < 1e-12);
    }
    const auto D = make_potential(PotentialSpec::parse("sawtooth:amp=1.5"), Lattice::Dir, 20, 1);
    for (long m = 1; m <= 9; ++m) {
        const double c = std::sqrt(2.0) * mean_on_interval([&](double x) { return v(x) * std::cos(m * x); });
        CHECK(D.V[m].real() == doctest::Approx(c).epsilon(1e-10));
    }
}

TEST_CASE("singular L^p coefficients match tanh-sinh quadrature") {
    const double beta = 0.4;
    const auto P = make_potential(PotentialSpec::parse("lp:beta=0.4"), Lattice::PerPlus, 20, 1);
    boost::math::quadrature::tanh_sinh<double> ts;
    for (long k = 2; k <= 10; k += 2) {
        auto fc = [&](double x) { return std::pow(std::abs(x - pi / 2), -beta) * std::cos(k * x); };
        auto fs = [&](double x) { return -std::pow(std::abs(x - pi / 2), -beta) * std::sin(k * x); };
        const double re = (ts.integrate(fc, 0.0, pi / 2) + ts.integrate(fc, pi / 2, pi)) / pi;
        const double im = (ts.integrate(fs, 0.0, pi / 2) + ts.integrate(fs, pi / 2, pi)) / pi;
        CHECK(std::abs(P.V[k] - cplx(re, im)) < 1e-8);
    }
}

TEST_CASE("Mathieu coefficients and derived q") {
    const auto P = make_potential(PotentialSpec::parse("mathieu:amp=1"), Lattice::PerPlus, 8, 1);
    CHECK(P.V[2] == cplx(1));
    CHECK(P.V[-2] == cplx(1));
    REQUIRE(P.Q);
    // v = Q' with Q = sum q(k) e^{ikx}: V(k) = i k q(k)
    CHECK(std::abs(cplx(0, 2) * (*P.Q)[2] - P.V[2]) < 1e-15);
    CHECK(std::abs((*P.Q)[0] + (*P.Q)[2] + (*P.Q)[-2]) < 1e-15);
    const auto D = make_potential(PotentialSpec::parse("mathieu:amp=1"), Lattice::Dir, 8, 1);
    CHECK(D.V[2].real() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("random tails are keyed by index, not by window") {
    const auto a = make_potential(PotentialSpec::parse("sobolev:alpha=0.3"), Lattice::PerPlus, 50, 9);
    const auto b = make_potential(PotentialSpec::parse("sobolev:alpha=0.3"), Lattice::PerPlus, 200, 9);
    for (long k = -50; k <= 50; k += 2) CHECK(a.V[k] == b.V[k]);
    CHECK(std::abs(keyed_phase(9, 4)) == doctest::Approx(1.0));
    CHECK(keyed_phase(9, 4) != keyed_phase(10, 4));
    const auto r = make_potential(PotentialSpec::parse("sobolev:alpha=0.3,real=1"), Lattice::PerPlus, 50, 9);
    for (long k = 2; k <= 50; k += 2) CHECK(std::abs(r.V[-k] - std::conj(r.V[k])) < 1e-15);
}

TEST_CASE("coefficient CSV round trip") {
    const auto path = (std::filesystem::temp_directory_path() / "hill_coeffs_rt.csv").string();
    CoeffSeq c(Lattice::Dir, CoeffRole::Q, {{1, cplx(0.1, -0.2)}, {7, cplx(1.0 / 3.0, 0)}});
    write_coeffs_csv(c, path);
    const auto back = read_coeffs_csv(path, Lattice::Dir, CoeffRole::Q);
    CHECK(back[1] == c[1]);
    CHECK(back[7] == c[7]);
    std::filesystem::remove(path);
}
