#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hill/errors.hpp"

namespace hill {

using cplx = std::complex<double>;

// PerPlus = 2Z, PerMinus = 1+2Z, Dir = {1,2,...}; Integers = Z (Hilbert-transform workspace).
enum class Lattice { PerPlus, PerMinus, Dir, Integers };

bool on_lattice(Lattice L, long k);
std::string to_string(Lattice L);
Lattice lattice_from_string(const std::string& s);  // "per+", "per-", "dir", "z"
bool is_periodic(Lattice L);

enum class CoeffRole { Q, V, Function };

class CoeffSeq {
public:
    explicit CoeffSeq(Lattice L = Lattice::PerPlus, CoeffRole role = CoeffRole::Function);
    CoeffSeq(Lattice L, CoeffRole role, std::initializer_list<std::pair<const long, cplx>> init);

    Lattice lattice() const { return lattice_; }
    CoeffRole role() const { return role_; }

    cplx operator[](long k) const;
    void set(long k, cplx value);  // throws LatticeMismatch off-lattice
    void add(long k, cplx value);

    const std::map<long, cplx>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    long radius() const;  // max |k| over the stored support, 0 if empty

    CoeffSeq scaled(cplx c) const;

private:
    Lattice lattice_;
    CoeffRole role_;
    std::map<long, cplx> entries_;
};

struct Weight {
    enum class Kind { Unit, Sobolev, Log };
    Kind kind = Kind::Unit;
    double param = 0.0;

    static Weight unit() { return {}; }
    static Weight sobolev(double alpha) { return {Kind::Sobolev, alpha}; }
    static Weight log(double beta) { return {Kind::Log, beta}; }

    double operator()(long k) const;
};

double weighted_norm(const CoeffSeq& q, const Weight& w = Weight::unit());

// (sum_{|k| >= M} |q(k)|^2 w(k)^2)^{1/2}; threshold may be fractional (e.g. sqrt N).
double remainder(const CoeffSeq& q, double M, const Weight& w = Weight::unit());

double l1_norm(const CoeffSeq& c);

struct Transformed {
    CoeffSeq coeffs;
    double tail_bound = 0.0;  // rigorous l2 bound on entries outside the output window
    long window = 0;
};

// (Hx)_n = sum_{k != n} x_k / (n - k) for |n| <= window (default 4 * radius, at least 8).
Transformed hilbert_transform(const CoeffSeq& x, std::optional<long> window = std::nullopt);

// Stability diagnostic on l2(Omega_delta): inputs supported in |k| <= window, outputs kept to |n| <= 4 window.
struct HilbertStat {
    long window = 0;
    double max_ratio = 0.0;    // max ||Hx|| / ||x|| over seeded random complex Gaussian x
    double matrix_norm = 0.0;  // spectral norm of the weighted truncated matrix (power iteration)
};
HilbertStat hilbert_weighted_statistic(double delta, long window, int samples, std::uint64_t seed);

CoeffSeq derive_potential_coeffs(const CoeffSeq& Q, Lattice bc);

// Exponential (2Z) to sine (N) coefficients; requires sum q = 0.
Transformed exp_to_sine(const CoeffSeq& q, std::optional<long> window = std::nullopt);

// Sine (N) to exponential (2Z) coefficients.
Transformed sine_to_exp(const CoeffSeq& qt, std::optional<long> window = std::nullopt);

// Samples sum c_k u_k(x_j) at x_j = j*pi/G, j = 0..G-1.
std::vector<cplx> synthesize_on_grid(const CoeffSeq& c, Lattice bc, int G);

// Normalized-measure grid L2 norm.
double grid_l2(const std::vector<cplx>& f);

enum class Family { Trig, Mathieu, Sawtooth, DiracComb, SobolevTail, LpSingular };

struct PotentialSpec {
    Family family = Family::Mathieu;
    std::map<std::string, double> params;
    std::vector<std::pair<long, cplx>> trig;  // explicit exponential V-coefficients for Trig
    std::string text;                          // canonical "family:params" label

    double param(const std::string& key, double fallback) const;
    static PotentialSpec parse(const std::string& s);
};

struct Potential {
    CoeffSeq V;
    std::optional<CoeffSeq> Q;
    std::string id;
};

Potential make_potential(const PotentialSpec& spec, Lattice bc, long window, std::uint64_t seed);

// Deterministic unit-modulus phase keyed by (seed, index), independent of window.
cplx keyed_phase(std::uint64_t seed, long k);

// CSV (index,re,im) round trip.
void write_coeffs_csv(const CoeffSeq& c, const std::string& path);
CoeffSeq read_coeffs_csv(const std::string& path, Lattice L, CoeffRole role);

}  // namespace hill
