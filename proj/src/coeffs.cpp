#include "hill/coeffs.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace hill {

namespace {

constexpr double pi = std::numbers::pi;
const double sqrt2 = std::sqrt(2.0);

long default_window(long radius) { return std::max<long>(4 * radius, 8); }

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidArgument("malformed number '" + s + "'");
    return v;
}

// Accepts "a", "bi", "a+bi", "a-bi".
cplx parse_complex(std::string s) {
    s = trim(s);
    if (s.empty()) throw InvalidArgument("empty coefficient");
    if (s.back() != 'i') return {to_double(s), 0.0};
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t p = s.size(); p-- > 1;) {
        if ((s[p] == '+' || s[p] == '-') && s[p - 1] != 'e' && s[p - 1] != 'E') {
            split = p;
            break;
        }
    }
    auto imag_of = [](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return to_double(t);
    };
    if (split == std::string::npos) return {0.0, imag_of(s)};
    return {to_double(s.substr(0, split)), imag_of(s.substr(split))};
}

// Node set for int_0^{pi/2} t^{-beta} g(t) dt after t = s^{1/(1-beta)}, which removes the endpoint singularity.
struct LpRule {
    std::vector<double> t, w;
};

LpRule lp_rule(double beta, int panels = 10000) {
    using GL = boost::math::quadrature::gauss<double, 8>;
    const double p = 1.0 / (1.0 - beta);
    const double S = std::pow(pi / 2, 1.0 - beta);
    const double hpan = S / panels;
    const auto& x = GL::abscissa();
    const auto& wt = GL::weights();
    LpRule r;
    for (int j = 0; j < panels; ++j) {
        const double c = (j + 0.5) * hpan, half = hpan / 2;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const int signs = x[i] == 0.0 ? 1 : 2;
            for (int sgn = 0; sgn < signs; ++sgn) {
                const double s = c + (sgn == 0 ? x[i] : -x[i]) * half;
                r.t.push_back(std::pow(s, p));
                r.w.push_back(wt[i] * half * p);
            }
        }
    }
    return r;
}

double lp_cos_integral(const LpRule& r, double K) {
    double total = 0.0;
    for (std::size_t i = 0; i < r.t.size(); ++i) total += r.w[i] * std::cos(K * r.t[i]);
    return total;
}

}  // namespace

bool on_lattice(Lattice L, long k) {
    switch (L) {
        case Lattice::PerPlus: return k % 2 == 0;
        case Lattice::PerMinus: return k % 2 != 0;
        case Lattice::Dir: return k >= 1;
        case Lattice::Integers: return true;
    }
    return false;
}

bool is_periodic(Lattice L) { return L == Lattice::PerPlus || L == Lattice::PerMinus; }

std::string to_string(Lattice L) {
    switch (L) {
        case Lattice::PerPlus: return "per+";
        case Lattice::PerMinus: return "per-";
        case Lattice::Dir: return "dir";
        case Lattice::Integers: return "z";
    }
    return "?";
}

Lattice lattice_from_string(const std::string& s) {
    const std::string t = lower(trim(s));
    if (t == "per+" || t == "perplus") return Lattice::PerPlus;
    if (t == "per-" || t == "perminus") return Lattice::PerMinus;
    if (t == "dir" || t == "dirichlet") return Lattice::Dir;
    if (t == "z" || t == "integers") return Lattice::Integers;
    throw InvalidArgument("unknown boundary condition '" + s + "'");
}

CoeffSeq::CoeffSeq(Lattice L, CoeffRole role) : lattice_(L), role_(role) {}

CoeffSeq::CoeffSeq(Lattice L, CoeffRole role, std::initializer_list<std::pair<const long, cplx>> init)
    : lattice_(L), role_(role) {
    for (const auto& [k, v] : init) set(k, v);
}

cplx CoeffSeq::operator[](long k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? cplx{} : it->second;
}

void CoeffSeq::set(long k, cplx value) {
    if (!on_lattice(lattice_, k))
        throw LatticeMismatch("index " + std::to_string(k) + " is not on lattice " + to_string(lattice_));
    entries_[k] = value;
}

void CoeffSeq::add(long k, cplx value) {
    if (!on_lattice(lattice_, k))
        throw LatticeMismatch("index " + std::to_string(k) + " is not on lattice " + to_string(lattice_));
    entries_[k] += value;
}

long CoeffSeq::radius() const {
    if (entries_.empty()) return 0;
    return std::max(std::labs(entries_.begin()->first), std::labs(entries_.rbegin()->first));
}

CoeffSeq CoeffSeq::scaled(cplx c) const {
    CoeffSeq out(lattice_, role_);
    for (const auto& [k, v] : entries_) out.entries_[k] = c * v;
    return out;
}

double Weight::operator()(long k) const {
    const double a = std::fabs(static_cast<double>(k));
    switch (kind) {
        case Kind::Unit: return 1.0;
        case Kind::Sobolev: return std::pow(1.0 + a * a, param / 2);
        case Kind::Log: return std::pow(std::log(std::numbers::e + a), param);
    }
    return 1.0;
}

double weighted_norm(const CoeffSeq& q, const Weight& w) { return remainder(q, 0.0, w); }

double remainder(const CoeffSeq& q, double M, const Weight& w) {
    if (M < 0) throw InvalidArgument("remainder threshold must be nonnegative");
    double s = 0.0;
    for (const auto& [k, v] : q.entries()) {
        if (std::fabs(static_cast<double>(k)) < M) continue;
        const double wk = w(k);
        s += std::norm(v) * wk * wk;
    }
    return std::sqrt(s);
}

double l1_norm(const CoeffSeq& c) {
    double s = 0.0;
    for (const auto& [k, v] : c.entries()) s += std::abs(v);
    return s;
}

Transformed hilbert_transform(const CoeffSeq& x, std::optional<long> window) {
    const long R = x.radius();
    const long W = window.value_or(default_window(R));
    if (!x.empty() && W <= R) throw InvalidArgument("hilbert window must exceed the input support radius");
    Transformed out{CoeffSeq(Lattice::Integers, x.role()), 0.0, W};
    if (x.empty()) return out;
    for (long n = -W; n <= W; ++n) {
        cplx s{};
        for (const auto& [k, v] : x.entries())
            if (k != n) s += v / static_cast<double>(n - k);
        out.coeffs.set(n, s);
    }
    out.tail_bound = l1_norm(x) * std::sqrt(2.0 / static_cast<double>(W - R));
    return out;
}

HilbertStat hilbert_weighted_statistic(double delta, long window, int samples, std::uint64_t seed) {
    const long W = window, Wo = 4 * window;
    const Weight om = Weight::sobolev(delta);
    const Eigen::Index nin = 2 * W + 1, nout = 2 * Wo + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nout, nin);
    for (Eigen::Index i = 0; i < nout; ++i) {
        const long n = i - Wo;
        for (Eigen::Index j = 0; j < nin; ++j) {
            const long k = j - W;
            if (n != k) A(i, j) = om(n) / (static_cast<double>(n - k) * om(k));
        }
    }
    HilbertStat st;
    st.window = W;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd X(nin, samples);
    for (int s = 0; s < samples; ++s)
        for (Eigen::Index j = 0; j < nin; ++j) X(j, s) = {g(gen), g(gen)};
    const Eigen::MatrixXcd Y = A.cast<cplx>() * X;
    for (int s = 0; s < samples; ++s) st.max_ratio = std::max(st.max_ratio, Y.col(s).norm() / X.col(s).norm());

    Eigen::VectorXd v = Eigen::VectorXd::Ones(nin).normalized();
    double sigma = 0.0;
    for (int it = 0; it < 300; ++it) {
        Eigen::VectorXd w = A.transpose() * (A * v);
        const double lam = w.norm();
        v = w / lam;
        const double next = std::sqrt(lam);
        if (std::fabs(next - sigma) <= 1e-10 * next) {
            sigma = next;
            break;
        }
        sigma = next;
    }
    st.matrix_norm = sigma;
    return st;
}

CoeffSeq derive_potential_coeffs(const CoeffSeq& Q, Lattice bc) {
    const Lattice need = bc == Lattice::Dir ? Lattice::Dir : Lattice::PerPlus;
    if (Q.lattice() != need || Q.role() != CoeffRole::Q)
        throw LatticeMismatch("derive_potential_coeffs expects Q-coefficients on " + to_string(need));
    CoeffSeq V(need, CoeffRole::V);
    for (const auto& [k, q] : Q.entries()) {
        if (k == 0) continue;
        if (bc == Lattice::Dir)
            V.set(k, static_cast<double>(k) * q);
        else
            V.set(k, cplx(0.0, static_cast<double>(k)) * q);
    }
    return V;
}

Transformed exp_to_sine(const CoeffSeq& q, std::optional<long> window) {
    if (q.lattice() != Lattice::PerPlus) throw LatticeMismatch("exp_to_sine expects coefficients on 2Z");
    cplx sum{};
    for (const auto& [k, v] : q.entries()) sum += v;
    const double mass = l1_norm(q);
    if (std::abs(sum) > 1e-12 * std::max(1.0, mass)) {
        std::ostringstream msg;
        msg << "coefficient sum " << std::abs(sum) << " violates Q(0) = 0";
        throw NormalizationError(msg.str(), std::abs(sum));
    }
    const long R = q.radius();
    const long W = window.value_or(default_window(R));
    Transformed out{CoeffSeq(Lattice::Dir, q.role()), 0.0, W};
    if (q.empty()) return out;
    const cplx half_i(0.0, 1.0 / sqrt2);
    double moment2 = 0.0;
    for (const auto& [k, v] : q.entries()) moment2 += static_cast<double>(k) * k * std::abs(v);
    for (long m = 1; m <= W; ++m) {
        cplx val{};
        if (m % 2 == 0) {
            val = half_i * (q[m] - q[-m]);
        } else {
            const double md = static_cast<double>(m);
            for (const auto& [k, v] : q.entries()) {
                if (k == 0) continue;
                const double K = static_cast<double>(k);
                val += v * (1.0 / (md + K) + 1.0 / (md - K) - 2.0 / md);
            }
            val *= sqrt2 / pi;
        }
        if (val != cplx{}) out.coeffs.set(m, val);
    }
    if (W >= 2 * R && W > 1) {
        const double C = sqrt2 / pi * (8.0 / 3.0) * moment2;
        out.tail_bound = C * std::sqrt(1.0 / (10.0 * std::pow(static_cast<double>(W - 1), 5)));
    } else {
        out.tail_bound = std::numeric_limits<double>::infinity();
    }
    return out;
}

Transformed sine_to_exp(const CoeffSeq& qt, std::optional<long> window) {
    if (qt.lattice() != Lattice::Dir) throw LatticeMismatch("sine_to_exp expects coefficients on N");
    const long R = qt.radius();
    const long W = window.value_or(default_window(R));
    Transformed out{CoeffSeq(Lattice::PerPlus, qt.role()), 0.0, W};
    if (qt.empty()) return out;
    const cplx mi(0.0, -1.0 / sqrt2);
    double moment1 = 0.0;
    for (const auto& [s, v] : qt.entries())
        if (s % 2 != 0) moment1 += static_cast<double>(s) * std::abs(v);
    const long Wk = W - (W % 2 != 0 ? 1 : 0);
    for (long K = -Wk; K <= Wk; K += 2) {
        cplx val{};
        if (K != 0) val += mi * qt[std::labs(K)] * (K > 0 ? 1.0 : -1.0);
        cplx odd{};
        const double Kd = static_cast<double>(K);
        for (const auto& [s, v] : qt.entries()) {
            if (s % 2 == 0) continue;
            const double sd = static_cast<double>(s);
            odd += v * (1.0 / (sd - Kd) + 1.0 / (sd + Kd));
        }
        val += sqrt2 / pi * odd;
        if (val != cplx{}) out.coeffs.set(K, val);
    }
    if (W >= 2 * R && W > 1) {
        const double C = sqrt2 / pi * (8.0 / 3.0) * moment1;
        out.tail_bound = C * std::sqrt(1.0 / (3.0 * std::pow(static_cast<double>(W - 1), 3)));
    } else {
        out.tail_bound = std::numeric_limits<double>::infinity();
    }
    return out;
}

std::vector<cplx> synthesize_on_grid(const CoeffSeq& c, Lattice bc, int G) {
    if (G <= 0 || static_cast<long>(G) < 2 * c.radius())
        throw UndersampledGrid("grid of " + std::to_string(G) + " points cannot resolve index " +
                               std::to_string(c.radius()));
    std::vector<cplx> f(static_cast<std::size_t>(G));
    for (int j = 0; j < G; ++j) {
        const double x = j * pi / G;
        cplx s{};
        for (const auto& [k, v] : c.entries()) {
            if (bc == Lattice::Dir)
                s += v * (sqrt2 * std::sin(k * x));
            else
                s += v * std::polar(1.0, k * x);
        }
        f[static_cast<std::size_t>(j)] = s;
    }
    return f;
}

double grid_l2(const std::vector<cplx>& f) {
    if (f.empty()) return 0.0;
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    return std::sqrt(s / static_cast<double>(f.size()));
}

double PotentialSpec::param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

PotentialSpec PotentialSpec::parse(const std::string& s) {
    PotentialSpec spec;
    spec.text = trim(s);
    const auto colon = spec.text.find(':');
    const std::string fam = lower(trim(spec.text.substr(0, colon)));
    const std::string rest = colon == std::string::npos ? std::string{} : spec.text.substr(colon + 1);

    if (fam == "trig") spec.family = Family::Trig;
    else if (fam == "mathieu") spec.family = Family::Mathieu;
    else if (fam == "sawtooth" || fam == "sawtoothbv") spec.family = Family::Sawtooth;
    else if (fam == "dirac" || fam == "diraccomb") spec.family = Family::DiracComb;
    else if (fam == "sobolev" || fam == "randomsobolevtail") spec.family = Family::SobolevTail;
    else if (fam == "lp" || fam == "lpsingular") spec.family = Family::LpSingular;
    else throw UnknownFamily("unknown potential family '" + fam + "'");

    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InvalidArgument("expected key=value in '" + item + "'");
        const std::string key = trim(item.substr(0, eq));
        const std::string val = trim(item.substr(eq + 1));
        if (spec.family == Family::Trig) {
            spec.trig.emplace_back(std::stol(key), parse_complex(val));
        } else {
            spec.params[lower(key)] = to_double(val);
        }
    }
    if (spec.family == Family::LpSingular) {
        const double beta = spec.param("beta", 0.5);
        if (beta >= 1.0) throw InvalidArgument("LpSingular needs beta < 1 for integrability");
        if (beta < 0.0) throw InvalidArgument("LpSingular needs beta >= 0");
    }
    if (spec.family == Family::SobolevTail) {
        const double a = spec.param("alpha", 0.5);
        if (a < 0.0 || a > 1.0) throw InvalidArgument("SobolevTail alpha must lie in [0, 1]");
    }
    return spec;
}

cplx keyed_phase(std::uint64_t seed, long k) {
    const auto uk = static_cast<std::uint64_t>(k);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(uk), static_cast<std::uint32_t>(uk >> 32)};
    std::mt19937_64 gen(seq);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return std::polar(1.0, 2 * pi * U(gen));
}

Potential make_potential(const PotentialSpec& spec, Lattice bc, long window, std::uint64_t seed) {
    if (window < 4) throw InvalidArgument("potential window must be at least 4");
    if (bc == Lattice::Integers) throw LatticeMismatch("potentials live on a boundary-condition lattice");
    const bool dir = bc == Lattice::Dir;
    const double amp = spec.param("amp", 1.0);
    Potential P{CoeffSeq(dir ? Lattice::Dir : Lattice::PerPlus, CoeffRole::V), std::nullopt, spec.text};
    bool q_summable = true;

    auto sobolev_law = [&](long k) {
        const double a = std::fabs(static_cast<double>(k));
        return amp * std::pow(a, spec.param("alpha", 0.5) - 0.5) / (1.0 + std::log(a));
    };

    switch (spec.family) {
        case Family::Trig: {
            CoeffSeq Vp(Lattice::PerPlus, CoeffRole::V);
            for (const auto& [k, v] : spec.trig) {
                if (k % 2 != 0) throw LatticeMismatch("trig coefficients must sit on even indices");
                if (std::labs(k) <= window) Vp.add(k, v);
            }
            if (!dir) {
                P.V = Vp;
                break;
            }
            if (Vp[0] != cplx{}) throw InvalidArgument("Dirichlet trig potential needs V(0) = 0");
            CoeffSeq q(Lattice::PerPlus, CoeffRole::Q);
            cplx s{};
            for (const auto& [k, v] : Vp.entries())
                if (k != 0) {
                    q.set(k, v / cplx(0.0, static_cast<double>(k)));
                    s += q[k];
                }
            if (!q.empty()) q.set(0, -s);
            const auto qt = exp_to_sine(q, window);
            for (const auto& [m, v] : qt.coeffs.entries()) P.V.set(m, static_cast<double>(m) * v);
            break;
        }
        case Family::Mathieu:
            if (dir)
                P.V.set(2, sqrt2 * amp);
            else {
                P.V.set(2, amp);
                P.V.set(-2, amp);
            }
            break;
        case Family::Sawtooth:
            // v = amp (pi/2 - x) on [0, pi), extended pi-periodically.
            if (dir) {
                for (long m = 1; m <= window; m += 2)
                    P.V.set(m, amp * 2 * sqrt2 / (pi * static_cast<double>(m * m)));
            } else {
                for (long k = 2; k <= window; k += 2) {
                    P.V.set(k, amp / cplx(0.0, static_cast<double>(k)));
                    P.V.set(-k, amp / cplx(0.0, -static_cast<double>(k)));
                }
            }
            break;
        case Family::DiracComb: {
            // v = amp (pi delta(x - x0) - 1), pi-periodic.
            const double x0 = spec.param("x0", 0.0);
            q_summable = false;
            if (dir) {
                const double r = std::remainder(x0, pi);
                const bool endpoint = std::fabs(r) < 1e-14;
                for (long m = 1; m <= window; ++m) {
                    const double c = endpoint ? (m % 2 == 0 ? 1.0 : 0.0) : std::cos(m * x0);
                    if (c != 0.0) P.V.set(m, amp * sqrt2 * c);
                }
            } else {
                for (long k = 2; k <= window; k += 2) {
                    P.V.set(k, amp * std::polar(1.0, -k * x0));
                    P.V.set(-k, amp * std::polar(1.0, k * x0));
                }
            }
            break;
        }
        case Family::SobolevTail: {
            const bool real = spec.param("real", 0.0) != 0.0;
            q_summable = spec.param("alpha", 0.5) < 0.5;
            if (dir) {
                for (long m = 1; m <= window; ++m) {
                    const cplx ph = keyed_phase(seed, m);
                    P.V.set(m, sobolev_law(m) * (real ? cplx(ph.real() >= 0 ? 1.0 : -1.0) : ph));
                }
            } else {
                for (long k = 2; k <= window; k += 2) {
                    const cplx p1 = keyed_phase(seed, k);
                    const cplx p2 = real ? std::conj(p1) : keyed_phase(seed, -k);
                    P.V.set(k, sobolev_law(k) * p1);
                    P.V.set(-k, sobolev_law(k) * p2);
                }
            }
            break;
        }
        case Family::LpSingular: {
            // v = |x - pi/2|^{-beta} - mean; every coefficient reduces to int_0^{pi/2} t^{-beta} cos(Kt) dt.
            const double beta = spec.param("beta", 0.5);
            if (beta >= 1.0) throw InvalidArgument("LpSingular needs beta < 1");
            const LpRule rule = lp_rule(beta);
            if (dir) {
                for (long m = 2; m <= window; m += 2) {
                    const double sign = (m / 2) % 2 == 0 ? 1.0 : -1.0;  // cos(m pi / 2)
                    P.V.set(m, amp * sqrt2 / pi * 2 * sign * lp_cos_integral(rule, static_cast<double>(m)));
                }
            } else {
                for (long k = 2; k <= window; k += 2) {
                    const double sign = (k / 2) % 2 == 0 ? 1.0 : -1.0;  // exp(-i k pi / 2)
                    const double v = amp * 2 / pi * sign * lp_cos_integral(rule, static_cast<double>(k));
                    P.V.set(k, v);
                    P.V.set(-k, v);
                }
            }
            break;
        }
    }

    // Q-coefficients: V(k)/(ik) on 2Z with the constant fixed by Q(0) = 0 when summable; q~(m) = V~(m)/m on N.
    if (dir) {
        CoeffSeq Q(Lattice::Dir, CoeffRole::Q);
        for (const auto& [m, v] : P.V.entries()) Q.set(m, v / static_cast<double>(m));
        P.Q = Q;
    } else if (P.V[0] == cplx{}) {
        CoeffSeq Q(Lattice::PerPlus, CoeffRole::Q);
        cplx s{};
        for (const auto& [k, v] : P.V.entries()) {
            if (k == 0) continue;
            const cplx qk = v / cplx(0.0, static_cast<double>(k));
            Q.set(k, qk);
            s += qk;
        }
        if (q_summable && !Q.empty()) Q.set(0, -s);
        P.Q = Q;
    }
    return P;
}

void write_coeffs_csv(const CoeffSeq& c, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << "index,re,im\n" << std::setprecision(17);
    for (const auto& [k, v] : c.entries()) os << k << ',' << v.real() << ',' << v.imag() << '\n';
    if (!os) throw Error("write failed for " + path);
}

CoeffSeq read_coeffs_csv(const std::string& path, Lattice L, CoeffRole role) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    CoeffSeq c(L, role);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        if (first) {
            first = false;
            if (line.find("index") != std::string::npos) continue;
        }
        std::stringstream ss(line);
        std::string a, b, d;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, d, ',');
        c.add(std::stol(a), {to_double(trim(b)), d.empty() ? 0.0 : to_double(trim(d))});
    }
    return c;
}

}  // namespace hill
