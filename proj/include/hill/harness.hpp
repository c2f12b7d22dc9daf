#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hill/coeffs.hpp"
#include "hill/norms.hpp"
#include "hill/projections.hpp"

namespace hill {

// K_max = mult * N + offset, written "4N+8".
struct WindowRule {
    long mult = 4;
    long offset = 8;
    long K(int N) const { return mult * N + offset; }
    std::string str() const;
    static WindowRule parse(const std::string& s);
};

struct ExperimentConfig {
    Lattice bc = Lattice::PerPlus;
    std::string potential = "mathieu";
    std::uint64_t seed = 1;
    std::vector<int> n_list{8, 16, 32, 64};
    std::vector<std::pair<double, double>> pairs{{1.0, kInf}};
    int grid_mult = 4;            // G = grid_mult * K_max unless grid is set
    std::optional<int> grid;      // fixed G for every N
    WindowRule window;
    int tail_mult = 4;            // first-order part continued to tail_mult * K_max; 0 keeps the window only
    std::optional<long> potential_window;  // default 2 * max(K_max, K_tail) at N_max
    std::optional<double> omega, h;
    bool truncation_gate = true;
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv"};

    void validate() const;
};

// Reads the config schema: keys bc, potential, seed, n_list, a, b | pairs, grid, grid_mult, window_rule,
// potential_window, tail_mult, omega, h, truncation_gate, out, format.
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

// Smoothness class a family is assigned to for exponent lookup.
struct PotentialClass {
    enum class Kind { Lp, HMinus, None } kind = Kind::None;
    double value = 0.0;  // p for Lp, alpha for HMinus
};
PotentialClass classify(const PotentialSpec& spec);

struct Prediction {
    double gamma = 0.0;  // decay exponent; 0 when only convergence (or nothing) is asserted
    bool rate = false;   // true when gamma is a rate claim
    bool trend = false;  // true when only "-> 0" is claimed
    bool log_factor = false;  // rate carries an extra log N
    std::string provenance;
};
Prediction predict_gamma(const PotentialClass& cls, double a, double b);

struct RateRow {
    int N = 0;
    double a = 1, b = kInf;
    double lower = 0, upper = 0, wiener = 0;
    long K_max = 0, K_tail = 0;
    int G = 0;
    int nodes = 0;
    double idempotency = 0, min_distance = 0, runtime_ms = 0;
    bool numerically_zero = false;
};

struct RateFit {
    double slope = 0, intercept = 0, residual = 0;
};
RateFit fit_rate(const std::vector<RateRow>& rows);

struct RateTable {
    std::string bc, potential;
    double a = 1, b = kInf;
    std::vector<RateRow> rows;
    std::optional<RateFit> fit;  // empty when suppressed
    std::string fit_note;
    Prediction pred;
    double gate_change = 0.0;  // relative change of the largest-N lower bound under halved K_max
    bool gate_passed = true;
    // slope <= -gamma + 0.1; with a log factor gamma is reduced by 1 / log of the geometric-mean N
    bool slope_ok() const;
    bool decreasing() const;    // lower(N_max) < lower(N_min)
};

// Grid kernel of D_N. Past the window the deviation is dominated by its first-order part, whose entries are
// explicit; it is added for K_max < |k| <= K_tail (K_tail <= K_max keeps the window only).
KernelGrid deviation_kernel(const ProjectorSet& P, const CoeffSeq& V, int G, long K_tail);

std::vector<RateTable> run_rate_sweep(const ExperimentConfig& cfg);

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0, tolerance = 0;
    std::string detail;
    double ms = 0;
};

struct VerifyReport {
    std::string level;
    std::vector<CheckResult> checks;
    int failures() const;
};

struct VerifyOptions {
    std::string level = "quick";           // quick | full
    std::map<std::string, double> perturb;  // test hook: check name -> additive perturbation of its reference
    std::vector<std::string> only;          // run only these checks when non-empty
};

std::vector<std::string> verify_check_names();
VerifyReport verify_suite(const VerifyOptions& opt = {});

// Writes <dir>/<stem>.csv (and .svg when requested); returns written paths.
std::vector<std::string> emit_report(const std::vector<RateTable>& tables, const std::string& dir,
                                     const std::vector<std::string>& formats, const std::string& stem = "rates");
std::vector<std::string> emit_report(const VerifyReport& report, const std::string& dir,
                                     const std::string& stem = "verify");
std::string rate_csv(const std::vector<RateTable>& tables);
std::string rate_svg(const RateTable& table);

}  // namespace hill
