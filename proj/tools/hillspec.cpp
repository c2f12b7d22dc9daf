// hillspec: spectra, projector deviations, rate sweeps and the identity suite from the command line.
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hill/harness.hpp"

namespace {

using namespace hill;

struct Flags {
    std::string config;
    std::string bc, potential, n_list, a, b, window_rule, out, format;
    std::uint64_t seed = 1;
    int grid = 0, tail_mult = 4;
    std::vector<std::string> formats;
};

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw InvalidArgument("bad N list entry '" + item + "'");
        }
    }
    return out;
}

double parse_exponent(const std::string& s) {
    if (s == "inf" || s == "infinity" || s == "Inf") return kInf;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw InvalidArgument("bad exponent '" + s + "'");
    }
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config with the same keys as the flags");
    sub->add_option("--bc", f.bc, "boundary condition")->check(CLI::IsMember({"per+", "per-", "dir"}));
    sub->add_option("--potential", f.potential, "family:params, e.g. mathieu:amp=1");
    sub->add_option("--seed", f.seed, "seed for random potential families");
    sub->add_option("--n-list", f.n_list, "comma-separated levels, e.g. 8,16,32,64");
    sub->add_option("--a", f.a, "source exponent a (1 .. inf)");
    sub->add_option("--b", f.b, "target exponent b (a .. inf)");
    sub->add_option("--grid", f.grid, "fixed grid size G");
    sub->add_option("--window-rule", f.window_rule, "truncation rule K_max(N), e.g. 4N+8");
    sub->add_option("--tail-mult", f.tail_mult, "continue the first-order part to this multiple of K_max (0: off)");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--format", f.formats, "csv and/or svg")->check(CLI::IsMember({"csv", "svg"}))->delimiter(',');
}

// Config file first, explicit flags on top.
ExperimentConfig build_config(CLI::App* sub, const Flags& f) {
    ExperimentConfig c;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw InvalidArgument("cannot read config " + f.config);
        std::stringstream ss;
        ss << in.rdbuf();
        c = config_from_json_text(ss.str());
    }
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--bc")) c.bc = lattice_from_string(f.bc);
    if (given("--potential")) c.potential = f.potential;
    if (given("--seed")) c.seed = f.seed;
    if (given("--n-list")) c.n_list = parse_int_list(f.n_list);
    if (given("--a") || given("--b")) {
        const double a = given("--a") ? parse_exponent(f.a) : (c.pairs.size() == 1 ? c.pairs[0].first : 1.0);
        const double b = given("--b") ? parse_exponent(f.b) : (c.pairs.size() == 1 ? c.pairs[0].second : kInf);
        c.pairs = {{a, b}};
    }
    if (given("--grid")) c.grid = f.grid;
    if (given("--window-rule")) c.window = WindowRule::parse(f.window_rule);
    if (given("--tail-mult")) c.tail_mult = f.tail_mult;
    if (given("--out")) c.out_dir = f.out;
    if (given("--format")) c.formats = f.formats;
    c.validate();
    return c;
}

int cmd_spectrum(const ExperimentConfig& c, bool write) {
    const int N = c.n_list.back();
    const long K = c.window.K(N);
    const auto pot = make_potential(PotentialSpec::parse(c.potential), c.bc, c.potential_window.value_or(2 * K), c.seed);
    const auto L = assemble_operator(pot.V, index_window(c.bc, K), pot.id);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(L.matrix, false);
    if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed");
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](cplx x, cplx y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); });
    std::ostringstream os;
    os << std::setprecision(17) << "index,re,im\n";
    for (std::size_t i = 0; i < ev.size(); ++i) os << i << ',' << ev[i].real() << ',' << ev[i].imag() << '\n';
    std::cout << "# " << to_string(c.bc) << ' ' << pot.id << ", K_max = " << K << ", " << ev.size() << " eigenvalues\n"
              << os.str();
    if (write) {
        std::filesystem::create_directories(c.out_dir);
        std::ofstream(std::filesystem::path(c.out_dir) / "spectrum.csv") << os.str();
    }
    return 0;
}

int cmd_deviation(const ExperimentConfig& c) {
    const int N = c.n_list.front();
    const long K = c.window.K(N);
    const auto pot = make_potential(PotentialSpec::parse(c.potential), c.bc, c.potential_window.value_or(2 * K), c.seed);
    const auto w = index_window(c.bc, K);
    const auto L = assemble_operator(pot.V, w, pot.id);
    RieszOptions opt;
    opt.omega = c.omega;
    opt.h = c.h;
    const auto P = deviation_set(L, pot.V, N, opt);
    const auto dir = (std::filesystem::path(c.out_dir) / ("deviation_N" + std::to_string(N))).string();
    write_projector_set(P, dir);
    std::cout << "N = " << N << ", K_max = " << K << ", nodes = " << P.nodes << ", idempotency = " << P.idempotency
              << ", trace = " << P.trace.real() << ", |D|_F = " << P.D.norm() << ", |T|_F = " << P.T.norm()
              << ", |B|_F = " << P.B.norm() << "\nwrote " << dir << '\n';
    return 0;
}

int cmd_rates(const ExperimentConfig& c) {
    const auto tables = run_rate_sweep(c);
    int failed = 0;
    for (const auto& t : tables) {
        std::cout << t.bc << ' ' << t.potential << " (a,b) = (" << t.a << ", " << t.b << ")\n";
        for (const auto& r : t.rows)
            std::cout << "  N = " << std::setw(4) << r.N << "  lower = " << std::setw(12) << r.lower
                      << "  upper = " << std::setw(12) << r.upper << "  wiener = " << std::setw(12) << r.wiener
                      << "  " << r.runtime_ms << " ms\n";
        if (t.fit) std::cout << "  slope " << t.fit->slope << " (residual " << t.fit->residual << ")\n";
        else std::cout << "  " << t.fit_note << '\n';
        std::cout << "  prediction: " << (t.pred.provenance.empty() ? "none for this class and pair" : t.pred.provenance);
        if (t.pred.rate) std::cout << ", gamma = " << t.pred.gamma;
        std::cout << '\n';
        if (!t.gate_passed) {
            ++failed;
            std::cout << "  FAIL truncation gate: relative change " << t.gate_change << " under halved K_max\n";
        }
        if (t.pred.rate && t.fit && !t.slope_ok()) {
            ++failed;
            std::cout << "  FAIL slope above predicted bound + 0.1\n";
        }
        if (t.pred.trend && !t.decreasing()) {
            ++failed;
            std::cout << "  FAIL norm at largest N not below norm at smallest N\n";
        }
    }
    for (const auto& p : emit_report(tables, c.out_dir, c.formats)) std::cout << "wrote " << p << '\n';
    return failed;
}

int cmd_verify(const VerifyOptions& opt, const std::string& out) {
    const auto rep = verify_suite(opt);
    for (const auto& c : rep.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(20) << c.name << std::right
                  << " value = " << std::setw(12) << c.value << "  tol = " << std::setw(8) << c.tolerance << "  "
                  << std::setw(8) << std::fixed << std::setprecision(0) << c.ms << " ms  " << std::defaultfloat
                  << std::setprecision(6) << c.detail << '\n';
    if (!out.empty()) emit_report(rep, out);
    std::cout << rep.failures() << " of " << rep.checks.size() << " checks failed\n";
    return rep.failures();
}

int cmd_convert(const std::string& in, const std::string& from, long window, const std::string& out) {
    const bool exp = from == "exp";
    const auto src = read_coeffs_csv(in, exp ? Lattice::PerPlus : Lattice::Dir, CoeffRole::Q);
    const auto t = exp ? exp_to_sine(src, window > 0 ? std::optional<long>(window) : std::nullopt)
                       : sine_to_exp(src, window > 0 ? std::optional<long>(window) : std::nullopt);
    write_coeffs_csv(t.coeffs, out);
    std::cout << "wrote " << out << " (" << (exp ? "sine" : "exponential") << " coefficients up to " << t.window
              << ", l2 tail bound " << t.tail_bound << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hill operator spectral projector toolkit"};
    app.require_subcommand(1);

    Flags fs, fd, fr, fv;
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the truncated operator at the largest N");
    add_common(spectrum, fs);
    auto* deviation = app.add_subcommand("deviation", "dump S_N, S_N^0, D_N, T_N, B_N at the first N");
    add_common(deviation, fd);
    auto* rates = app.add_subcommand("rates", "sweep N and fit decay slopes");
    add_common(rates, fr);

    auto* verify = app.add_subcommand("verify", "identity and bracket checks");
    std::string level = "quick", vout;
    std::vector<std::string> only, perturb;
    verify->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    verify->add_option("--only", only, "run only these checks")->delimiter(',');
    verify->add_option("--out", vout, "directory for verify.csv");
    verify->add_option("--perturb", perturb, "name=delta shifts a check's reference (fixture hook)")->delimiter(',');
    verify->add_flag_callback("--list", [] {
        for (const auto& n : verify_check_names()) std::cout << n << '\n';
        std::exit(0);
    }, "list check names");

    auto* convert = app.add_subcommand("convert", "exponential <-> sine coefficient conversion");
    std::string cin, cfrom = "exp", cout_path = "converted.csv";
    long cwin = 0;
    convert->add_option("--in", cin, "input CSV (index,re,im)")->required()->check(CLI::ExistingFile);
    convert->add_option("--from", cfrom, "input basis")->check(CLI::IsMember({"exp", "sine"}));
    convert->add_option("--window", cwin, "output window");
    convert->add_option("--out", cout_path, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*spectrum) return cmd_spectrum(build_config(spectrum, fs), spectrum->count("--out") > 0);
        if (*deviation) return cmd_deviation(build_config(deviation, fd));
        if (*rates) return cmd_rates(build_config(rates, fr));
        if (*verify) {
            VerifyOptions opt;
            opt.level = level;
            opt.only = only;
            for (const auto& p : perturb) {
                const auto eq = p.find('=');
                if (eq == std::string::npos) throw InvalidArgument("perturb wants name=delta");
                opt.perturb[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
            }
            return cmd_verify(opt, vout);
        }
        if (*convert) return cmd_convert(cin, cfrom, cwin, cout_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
