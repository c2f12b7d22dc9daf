#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hill/harness.hpp"

namespace hill {

namespace {

// Shortest round-trip text so identical runs give identical files.
std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
    if (!f) throw Error("write failed for " + p.string());
}

std::filesystem::path ensure_dir(const std::string& dir) {
    std::filesystem::path d(dir);
    std::error_code ec;
    std::filesystem::create_directories(d, ec);
    if (ec) throw Error("cannot create " + dir + ": " + ec.message());
    return d;
}

}  // namespace

std::string rate_csv(const std::vector<RateTable>& tables) {
    std::ostringstream os;
    os << "bc,potential,N,a,b,lower,upper,wiener,slope,gamma_pred,intercept,residual,rate_claim,trend_claim,"
          "K_max,K_tail,G,nodes,idempotency,min_distance,numerically_zero,gate_change,gate_passed,fit_note\n";
    for (const auto& t : tables) {
        for (const auto& r : t.rows) {
            os << t.bc << ',' << csv_field(t.potential) << ',' << r.N << ',' << num(r.a) << ',' << num(r.b) << ','
               << num(r.lower) << ',' << num(r.upper) << ',' << num(r.wiener) << ','
               << (t.fit ? num(t.fit->slope) : "") << ',' << (t.pred.rate ? num(t.pred.gamma) : "") << ','
               << (t.fit ? num(t.fit->intercept) : "") << ',' << (t.fit ? num(t.fit->residual) : "") << ','
               << t.pred.rate << ',' << t.pred.trend << ',' << r.K_max << ',' << r.K_tail << ',' << r.G << ',' << r.nodes << ','
               << num(r.idempotency) << ',' << num(r.min_distance) << ',' << r.numerically_zero << ','
               << num(t.gate_change) << ',' << t.gate_passed << ',' << csv_field(t.fit_note) << '\n';
        }
    }
    return os.str();
}

std::string rate_svg(const RateTable& t) {
    const double W = 640, H = 440, L = 70, R = 20, T = 40, B = 60;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const std::string title = t.bc + "  " + t.potential + "  (a,b) = (" + num(t.a) + ", " + num(t.b) + ")";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\">" << xml_escape(title) << "</text>\n";

    std::vector<std::pair<double, double>> pts;
    for (const auto& r : t.rows)
        if (r.lower > 0 && std::isfinite(r.lower)) pts.emplace_back(std::log10(double(r.N)), std::log10(r.lower));
    if (pts.empty()) {
        os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2 << "\" text-anchor=\"middle\">no positive norms</text>\n</svg>\n";
        return os.str();
    }
    double x0 = pts.front().first, x1 = pts.front().first, y0 = pts.front().second, y1 = y0;
    for (auto [x, y] : pts) x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    x0 -= 0.1, x1 += 0.1;
    y0 = std::floor(y0 - 0.1), y1 = std::ceil(y1 + 0.1);
    auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto Y = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    auto clip_line = [&](double slope, double icpt, const char* style) {
        // log10 norm = icpt + slope * log10 N, clipped to the frame in x and y
        double xa = x0, xb = x1;
        auto yv = [&](double x) { return icpt + slope * x; };
        if (slope != 0) {
            const double xl = (y0 - icpt) / slope, xh = (y1 - icpt) / slope;
            xa = std::max(xa, std::min(xl, xh));
            xb = std::min(xb, std::max(xl, xh));
        }
        if (xa >= xb) return;
        os << "<line x1=\"" << X(xa) << "\" y1=\"" << Y(yv(xa)) << "\" x2=\"" << X(xb) << "\" y2=\"" << Y(yv(xb))
           << "\" " << style << "/>\n";
    };

    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double e = y0; e <= y1 + 1e-9; e += 1) {
        os << "<line x1=\"" << L << "\" y1=\"" << Y(e) << "\" x2=\"" << W - R << "\" y2=\"" << Y(e)
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << Y(e) + 4 << "\" text-anchor=\"end\">1e" << static_cast<int>(e)
           << "</text>\n";
    }
    for (const auto& r : t.rows) {
        const double x = X(std::log10(double(r.N)));
        os << "<text x=\"" << x << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << r.N << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">N</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
       << ")\" text-anchor=\"middle\">norm (lower bound)</text>\n";

    const double ln10 = std::log(10.0);
    if (t.fit) clip_line(t.fit->slope, t.fit->intercept / ln10, "stroke=\"#1f77b4\" stroke-width=\"1.5\"");
    if (t.pred.rate) {
        // guide through the first point with the predicted slope
        clip_line(-t.pred.gamma, pts.front().second + t.pred.gamma * pts.front().first,
                  "stroke=\"#d62728\" stroke-dasharray=\"6 4\"");
    }
    for (auto [x, y] : pts) os << "<circle cx=\"" << X(x) << "\" cy=\"" << Y(y) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";

    std::string legend = t.fit ? "fit slope " + num(std::round(t.fit->slope * 1000) / 1000) : t.fit_note;
    if (t.pred.rate) legend += "   predicted -" + num(std::round(t.pred.gamma * 1000) / 1000) + " (dashed)";
    else if (t.pred.trend) legend += "   predicted: -> 0";
    os << "<text x=\"" << L + 8 << "\" y=\"" << T + 16 << "\">" << xml_escape(legend) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::vector<std::string> emit_report(const std::vector<RateTable>& tables, const std::string& dir,
                                     const std::vector<std::string>& formats, const std::string& stem) {
    const auto d = ensure_dir(dir);
    std::vector<std::string> written;
    bool empty = true;
    for (const auto& t : tables) empty = empty && t.rows.empty();
    if (empty) std::cerr << "warning: rate table is empty; writing header only\n";
    const auto csv = d / (stem + ".csv");
    write_text(csv, rate_csv(tables));
    written.push_back(csv.string());

    // Wall-clock times live apart from the table so the table itself is reproducible bit for bit.
    std::ostringstream tm;
    tm << "N,a,b,runtime_ms\n";
    for (const auto& t : tables)
        for (const auto& r : t.rows) tm << r.N << ',' << num(r.a) << ',' << num(r.b) << ',' << r.runtime_ms << '\n';
    const auto timing = d / (stem + "_timing.csv");
    write_text(timing, tm.str());
    written.push_back(timing.string());

    if (std::find(formats.begin(), formats.end(), "svg") != formats.end()) {
        for (std::size_t i = 0; i < tables.size(); ++i) {
            const auto p = d / (tables.size() == 1 ? stem + ".svg" : stem + "_" + std::to_string(i) + ".svg");
            write_text(p, rate_svg(tables[i]));
            written.push_back(p.string());
        }
    }
    return written;
}

std::vector<std::string> emit_report(const VerifyReport& report, const std::string& dir, const std::string& stem) {
    const auto d = ensure_dir(dir);
    std::ostringstream os;
    os << "check,passed,value,tolerance,ms,detail\n";
    for (const auto& c : report.checks)
        os << c.name << ',' << c.passed << ',' << num(c.value) << ',' << num(c.tolerance) << ',' << c.ms << ','
           << csv_field(c.detail) << '\n';
    const auto p = d / (stem + ".csv");
    write_text(p, os.str());
    return {p.string()};
}

}  // namespace hill
