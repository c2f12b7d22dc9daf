#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <complex>
#include <numbers>
#include <vector>

#include "hill/operators.hpp"

namespace hill::detail {

struct Panel {
    cplx a, b;
};

inline double segment_distance(cplx p, cplx a, cplx b) {
    const cplx d = b - a;
    double t = std::real((p - a) * std::conj(d)) / std::norm(d);
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - a - t * d);
}

// Counterclockwise edges, each bisected until no panel is longer than twice its distance to the nearest pole.
inline std::vector<Panel> build_panels(const ContourRect& R, const std::vector<cplx>& poles) {
    const double x0 = -R.omega, x1 = R.right(), h = R.h;
    const cplx c[4] = {{x0, -h}, {x1, -h}, {x1, h}, {x0, h}};
    std::vector<Panel> out;
    std::vector<std::pair<Panel, int>> stack;
    for (int e = 0; e < 4; ++e) {
        stack.push_back({{c[e], c[(e + 1) % 4]}, 0});
        std::vector<Panel> edge;
        while (!stack.empty()) {
            auto [p, depth] = stack.back();
            stack.pop_back();
            double d = std::numeric_limits<double>::infinity();
            for (const auto& z : poles) d = std::min(d, segment_distance(z, p.a, p.b));
            if (std::abs(p.b - p.a) > 2 * d && depth < 40) {
                const cplx m = 0.5 * (p.a + p.b);
                stack.push_back({{m, p.b}, depth + 1});  // popped second
                stack.push_back({{p.a, m}, depth + 1});
            } else {
                edge.push_back(p);
            }
        }
        out.insert(out.end(), edge.begin(), edge.end());
    }
    return out;
}

inline std::vector<Panel> bisect(const std::vector<Panel>& in) {
    std::vector<Panel> out;
    out.reserve(2 * in.size());
    for (const auto& p : in) {
        const cplx m = 0.5 * (p.a + p.b);
        out.push_back({p.a, m});
        out.push_back({m, p.b});
    }
    return out;
}

inline double frob(const cplx& z) { return std::abs(z); }
inline double frob(const Eigen::MatrixXcd& M) { return M.norm(); }

constexpr int kNodesPerPanel = 16;
constexpr std::size_t kPanelsPerChunk = 8;

// sum over nodes of w * f(z), where w carries dz / (2 pi i). Eval(z, w, acc) adds one node.
// Chunk partial sums are combined pairwise, so the result does not depend on scheduling.
template <class Acc, class Eval>
Acc integrate_panels(const std::vector<Panel>& panels, const Acc& zero, Eval&& eval) {
    using GL = boost::math::quadrature::gauss<double, kNodesPerPanel>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    const cplx inv2pii = 1.0 / cplx(0.0, 2 * std::numbers::pi);
    std::vector<Acc> parts;
    for (std::size_t c0 = 0; c0 < panels.size(); c0 += kPanelsPerChunk) {
        Acc acc = zero;
        const std::size_t c1 = std::min(panels.size(), c0 + kPanelsPerChunk);
        for (std::size_t p = c0; p < c1; ++p) {
            const cplx mid = 0.5 * (panels[p].a + panels[p].b), half = 0.5 * (panels[p].b - panels[p].a);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const cplx w = ws[i] * half * inv2pii;
                eval(mid - xs[i] * half, w, acc);
                if (xs[i] != 0.0) eval(mid + xs[i] * half, w, acc);
            }
        }
        parts.push_back(std::move(acc));
    }
    if (parts.empty()) return zero;
    while (parts.size() > 1) {
        std::vector<Acc> next;
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(parts[i] + parts[i + 1]);
        if (parts.size() % 2) next.push_back(parts.back());
        parts.swap(next);
    }
    return parts.front();
}

template <class Acc>
struct Adaptive {
    Acc value;
    int nodes = 0;
    double last_diff = 0.0;
    bool converged = false;
};

// Bisects every panel until successive results differ by less than tol (Frobenius).
template <class Acc, class Eval>
Adaptive<Acc> integrate_adaptive(std::vector<Panel> panels, const Acc& zero, Eval&& eval, double tol,
                                 int max_doublings) {
    Adaptive<Acc> res;
    Acc prev = integrate_panels(panels, zero, eval);
    int nodes = static_cast<int>(panels.size()) * kNodesPerPanel;
    for (int d = 0; d < max_doublings; ++d) {
        panels = bisect(panels);
        Acc cur = integrate_panels(panels, zero, eval);
        nodes += static_cast<int>(panels.size()) * kNodesPerPanel;
        res.last_diff = frob(cur - prev);
        prev = std::move(cur);
        if (res.last_diff < tol) {
            res.converged = true;
            break;
        }
    }
    res.value = std::move(prev);
    res.nodes = nodes;
    return res;
}

}  // namespace hill::detail
