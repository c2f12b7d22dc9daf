#pragma once

#include <boost/math/quadrature/gauss.hpp>

namespace hill::detail {

// sum_{k >= k0} f(k) for smooth, slowly varying, integrable f: midpoint integral from k0 - 1/2
// plus the first Euler-Maclaurin correction f'(k0 - 1/2)/24.
template <class F>
double tail_sum(double k0, F f) {
    using GL = boost::math::quadrature::gauss<double, 20>;
    const double a = k0 - 0.5;
    // dyadic panels [a + 2^j, a + 2^{j+1}] after a first panel [a, a + 1]
    double integral = GL::integrate(f, a, a + 1.0);
    double lo = 1.0;
    for (int j = 0; j < 80; ++j) {
        const double piece = GL::integrate(f, a + lo, a + 2 * lo);
        integral += piece;
        lo *= 2;
        if (j > 8 && std::fabs(piece) <= 1e-18 * std::fabs(integral)) break;
    }
    const double h = 1e-3 * (1.0 + a);
    const double df = (f(a + h) - f(a - h)) / (2 * h);
    return integral + df / 24.0;
}

}  // namespace hill::detail
