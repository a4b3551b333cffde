#include "qspec/survey.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qspec::survey {

namespace {

// Humlicek w4 rational approximation of w(z) = exp(-z^2) erfc(-iz) for
// Im z > 0. Relative accuracy about 1e-4 over the whole plane.
std::complex<double> faddeeva_w4(double x, double y) {
    using C = std::complex<double>;
    const double s = std::abs(x) + y;
    const C t(y, -x);
    if (s >= 15.0) {
        return t * 0.5641896 / (0.5 + t * t);
    }
    if (s >= 5.5) {
        const C u = t * t;
        return t * (1.410474 + u * 0.5641896) / (0.75 + u * (3.0 + u));
    }
    if (y >= 0.195 * std::abs(x) - 0.176) {
        return (16.4955 + t * (20.20933 + t * (11.96482 + t * (3.778987 + t * 0.5642236)))) /
               (16.4955 + t * (38.82363 + t * (39.27121 + t * (21.69274 + t * (6.699398 + t)))));
    }
    const C u = t * t;
    const C num =
        t * (36183.31 -
             u * (3321.9905 -
                  u * (1540.787 - u * (219.0313 - u * (35.76683 - u * (1.320522 - u * 0.56419))))));
    const C den =
        32066.6 -
        u * (24322.84 -
             u * (9022.228 -
                  u * (2186.181 - u * (364.2191 - u * (61.57037 - u * (1.841439 - u))))));
    return std::exp(u) - num / den;
}

constexpr double kSqrt2 = 1.4142135623730951;

} // namespace

double voigt_profile(double f, double sigma_g, double gamma_l, double amplitude, double center) {
    if (sigma_g < 0.0 || gamma_l < 0.0)
        throw std::invalid_argument("voigt_profile: widths must be >= 0");
    if (sigma_g == 0.0 && gamma_l == 0.0)
        throw std::invalid_argument("voigt_profile: Gaussian and Lorentzian widths both zero");

    const double d = f - center;
    const double scale = sigma_g + gamma_l;
    if (sigma_g <= 1e-10 * scale) {
        return amplitude * gamma_l * gamma_l / (d * d + gamma_l * gamma_l);
    }
    if (gamma_l <= 1e-10 * scale) {
        const double z = d / sigma_g;
        return amplitude * std::exp(-0.5 * z * z);
    }
    const double x = d / (sigma_g * kSqrt2);
    const double y = gamma_l / (sigma_g * kSqrt2);
    const double k = faddeeva_w4(x, y).real();
    const double k0 = faddeeva_w4(0.0, y).real();
    return amplitude * k / k0;
}

double voigt_fwhm(double sigma_g, double gamma_l) {
    const double fl = 2.0 * gamma_l;
    const double fg = 2.3548200450309493 * sigma_g;
    return 0.5346 * fl + std::sqrt(0.2166 * fl * fl + fg * fg);
}

} // namespace qspec::survey
