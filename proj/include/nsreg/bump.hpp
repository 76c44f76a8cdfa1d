#pragma once

// The standard exp-based partition ramp q(s) = a(s)/(a(s)+a(1-s)) with
// a(s) = exp(-1/s) [s>0], and the radial plateau profile built from it.
// q is C-infinity, q(0)=0, q(1)=1, with closed-form first two derivatives.

#include <cmath>

#include "nsreg/vec.hpp"

namespace nsreg {

inline double bump_a(double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; }
inline double bump_a1(double s) { return s > 0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }
inline double bump_a2(double s) {
    return s > 0 ? std::exp(-1.0 / s) * (1.0 - 2.0 * s) / (s * s * s * s) : 0.0;
}

inline double ramp(double s) {
    if (s <= 0) return 0.0;
    if (s >= 1) return 1.0;
    const double w = bump_a(s), v = bump_a(1.0 - s);
    return w / (w + v);
}

inline double ramp_d1(double s) {
    if (s <= 0 || s >= 1) return 0.0;
    const double w = bump_a(s), v = bump_a(1.0 - s);
    const double w1 = bump_a1(s), v1 = -bump_a1(1.0 - s);
    const double T = w + v;
    return (w1 * v - w * v1) / (T * T);
}

inline double ramp_d2(double s) {
    if (s <= 0 || s >= 1) return 0.0;
    const double w = bump_a(s), v = bump_a(1.0 - s);
    const double w1 = bump_a1(s), v1 = -bump_a1(1.0 - s);
    const double w2 = bump_a2(s), v2 = bump_a2(1.0 - s);
    const double T = w + v;
    const double q1 = (w1 * v - w * v1) / (T * T);
    return (w2 * v - w * v2) / (T * T) - 2.0 * q1 * (w1 + v1) / T;
}

/// Radial profile P(t): identically 1 for t <= plateau, ramps to 0 at t = 1.
struct RadialPlateau {
    double plateau = 2.0 / 3.0;

    double value(double t) const {
        if (t <= plateau) return 1.0;
        if (t >= 1.0) return 0.0;
        return ramp((1.0 - t) / (1.0 - plateau));
    }
    double d1(double t) const {
        if (t <= plateau || t >= 1.0) return 0.0;
        return -ramp_d1((1.0 - t) / (1.0 - plateau)) / (1.0 - plateau);
    }
    double d2(double t) const {
        if (t <= plateau || t >= 1.0) return 0.0;
        const double w = 1.0 - plateau;
        return ramp_d2((1.0 - t) / w) / (w * w);
    }

    /// Sup of |P'| and of the second-derivative pieces |P''|, |P'/t| over a fine scan.
    void measure_bounds(double& sup_d1, double& sup_d2) const {
        sup_d1 = 0;
        sup_d2 = 0;
        const int n = 20000;
        for (int i = 1; i < n; ++i) {
            const double t = static_cast<double>(i) / n;
            sup_d1 = std::max(sup_d1, std::fabs(d1(t)));
            sup_d2 = std::max(sup_d2, std::max(std::fabs(d2(t)), std::fabs(d1(t) / t)));
        }
    }
};

/// Radial C-infinity function psi(x) = P(|x-center|/scale) with analytic
/// gradient and Laplacian (dim from the query point).
struct RadialBumpField {
    Vec center;
    double scale = 1.0;
    RadialPlateau profile;

    double value(const Vec& x) const {
        return profile.value((x - center).norm() / scale);
    }
    Vec gradient(const Vec& x) const {
        const Vec d = x - center;
        const double rr = d.norm();
        const double t = rr / scale;
        Vec g(x.dim);
        if (t <= profile.plateau || t >= 1.0 || rr < 1e-300) return g;
        const double p1 = profile.d1(t);
        for (int i = 0; i < x.dim; ++i) g[i] = p1 * d[i] / (rr * scale);
        return g;
    }
    double laplacian(const Vec& x) const {
        const Vec d = x - center;
        const double rr = d.norm();
        const double t = rr / scale;
        if (t <= profile.plateau || t >= 1.0 || rr < 1e-300) return 0.0;
        const int dim = x.dim;
        return (profile.d2(t) + (dim - 1) * profile.d1(t) / t) / (scale * scale);
    }
};

} // namespace nsreg
