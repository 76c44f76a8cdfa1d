#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <string>

#include "nsreg/errors.hpp"

namespace nsreg {

inline constexpr int kMaxDim = 6;

/// Small dense vector with run-time dimension (3..6 supported, 6 is the default).
struct Vec {
    int dim = kMaxDim;
    std::array<double, kMaxDim> c{};

    Vec() = default;
    explicit Vec(int d) : dim(d) {}
    Vec(std::initializer_list<double> xs) {
        dim = static_cast<int>(xs.size());
        int i = 0;
        for (double x : xs) c[i++] = x;
    }

    static Vec zero(int d) { return Vec(d); }

    double& operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < dim; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < dim; ++i) c[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator/(Vec a, double s) { return a *= 1.0 / s; }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += c[i] * o.c[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    bool finite() const {
        for (int i = 0; i < dim; ++i)
            if (!std::isfinite(c[i])) return false;
        return true;
    }
};

/// dim x dim matrix, row-major; entry (i,j) = d v_i / d x_j for Jacobians.
struct Mat {
    int dim = kMaxDim;
    std::array<double, kMaxDim * kMaxDim> m{};

    Mat() = default;
    explicit Mat(int d) : dim(d) {}

    double& operator()(int i, int j) { return m[static_cast<size_t>(i * kMaxDim + j)]; }
    double operator()(int i, int j) const { return m[static_cast<size_t>(i * kMaxDim + j)]; }

    double trace() const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += (*this)(i, i);
        return s;
    }
    double frobenius2() const {
        double s = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += (*this)(i, j) * (*this)(i, j);
        return s;
    }
    Vec apply(const Vec& x) const {
        Vec y(dim);
        for (int i = 0; i < dim; ++i) {
            double s = 0;
            for (int j = 0; j < dim; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
};

/// Axis-aligned box domain.
struct Box {
    Vec lo, hi;

    static Box centered_cube(int dim, double half_width) {
        Box b;
        b.lo = Vec(dim);
        b.hi = Vec(dim);
        for (int i = 0; i < dim; ++i) {
            b.lo[i] = -half_width;
            b.hi[i] = half_width;
        }
        return b;
    }

    int dim() const { return lo.dim; }

    bool contains(const Vec& x, double margin = 0.0) const {
        for (int i = 0; i < lo.dim; ++i)
            if (x[i] < lo[i] + margin || x[i] > hi[i] - margin) return false;
        return true;
    }
    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double max_extent() const {
        double e = 0;
        for (int i = 0; i < lo.dim; ++i) e = std::max(e, extent(i));
        return e;
    }
    double min_extent() const {
        double e = extent(0);
        for (int i = 1; i < lo.dim; ++i) e = std::min(e, extent(i));
        return e;
    }
    /// Domain of a field rescaled by x -> lambda x (shrinks by 1/lambda).
    Box scaled(double inv_lambda) const {
        Box b = *this;
        for (int i = 0; i < lo.dim; ++i) {
            b.lo[i] = lo[i] * inv_lambda;
            b.hi[i] = hi[i] * inv_lambda;
        }
        return b;
    }
};

/// Ball B(center, radius).
struct Ball {
    Vec center;
    double radius = 1.0;

    Ball() = default;
    Ball(const Vec& c, double r) : center(c), radius(r) {
        if (!(r > 0)) throw config_error("Ball: radius must be positive");
    }
    bool inside(const Box& box, double margin = 0.0) const {
        for (int i = 0; i < center.dim; ++i)
            if (center[i] - radius < box.lo[i] + margin || center[i] + radius > box.hi[i] - margin)
                return false;
        return true;
    }
};

/// Volume of the unit d-ball (pi^3/6 in 6D).
inline double unit_ball_volume(int d) {
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Surface area of the unit sphere S^{d-1} (pi^3 for d = 6).
inline double unit_sphere_area(int d) {
    return d * unit_ball_volume(d);
}

inline std::string format_point(const Vec& x) {
    std::string s = "(";
    for (int i = 0; i < x.dim; ++i) {
        if (i) s += ", ";
        s += std::to_string(x[i]);
    }
    return s + ")";
}

} // namespace nsreg
