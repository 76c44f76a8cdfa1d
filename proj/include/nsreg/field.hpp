#pragma once

// Uniform abstraction over velocity/pressure/forcing fields: evaluation,
// analytic or finite-difference derivatives, the natural scaling transform
// u -> lambda u(lambda x), p -> lambda^2 p(lambda x), f -> lambda^3 f(lambda x),
// and manufactured forcing f = u.grad u - lap u + grad p.

#include <functional>
#include <optional>
#include <tuple>
#include <vector>

#include "nsreg/errors.hpp"
#include "nsreg/vec.hpp"

namespace nsreg {

using ScalarFn = std::function<double(const Vec&)>;
using VecFn = std::function<Vec(const Vec&)>;
using MatFn = std::function<Mat(const Vec&)>;

/// Relative finite-difference step (times per-axis domain extent).
inline constexpr double kFdStepRel = 1e-4;

struct VectorField {
    int dim = kMaxDim;
    VecFn eval;
    MatFn grad;      // optional analytic Jacobian, entries (i,j) = d u_i / d x_j
    VecFn laplacian; // optional analytic componentwise Laplacian
    Box domain;
    std::vector<Vec> singular_points;
    bool divergence_free_hint = false;

    bool is_regular_point(const Vec& x, double tol = 1e-12) const {
        for (const Vec& s : singular_points)
            if ((x - s).norm() <= tol) return false;
        return true;
    }
    void require_evaluable(const Vec& x) const {
        if (!domain.contains(x)) throw domain_error("VectorField: point outside domain " + format_point(x));
        if (!is_regular_point(x)) throw domain_error("VectorField: evaluation at singular point " + format_point(x));
    }

    Mat gradient_at(const Vec& x) const;   // analytic if present, else 4th-order FD
    Vec laplacian_at(const Vec& x) const;
    double fd_step(int axis) const { return kFdStepRel * domain.extent(axis); }
};

struct ScalarField {
    int dim = kMaxDim;
    ScalarFn eval;
    VecFn grad;       // optional analytic gradient
    ScalarFn laplacian; // optional analytic Laplacian
    Box domain;
    std::vector<Vec> singular_points;

    bool is_regular_point(const Vec& x, double tol = 1e-12) const {
        for (const Vec& s : singular_points)
            if ((x - s).norm() <= tol) return false;
        return true;
    }
    void require_evaluable(const Vec& x) const {
        if (!domain.contains(x)) throw domain_error("ScalarField: point outside domain " + format_point(x));
        if (!is_regular_point(x)) throw domain_error("ScalarField: evaluation at singular point " + format_point(x));
    }

    Vec gradient_at(const Vec& x) const;
    double laplacian_at(const Vec& x) const;
    double fd_step(int axis) const { return kFdStepRel * domain.extent(axis); }
};

/// The one-parameter symmetry group of the steady system.
struct ScaleTransform {
    double lambda = 1.0;
    explicit ScaleTransform(double l) : lambda(l) {
        if (!(l > 0)) throw config_error("ScaleTransform: lambda must be positive");
    }
};

// 4th-order central finite differences on a raw callable.
double fd_partial(const ScalarFn& f, const Vec& x, int axis, double h);
double fd_second(const ScalarFn& f, const Vec& x, int axis, double h);
Vec fd_gradient(const ScalarFn& f, const Vec& x, const Box& domain);
double fd_laplacian(const ScalarFn& f, const Vec& x, const Box& domain);
Mat fd_jacobian(const VecFn& f, int dim, const Vec& x, const Box& domain);
Vec fd_laplacian_vec(const VecFn& f, int dim, const Vec& x, const Box& domain);

/// div u(x) = sum_i d u_i/d x_i, analytic gradient when available.
double divergence(const VectorField& v, const Vec& x);

/// Natural scaling: returns (u_l, p_l, f_l) with u_l(x) = l u(l x), etc.
std::tuple<VectorField, ScalarField, VectorField>
rescale(const VectorField& u, const ScalarField& p, const VectorField& f, const ScaleTransform& t);

VectorField rescale_velocity(const VectorField& u, double lambda);
ScalarField rescale_pressure(const ScalarField& p, double lambda);
VectorField rescale_forcing(const VectorField& f, double lambda);

/// f_i = u_j u_{i,j} - lap u_i + p_{,i}; (u, p, f) then solves the steady system exactly.
/// Throws config_error when u fails the divergence-free probe (max |div| > 1e-6).
VectorField manufacture_forcing(const VectorField& u, const ScalarField& p);

/// Max |div u| over n deterministic probe points (regular, inside the domain).
double max_divergence_probe(const VectorField& u, int n_probes = 1000, std::uint64_t seed = 7);

/// Deterministic probe points in a box, avoiding listed singular points.
std::vector<Vec> probe_points(const Box& box, int n, std::uint64_t seed,
                              const std::vector<Vec>& avoid = {}, double margin_rel = 0.02);

} // namespace nsreg
