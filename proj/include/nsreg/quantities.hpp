#pragma once

// The five scale-invariant ball quantities and dyadic radius sweeps.
// In 6D (the paper's setting):
//   A = r^-4 int |u|^2,  E = r^-2 int |grad u|^2,  C = r^-3 int |u|^3,
//   D = r^-3 int |p - [h]|^{3/2},  F = int |f|^2.
// For runtime dim d the exponents generalize by scaling degree:
//   A: d-2, E: d-4, C: d-3, D: d-3, F: d-6.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nsreg/generators.hpp"
#include "nsreg/quadrature.hpp"

namespace nsreg {

/// Supplies [h]_{x0,r} (the harmonic-remainder ball mean) for D; owned by
/// pressure_split, injected here so reports stay decomposition-agnostic.
using HMeanProvider = std::function<double(const Vec& center, double radius)>;

struct QuantityReport {
    Vec center;
    double radius = 0;
    std::optional<Estimate> A, E, C, D, F;
    std::optional<double> h_mean_used;
    bool clamped = false; // any entry raised to 0 from below the -3 sigma noise floor
};

struct ExponentFit {
    double slope = std::numeric_limits<double>::quiet_NaN(); // NaN = undefined sentinel
    double intercept = 0;
    int points_used = 0;
    bool defined() const { return points_used >= 2; }
};

struct SweepResult {
    std::vector<double> radii; // strictly decreasing dyadic ladder
    std::vector<QuantityReport> reports;
    ExponentFit fit_A, fit_E, fit_C, fit_D, fit_F;
    ExponentFit fit_AE; // decay of A+E, used by the bootstrap trace
};

/// Compute the quantities present in the inputs; omitting p or f omits D or F.
/// p given without h_mean is a configuration error (D is defined against the
/// harmonic mean, not the raw pressure mean).
QuantityReport compute_quantities(const VectorField& u, const ScalarField* p,
                                  const VectorField* f, std::optional<double> h_mean,
                                  const Ball& b, const QuadratureConfig& cfg);

QuantityReport compute_quantities(const FieldTriple& t, std::optional<double> h_mean,
                                  const Ball& b, const QuadratureConfig& cfg);

/// Dyadic ladder r_j = r_max 2^-j, j = 0..J, with per-quantity log-log fits.
/// h_means supplies D when the triple has pressure (nullptr leaves D absent).
SweepResult radius_sweep(const FieldTriple& t, const Vec& center, double r_max, int levels,
                         const QuadratureConfig& cfg, const HMeanProvider& h_means = nullptr);

/// Least-squares slope of log Q vs log r over radii with stderr/value < 0.1.
ExponentFit fit_power_law(const std::vector<double>& radii, const std::vector<Estimate>& values);

/// Mass sweep of int_{B(r)} |grad u|^{3/2} (the Morrey-lemma quantity).
struct MassSweep {
    std::vector<double> radii;
    std::vector<Estimate> mass;
    ExponentFit fit;
};
MassSweep grad_l32_sweep(const VectorField& u, const Vec& center, double r_max, int levels,
                         const QuadratureConfig& cfg);

} // namespace nsreg
