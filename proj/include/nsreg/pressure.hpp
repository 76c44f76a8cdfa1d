#pragma once

// Localized pressure decomposition p = p_tilde + h on B(x0, r):
//   lap p_tilde = -D_ij((u_i - [u_i])(u_j - [u_j]) eta) + div(f eta),
// solved spectrally on a periodic box of side 2*pad*r centered at x0, with
// zero-box-mean gauge; h = p - p_tilde is then harmonic on B(x0, 2r/3) and is
// certified numerically through the mean-value property.  An independent
// Newtonian-potential evaluation of p_tilde cross-validates the solver.

#include <cstdint>
#include <optional>

#include "nsreg/bump.hpp"
#include "nsreg/field.hpp"
#include "nsreg/quadrature.hpp"

namespace nsreg {

/// C-infinity cutoff: 1 on closed B(x0, 2r/3), supported in B(x0, r).
struct CutoffEta {
    Vec center;
    double radius = 1.0;
    RadialBumpField bump;

    CutoffEta(const Vec& c, double r) : center(c), radius(r) {
        if (!(r > 0)) throw config_error("CutoffEta: radius must be positive");
        bump.center = c;
        bump.scale = r;
        bump.profile.plateau = 2.0 / 3.0;
    }
    double eval(const Vec& x) const { return bump.value(x); }
    Vec grad(const Vec& x) const { return bump.gradient(x); }
    double laplacian(const Vec& x) const { return bump.laplacian(x); }
};

struct SolverMeta {
    int grid_n = 0;
    double box_side = 0;
    double pad = 0;
    int active_pairs = 0;     // nonzero G_ij pairs actually transformed
    int active_f_comps = 0;
    std::uint64_t bytes = 0;  // peak grid storage
};

struct DecompositionConfig {
    int grid_n = 16;     // power of two
    double pad = 2.0;    // periodic box side = 2 * pad * r
    std::uint64_t memory_budget = 2ull << 30; // bytes
    QuadratureConfig mean_quad; // rule for the [u_i]_{x0,r} means

    DecompositionConfig() {
        mean_quad.method = QuadMethod::tensor_spherical;
    }
};

/// Spectral solution of the cutoff-localized Poisson problem; f may be null.
/// Returned field interpolates the periodic grid (4-point cubic per axis).
std::pair<ScalarField, SolverMeta> solve_p_tilde(const VectorField& u, const VectorField* f,
                                                 const CutoffEta& eta,
                                                 const DecompositionConfig& cfg);

/// h = p - p_tilde restricted to `region` (evaluation outside throws).
ScalarField harmonic_remainder(const ScalarField& p, const ScalarField& p_tilde,
                               const Ball& region);

/// |h(x) - sphere_average(h, x, s)| / max(osc, 1e-12); B(x, s) must lie in region.
double mean_value_check(const ScalarField& h, const Ball& region, const Vec& x, double s,
                        const QuadratureConfig& cfg, double osc);

/// Oscillation (max - min) over deterministic probes of the region.
double oscillation(const ScalarField& g, const Ball& region, int n_probes = 4096,
                   std::uint64_t seed = 11);

struct PressureDecomposition {
    ScalarField p_tilde;
    ScalarField h;     // grid difference p - p_tilde, interpolated
    Ball region;       // B(x0, 2r/3)
    double h_osc = 0;  // over grid nodes inside region
    SolverMeta meta;

    double h_mean_on(const Ball& b, const QuadratureConfig& cfg) const;
    double mean_value_deviation(const Vec& x, double s, const QuadratureConfig& cfg) const;
};

PressureDecomposition decompose_pressure(const VectorField& u, const ScalarField& p,
                                         const VectorField* f, const CutoffEta& eta,
                                         const DecompositionConfig& cfg);

struct OracleResult {
    double value = 0;
    double stderr_ = 0;
    double rejected_fraction = 0;
    bool accuracy_warning = false;
};

/// Newtonian-potential representation of p_tilde at one point:
///   p~(x) = PV int K_ij(x-y) G_ij(y) dy - (1/6) G_ii(x) - int grad Phi (x-y) . (f eta)(y) dy,
/// Phi(z) = 1/(4 pi^3 |z|^4), K = Hessian of Phi; PV regularized by subtracting
/// G_ij(x) from the integrand inside |x-y| < 0.1 r.
OracleResult newtonian_potential_oracle(const VectorField& u, const VectorField* f,
                                        const CutoffEta& eta, const Vec& x,
                                        const QuadratureConfig& cfg,
                                        const Vec* u_mean_precomputed = nullptr);

} // namespace nsreg
