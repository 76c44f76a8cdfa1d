#pragma once

// Deterministic-seed Monte Carlo and tensorized spherical quadrature over
// balls and spheres in R^d.  MC sampling is counter-based per (seed, stratum,
// sample index) and reduced block-by-block in a fixed order, so results are
// bit-identical under any worker count.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nsreg/field.hpp"
#include "nsreg/vec.hpp"

namespace nsreg {

enum class QuadMethod { monte_carlo, tensor_spherical };

struct QuadratureConfig {
    QuadMethod method = QuadMethod::monte_carlo;
    std::int64_t samples = 2'000'000; // MC sample budget
    int radial_nodes = 16;            // tensor: Gauss-Legendre nodes in radius
    int angular_nodes = 8;            // tensor: nodes per angle
    std::uint64_t seed = 42;
    bool stratified = false;          // MC: equal-mass radial strata

    void validate() const {
        if (samples < 1) throw config_error("QuadratureConfig: samples must be >= 1");
        if (radial_nodes < 2 || angular_nodes < 2)
            throw config_error("QuadratureConfig: tensor rule needs >= 2 nodes per axis");
    }
    QuadratureConfig with_seed(std::uint64_t s) const {
        QuadratureConfig c = *this;
        c.seed = s;
        return c;
    }
    QuadratureConfig with_samples(std::int64_t n) const {
        QuadratureConfig c = *this;
        c.samples = n;
        return c;
    }
};

struct Estimate {
    double value = 0;
    double stderr_ = 0; // 0 is the tensor-rule sentinel
};

struct MultiEstimate {
    std::vector<Estimate> comp;
    std::int64_t evals = 0;
};

/// Integrand writing n_comp values per point.
using MultiIntegrand = std::function<void(const Vec&, double*)>;

MultiEstimate integrate_ball_multi(const MultiIntegrand& g, int n_comp, const Ball& b,
                                   const QuadratureConfig& cfg,
                                   std::span<const Vec> singular_points = {});

Estimate integrate_ball(const ScalarFn& g, const Ball& b, const QuadratureConfig& cfg,
                        std::span<const Vec> singular_points = {});

Estimate integrate_sphere(const ScalarFn& g, const Vec& center, double radius,
                          const QuadratureConfig& cfg);

double sphere_average(const ScalarFn& g, const Vec& center, double radius,
                      const QuadratureConfig& cfg);

/// [u]_{x0,r}: componentwise ball mean.
Vec mean_value(const VectorField& u, const Ball& b, const QuadratureConfig& cfg,
               Vec* stderr_out = nullptr);
double mean_value(const ScalarField& s, const Ball& b, const QuadratureConfig& cfg,
                  double* stderr_out = nullptr);

} // namespace nsreg
