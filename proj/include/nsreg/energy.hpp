#pragma once

// Both sides of the generalized local energy inequality
//   2 int |grad u|^2 psi  <=  int |u|^2 lap psi + (|u|^2 + 2(p-[h])) u . grad psi
//                              + 2 f . u psi
// for the two test-function families (the plateau bump psi1 and the inverse
// quartic psi2), plus the Sobolev inequality check that makes C(r) finite.

#include <functional>
#include <optional>
#include <vector>

#include "nsreg/bump.hpp"
#include "nsreg/generators.hpp"
#include "nsreg/quadrature.hpp"

namespace nsreg {

/// Compactly supported smooth test function with closed-form derivatives.
struct TestFunction {
    Ball support;
    ScalarFn eval;
    VecFn grad;
    ScalarFn laplacian;
    std::string label;
};

/// psi1: 1 on B(x1, rho/2), supported in B(x1, rho), |grad| <= N/rho.
struct TestFunctionPsi1 {
    Vec center;
    double rho = 1.0;
    RadialBumpField bump;
    double grad_bound = 0;  // measured N in |grad psi1| <= N / rho
    double hess_bound = 0;  // measured N in |grad^2 psi1| <= N / rho^2

    TestFunctionPsi1(const Vec& c, double scale) : center(c), rho(scale) {
        if (!(scale > 0)) throw config_error("TestFunctionPsi1: scale must be positive");
        bump.center = c;
        bump.scale = scale;
        bump.profile.plateau = 0.5;
        bump.profile.measure_bounds(grad_bound, hess_bound);
    }
    double eval(const Vec& x) const { return bump.value(x); }
    Vec grad(const Vec& x) const { return bump.gradient(x); }
    double laplacian(const Vec& x) const { return bump.laplacian(x); }
    TestFunction as_test_function() const;
};

/// psi2(x) = (r^2 + |x-x1|^2)^-2 with lap psi2 = -24 r^2 (r^2 + |x-x1|^2)^-4 < 0.
struct TestFunctionPsi2 {
    Vec center;
    double r = 1.0;

    TestFunctionPsi2(const Vec& c, double scale) : center(c), r(scale) {
        if (!(scale > 0)) throw config_error("TestFunctionPsi2: scale must be positive");
    }
    double eval(const Vec& x) const {
        const double q = r * r + (x - center).norm2();
        return 1.0 / (q * q);
    }
    Vec grad(const Vec& x) const {
        const Vec d = x - center;
        const double q = r * r + d.norm2();
        return d * (-4.0 / (q * q * q));
    }
    double laplacian(const Vec& x) const {
        const double q = r * r + (x - center).norm2();
        return -24.0 * r * r / (q * q * q * q);
    }
    /// Lower bound constant: lap psi2 <= -c r^-6 on B(center, rho).
    double neg_laplacian_bound(double rho) const {
        const double q = r * r / (r * r + rho * rho);
        return 24.0 * q * q * q * q;
    }
};

/// Closed form of lap psi2 (free-function flavor of the same formula).
double psi2_laplacian(const Vec& x, const Vec& x1, double r);

/// psi = psi1 * psi2, the choice driving the A(theta rho)+E(theta rho) decay lemma.
TestFunction product_test_function(const TestFunctionPsi1& p1, const TestFunctionPsi2& p2);

struct EnergyResidual {
    double lhs = 0;     // 2 int |grad u|^2 psi
    double rhs = 0;
    double residual = 0; // (rhs - lhs) / max(|lhs|, floor)
    double lhs_stderr = 0, rhs_stderr = 0;
};

/// p may be null (pressure term dropped; h_mean must then be 0).
EnergyResidual energy_residual(const VectorField& u, const ScalarField* p, const VectorField* f,
                               const TestFunction& psi, double h_mean,
                               const QuadratureConfig& cfg);

struct SobolevCheck {
    double lhs = 0;         // int |u|^3
    double rhs_bracket = 0; // (int |grad u|^2)^{3/2} + r^-3 (int |u|^2)^{3/2}
    double ratio = 0;
};

SobolevCheck sobolev_check(const VectorField& u, const Ball& b, const QuadratureConfig& cfg);

/// Deterministic battery of test functions (psi1 and psi1*psi2 mixes) for the
/// suitability verdict; centers drawn inside `inner`, scales within
/// [scale_min, scale_max].
std::vector<TestFunction> test_function_battery(const Box& inner, int count, double scale_min,
                                                double scale_max, std::uint64_t seed);

/// A triple is accepted as numerically suitable when residual >= -tolerance
/// for the whole battery.
struct SuitabilityVerdict {
    bool suitable = true;
    double worst_residual = 0;
    std::vector<EnergyResidual> entries;
};
SuitabilityVerdict suitability_verdict(const FieldTriple& t, double h_mean,
                                       const std::vector<TestFunction>& battery,
                                       const QuadratureConfig& cfg, double tolerance = 0.05);

} // namespace nsreg
