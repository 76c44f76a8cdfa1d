#include "nsreg/energy.hpp"

#include <cmath>

#include "nsreg/rng.hpp"

namespace nsreg {

double psi2_laplacian(const Vec& x, const Vec& x1, double r) {
    const double q = r * r + (x - x1).norm2();
    return -24.0 * r * r / (q * q * q * q);
}

TestFunction TestFunctionPsi1::as_test_function() const {
    TestFunction tf;
    tf.support = Ball(center, rho);
    const TestFunctionPsi1 self = *this;
    tf.eval = [self](const Vec& x) { return self.eval(x); };
    tf.grad = [self](const Vec& x) { return self.grad(x); };
    tf.laplacian = [self](const Vec& x) { return self.laplacian(x); };
    tf.label = "psi1(rho=" + std::to_string(rho) + ")";
    return tf;
}

TestFunction product_test_function(const TestFunctionPsi1& p1, const TestFunctionPsi2& p2) {
    TestFunction tf;
    tf.support = Ball(p1.center, p1.rho);
    const TestFunctionPsi1 a = p1;
    const TestFunctionPsi2 b = p2;
    tf.eval = [a, b](const Vec& x) { return a.eval(x) * b.eval(x); };
    tf.grad = [a, b](const Vec& x) {
        return a.eval(x) * b.grad(x) + b.eval(x) * a.grad(x);
    };
    tf.laplacian = [a, b](const Vec& x) {
        return a.eval(x) * b.laplacian(x) + 2.0 * a.grad(x).dot(b.grad(x)) +
               b.eval(x) * a.laplacian(x);
    };
    tf.label = "psi1*psi2(rho=" + std::to_string(a.rho) + ",r=" + std::to_string(b.r) + ")";
    return tf;
}

EnergyResidual energy_residual(const VectorField& u, const ScalarField* p, const VectorField* f,
                               const TestFunction& psi, double h_mean,
                               const QuadratureConfig& cfg) {
    if (!psi.support.inside(u.domain))
        throw domain_error("energy_residual: test-function support exits the field domain");
    if (!p && h_mean != 0.0)
        throw config_error("energy_residual: h_mean without a pressure field");

    std::vector<Vec> singular = u.singular_points;
    if (p) singular.insert(singular.end(), p->singular_points.begin(), p->singular_points.end());
    if (f) singular.insert(singular.end(), f->singular_points.begin(), f->singular_points.end());

    // components: 0 lhs integrand, 1 rhs integrand (shared samples cancel noise
    // common to both sides)
    MultiIntegrand g = [&](const Vec& y, double* out) {
        const double ps = psi.eval(y);
        const Vec gp = psi.grad(y);
        const double lp = psi.laplacian(y);
        const Vec uv = u.eval(y);
        const double u2 = uv.norm2();
        const Mat gu = u.grad ? u.grad(y) : u.gradient_at(y);

        out[0] = 2.0 * gu.frobenius2() * ps;
        double rhs = u2 * lp;
        double pval = p ? (p->eval(y) - h_mean) : 0.0;
        rhs += (u2 + 2.0 * pval) * uv.dot(gp);
        if (f) rhs += 2.0 * f->eval(y).dot(uv) * ps; // identity carries the factor 2
        out[1] = rhs;
    };

    const auto est = integrate_ball_multi(g, 2, psi.support, cfg, singular);
    EnergyResidual res;
    res.lhs = est.comp[0].value;
    res.rhs = est.comp[1].value;
    res.lhs_stderr = est.comp[0].stderr_;
    res.rhs_stderr = est.comp[1].stderr_;
    const double floor = 1e-12;
    res.residual = (res.rhs - res.lhs) / std::max(std::fabs(res.lhs), floor);
    return res;
}

SobolevCheck sobolev_check(const VectorField& u, const Ball& b, const QuadratureConfig& cfg) {
    MultiIntegrand g = [&u](const Vec& y, double* out) {
        const Vec uv = u.eval(y);
        const double u2 = uv.norm2();
        out[0] = u2 * std::sqrt(u2);
        out[1] = u.grad ? u.grad(y).frobenius2() : u.gradient_at(y).frobenius2();
        out[2] = u2;
    };
    const auto est = integrate_ball_multi(g, 3, b, cfg, u.singular_points);
    SobolevCheck sc;
    sc.lhs = est.comp[0].value;
    const double e = std::max(0.0, est.comp[1].value);
    const double a = std::max(0.0, est.comp[2].value);
    sc.rhs_bracket = std::pow(e, 1.5) + std::pow(a, 1.5) / (b.radius * b.radius * b.radius);
    sc.ratio = sc.rhs_bracket > 0 ? sc.lhs / sc.rhs_bracket : 0.0;
    return sc;
}

std::vector<TestFunction> test_function_battery(const Box& inner, int count, double scale_min,
                                                double scale_max, std::uint64_t seed) {
    std::vector<TestFunction> battery;
    const int dim = inner.dim();
    for (int i = 0; i < count; ++i) {
        CounterStream cs(seed, static_cast<std::uint64_t>(i), /*stream=*/0xBA77u);
        Vec c(dim);
        for (int d = 0; d < dim; ++d)
            c[d] = inner.lo[d] + cs.next_double() * inner.extent(d);
        const double rho = scale_min + cs.next_double() * (scale_max - scale_min);
        TestFunctionPsi1 p1(c, rho);
        if (i % 2 == 0) {
            battery.push_back(p1.as_test_function());
        } else {
            const double theta = (i % 4 == 1) ? 1.0 / 3.0 : 0.25;
            battery.push_back(product_test_function(p1, TestFunctionPsi2(c, theta * rho)));
        }
    }
    return battery;
}

SuitabilityVerdict suitability_verdict(const FieldTriple& t, double h_mean,
                                       const std::vector<TestFunction>& battery,
                                       const QuadratureConfig& cfg, double tolerance) {
    SuitabilityVerdict v;
    for (const TestFunction& psi : battery) {
        v.entries.push_back(energy_residual(t.u, t.p ? &*t.p : nullptr, t.f ? &*t.f : nullptr,
                                            psi, t.p ? h_mean : 0.0, cfg));
        v.worst_residual = std::min(v.worst_residual, v.entries.back().residual);
    }
    v.suitable = v.worst_residual >= -tolerance;
    return v;
}

} // namespace nsreg
