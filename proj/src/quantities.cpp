#include "nsreg/quantities.hpp"

#include <cmath>

namespace nsreg {

namespace {

Estimate scaled(const Estimate& e, double factor, bool* clamped) {
    Estimate out;
    out.value = e.value * factor;
    out.stderr_ = e.stderr_ * factor;
    if (out.value < 0) {
        // integrands are nonnegative; only MC noise can dip below zero
        if (out.value < -3.0 * out.stderr_ && clamped) *clamped = true;
        out.value = 0;
    }
    return out;
}

} // namespace

QuantityReport compute_quantities(const VectorField& u, const ScalarField* p,
                                  const VectorField* f, std::optional<double> h_mean,
                                  const Ball& b, const QuadratureConfig& cfg) {
    const int dim = u.dim;
    if (!b.inside(u.domain)) throw domain_error("compute_quantities: ball exits the field domain");
    if (p && !h_mean)
        throw config_error("compute_quantities: pressure given without h_mean; D subtracts the "
                           "harmonic-remainder mean, not the raw pressure mean");

    std::vector<Vec> singular = u.singular_points;
    if (p) singular.insert(singular.end(), p->singular_points.begin(), p->singular_points.end());
    if (f) singular.insert(singular.end(), f->singular_points.begin(), f->singular_points.end());

    // component layout: 0 |u|^2, 1 |grad u|^2, 2 |u|^3, [3 |p-hm|^{3/2}], [last |f|^2]
    int n_comp = 3;
    const int iD = p ? n_comp++ : -1;
    const int iF = f ? n_comp++ : -1;
    const double hm = h_mean.value_or(0.0);

    MultiIntegrand g = [&, iD, iF, hm, dim](const Vec& y, double* out) {
        const Vec uv = u.eval(y);
        const double u2 = uv.norm2();
        out[0] = u2;
        out[1] = u.grad ? u.grad(y).frobenius2() : u.gradient_at(y).frobenius2();
        out[2] = u2 * std::sqrt(u2);
        if (iD >= 0) {
            const double d = std::fabs(p->eval(y) - hm);
            out[iD] = d * std::sqrt(d);
        }
        if (iF >= 0) out[iF] = f->eval(y).norm2();
    };

    const auto est = integrate_ball_multi(g, n_comp, b, cfg, singular);

    QuantityReport rep;
    rep.center = b.center;
    rep.radius = b.radius;
    rep.h_mean_used = h_mean;
    const double r = b.radius;
    rep.A = scaled(est.comp[0], std::pow(r, -(dim - 2)), &rep.clamped);
    rep.E = scaled(est.comp[1], std::pow(r, -(dim - 4)), &rep.clamped);
    rep.C = scaled(est.comp[2], std::pow(r, -(dim - 3)), &rep.clamped);
    if (iD >= 0) rep.D = scaled(est.comp[iD], std::pow(r, -(dim - 3)), &rep.clamped);
    if (iF >= 0) rep.F = scaled(est.comp[iF], std::pow(r, -(dim - 6)), &rep.clamped);
    return rep;
}

QuantityReport compute_quantities(const FieldTriple& t, std::optional<double> h_mean,
                                  const Ball& b, const QuadratureConfig& cfg) {
    return compute_quantities(t.u, t.p ? &*t.p : nullptr, t.f ? &*t.f : nullptr, h_mean, b, cfg);
}

ExponentFit fit_power_law(const std::vector<double>& radii, const std::vector<Estimate>& values) {
    ExponentFit fit;
    std::vector<double> lx, ly;
    for (size_t i = 0; i < radii.size() && i < values.size(); ++i) {
        const double v = values[i].value;
        if (!(v > 0)) continue;
        if (values[i].stderr_ >= 0.1 * v) continue; // untrusted radius
        lx.push_back(std::log(radii[i]));
        ly.push_back(std::log(v));
    }
    fit.points_used = static_cast<int>(lx.size());
    if (fit.points_used < 2) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double n = static_cast<double>(lx.size());
    const double denom = n * sxx - sx * sx;
    if (std::fabs(denom) < 1e-30) {
        fit.points_used = 0;
        return fit;
    }
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

SweepResult radius_sweep(const FieldTriple& t, const Vec& center, double r_max, int levels,
                         const QuadratureConfig& cfg, const HMeanProvider& h_means) {
    if (levels < 2) throw config_error("radius_sweep: need at least 2 ladder levels");
    if (!(r_max > 0)) throw config_error("radius_sweep: r_max must be positive");

    SweepResult sweep;
    for (int j = 0; j <= levels; ++j) sweep.radii.push_back(r_max * std::pow(2.0, -j));

    const bool with_p = t.p.has_value() && h_means != nullptr;
    for (double r : sweep.radii) {
        std::optional<double> hm;
        if (with_p) hm = h_means(center, r);
        sweep.reports.push_back(compute_quantities(t.u, with_p ? &*t.p : nullptr,
                                                   t.f ? &*t.f : nullptr, hm, Ball(center, r), cfg));
    }

    auto collect = [&](auto member) {
        std::vector<Estimate> vals;
        for (const auto& rep : sweep.reports) {
            const auto& o = rep.*member;
            vals.push_back(o ? *o : Estimate{0.0, 0.0});
        }
        return vals;
    };
    sweep.fit_A = fit_power_law(sweep.radii, collect(&QuantityReport::A));
    sweep.fit_E = fit_power_law(sweep.radii, collect(&QuantityReport::E));
    sweep.fit_C = fit_power_law(sweep.radii, collect(&QuantityReport::C));
    sweep.fit_D = fit_power_law(sweep.radii, collect(&QuantityReport::D));
    sweep.fit_F = fit_power_law(sweep.radii, collect(&QuantityReport::F));

    std::vector<Estimate> ae;
    for (const auto& rep : sweep.reports) {
        Estimate e;
        if (rep.A) {
            e.value += rep.A->value;
            e.stderr_ = std::hypot(e.stderr_, rep.A->stderr_);
        }
        if (rep.E) {
            e.value += rep.E->value;
            e.stderr_ = std::hypot(e.stderr_, rep.E->stderr_);
        }
        ae.push_back(e);
    }
    sweep.fit_AE = fit_power_law(sweep.radii, ae);
    return sweep;
}

MassSweep grad_l32_sweep(const VectorField& u, const Vec& center, double r_max, int levels,
                         const QuadratureConfig& cfg) {
    MassSweep ms;
    for (int j = 0; j <= levels; ++j) ms.radii.push_back(r_max * std::pow(2.0, -j));
    MultiIntegrand g = [&u](const Vec& y, double* out) {
        const double f2 = u.grad ? u.grad(y).frobenius2() : u.gradient_at(y).frobenius2();
        out[0] = std::pow(f2, 0.75); // |grad u|^{3/2}
    };
    for (double r : ms.radii)
        ms.mass.push_back(integrate_ball_multi(g, 1, Ball(center, r), cfg, u.singular_points).comp[0]);
    ms.fit = fit_power_law(ms.radii, ms.mass);
    return ms;
}

} // namespace nsreg
