#include "nsreg/field.hpp"

#include <cmath>

#include "nsreg/rng.hpp"

namespace nsreg {

double fd_partial(const ScalarFn& f, const Vec& x, int axis, double h) {
    Vec xp = x, xpp = x, xm = x, xmm = x;
    xp[axis] += h;
    xpp[axis] += 2 * h;
    xm[axis] -= h;
    xmm[axis] -= 2 * h;
    return (-f(xpp) + 8 * f(xp) - 8 * f(xm) + f(xmm)) / (12 * h);
}

double fd_second(const ScalarFn& f, const Vec& x, int axis, double h) {
    Vec xp = x, xpp = x, xm = x, xmm = x;
    xp[axis] += h;
    xpp[axis] += 2 * h;
    xm[axis] -= h;
    xmm[axis] -= 2 * h;
    return (-f(xpp) + 16 * f(xp) - 30 * f(x) + 16 * f(xm) - f(xmm)) / (12 * h * h);
}

Vec fd_gradient(const ScalarFn& f, const Vec& x, const Box& domain) {
    Vec g(x.dim);
    for (int a = 0; a < x.dim; ++a) g[a] = fd_partial(f, x, a, kFdStepRel * domain.extent(a));
    return g;
}

double fd_laplacian(const ScalarFn& f, const Vec& x, const Box& domain) {
    double s = 0;
    for (int a = 0; a < x.dim; ++a) s += fd_second(f, x, a, kFdStepRel * domain.extent(a));
    return s;
}

Mat fd_jacobian(const VecFn& f, int dim, const Vec& x, const Box& domain) {
    Mat j(dim);
    for (int a = 0; a < dim; ++a) {
        const double h = kFdStepRel * domain.extent(a);
        Vec xp = x, xpp = x, xm = x, xmm = x;
        xp[a] += h;
        xpp[a] += 2 * h;
        xm[a] -= h;
        xmm[a] -= 2 * h;
        const Vec vp = f(xp), vpp = f(xpp), vm = f(xm), vmm = f(xmm);
        for (int i = 0; i < dim; ++i)
            j(i, a) = (-vpp[i] + 8 * vp[i] - 8 * vm[i] + vmm[i]) / (12 * h);
    }
    return j;
}

Vec fd_laplacian_vec(const VecFn& f, int dim, const Vec& x, const Box& domain) {
    Vec l(dim);
    const Vec v0 = f(x);
    for (int a = 0; a < dim; ++a) {
        const double h = kFdStepRel * domain.extent(a);
        Vec xp = x, xpp = x, xm = x, xmm = x;
        xp[a] += h;
        xpp[a] += 2 * h;
        xm[a] -= h;
        xmm[a] -= 2 * h;
        const Vec vp = f(xp), vpp = f(xpp), vm = f(xm), vmm = f(xmm);
        for (int i = 0; i < dim; ++i)
            l[i] += (-vpp[i] + 16 * vp[i] - 30 * v0[i] + 16 * vm[i] - vmm[i]) / (12 * h * h);
    }
    return l;
}

Mat VectorField::gradient_at(const Vec& x) const {
    require_evaluable(x);
    if (grad) return grad(x);
    return fd_jacobian(eval, dim, x, domain);
}

Vec VectorField::laplacian_at(const Vec& x) const {
    require_evaluable(x);
    if (laplacian) return laplacian(x);
    return fd_laplacian_vec(eval, dim, x, domain);
}

Vec ScalarField::gradient_at(const Vec& x) const {
    require_evaluable(x);
    if (grad) return grad(x);
    return fd_gradient(eval, x, domain);
}

double ScalarField::laplacian_at(const Vec& x) const {
    require_evaluable(x);
    if (laplacian) return laplacian(x);
    return fd_laplacian(eval, x, domain);
}

double divergence(const VectorField& v, const Vec& x) {
    return v.gradient_at(x).trace();
}

VectorField rescale_velocity(const VectorField& u, double lambda) {
    VectorField r = u;
    const double l = lambda;
    r.domain = u.domain.scaled(1.0 / l);
    r.singular_points.clear();
    for (const Vec& s : u.singular_points) r.singular_points.push_back(s / l);
    VecFn base_eval = u.eval;
    r.eval = [base_eval, l](const Vec& x) { return l * base_eval(l * x); };
    if (u.grad) {
        MatFn base_grad = u.grad;
        r.grad = [base_grad, l](const Vec& x) {
            Mat g = base_grad(l * x);
            for (auto& e : g.m) e *= l * l;
            return g;
        };
    }
    if (u.laplacian) {
        VecFn base_lap = u.laplacian;
        r.laplacian = [base_lap, l](const Vec& x) { return (l * l * l) * base_lap(l * x); };
    }
    return r;
}

ScalarField rescale_pressure(const ScalarField& p, double lambda) {
    ScalarField r = p;
    const double l = lambda;
    r.domain = p.domain.scaled(1.0 / l);
    r.singular_points.clear();
    for (const Vec& s : p.singular_points) r.singular_points.push_back(s / l);
    ScalarFn base_eval = p.eval;
    r.eval = [base_eval, l](const Vec& x) { return l * l * base_eval(l * x); };
    if (p.grad) {
        VecFn base_grad = p.grad;
        r.grad = [base_grad, l](const Vec& x) { return (l * l * l) * base_grad(l * x); };
    }
    if (p.laplacian) {
        ScalarFn base_lap = p.laplacian;
        r.laplacian = [base_lap, l](const Vec& x) { return l * l * l * l * base_lap(l * x); };
    }
    return r;
}

VectorField rescale_forcing(const VectorField& f, double lambda) {
    VectorField r = f;
    const double l = lambda;
    r.domain = f.domain.scaled(1.0 / l);
    r.singular_points.clear();
    for (const Vec& s : f.singular_points) r.singular_points.push_back(s / l);
    VecFn base_eval = f.eval;
    r.eval = [base_eval, l](const Vec& x) { return (l * l * l) * base_eval(l * x); };
    if (f.grad) {
        MatFn base_grad = f.grad;
        r.grad = [base_grad, l](const Vec& x) {
            Mat g = base_grad(l * x);
            const double s = l * l * l * l;
            for (auto& e : g.m) e *= s;
            return g;
        };
    }
    if (f.laplacian) {
        VecFn base_lap = f.laplacian;
        r.laplacian = [base_lap, l](const Vec& x) { return (l * l * l * l * l) * base_lap(l * x); };
    }
    return r;
}

std::tuple<VectorField, ScalarField, VectorField>
rescale(const VectorField& u, const ScalarField& p, const VectorField& f, const ScaleTransform& t) {
    return {rescale_velocity(u, t.lambda), rescale_pressure(p, t.lambda), rescale_forcing(f, t.lambda)};
}

std::vector<Vec> probe_points(const Box& box, int n, std::uint64_t seed,
                              const std::vector<Vec>& avoid, double margin_rel) {
    std::vector<Vec> pts;
    pts.reserve(static_cast<size_t>(n));
    const int dim = box.dim();
    const double clearance = 1e-3 * box.max_extent();
    std::uint64_t idx = 0;
    while (static_cast<int>(pts.size()) < n) {
        CounterStream cs(seed, idx++, /*stream=*/0x9D0BEu);
        Vec x(dim);
        for (int i = 0; i < dim; ++i) {
            const double m = margin_rel * box.extent(i);
            x[i] = box.lo[i] + m + cs.next_double() * (box.extent(i) - 2 * m);
        }
        bool ok = true;
        for (const Vec& s : avoid)
            if ((x - s).norm() < clearance) ok = false;
        if (ok) pts.push_back(x);
        if (idx > 100ull * static_cast<std::uint64_t>(n) + 1000) break; // pathological avoid-set
    }
    return pts;
}

double max_divergence_probe(const VectorField& u, int n_probes, std::uint64_t seed) {
    double worst = 0;
    for (const Vec& x : probe_points(u.domain, n_probes, seed, u.singular_points))
        worst = std::max(worst, std::fabs(divergence(u, x)));
    return worst;
}

VectorField manufacture_forcing(const VectorField& u, const ScalarField& p) {
    const double div_max = max_divergence_probe(u, 100);
    if (div_max > 1e-6)
        throw config_error("manufacture_forcing: u is not divergence-free (probe max " +
                           std::to_string(div_max) + ")");
    VectorField f;
    f.dim = u.dim;
    f.domain = u.domain;
    f.singular_points = u.singular_points;
    for (const Vec& s : p.singular_points) f.singular_points.push_back(s);
    VectorField uc = u;
    ScalarField pc = p;
    f.eval = [uc, pc](const Vec& x) {
        const Vec uv = uc.eval(x);
        const Mat g = uc.gradient_at(x);
        const Vec lap = uc.laplacian_at(x);
        const Vec gp = pc.gradient_at(x);
        Vec out(uc.dim);
        for (int i = 0; i < uc.dim; ++i) {
            double conv = 0;
            for (int j = 0; j < uc.dim; ++j) conv += uv[j] * g(i, j);
            out[i] = conv - lap[i] + gp[i];
        }
        return out;
    };
    return f;
}

} // namespace nsreg
