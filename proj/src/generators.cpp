#include "nsreg/generators.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <sstream>

#include "nsreg/rng.hpp"

namespace nsreg {

namespace {

using C = std::complex<double>;
using KVec = std::array<int, kMaxDim>;
using CVec = std::array<C, kMaxDim>;

// Trigonometric fields as sparse two-sided mode maps (Hermitian by
// construction, so pointwise sums are real).  std::map keeps evaluation
// order deterministic.
using VecModes = std::map<KVec, CVec>;
using ScalarModes = std::map<KVec, C>;

double phase_of(const KVec& k, const Vec& x, int dim) {
    double ph = 0;
    for (int i = 0; i < dim; ++i) ph += k[i] * x[i];
    return ph;
}

double k_norm2(const KVec& k, int dim) {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += static_cast<double>(k[i]) * k[i];
    return s;
}

struct TrigVec {
    int dim;
    VecModes modes;

    Vec eval(const Vec& x) const {
        Vec out(dim);
        for (const auto& [k, c] : modes) {
            const C e = std::polar(1.0, phase_of(k, x, dim));
            for (int i = 0; i < dim; ++i) out[i] += (c[i] * e).real();
        }
        return out;
    }
    Mat grad(const Vec& x) const {
        Mat g(dim);
        for (const auto& [k, c] : modes) {
            const C e = std::polar(1.0, phase_of(k, x, dim));
            for (int i = 0; i < dim; ++i) {
                const C ce = c[i] * e;
                for (int j = 0; j < dim; ++j) g(i, j) += (ce * C(0, k[j])).real();
            }
        }
        return g;
    }
    Vec laplacian(const Vec& x) const {
        Vec out(dim);
        for (const auto& [k, c] : modes) {
            const C e = std::polar(1.0, phase_of(k, x, dim));
            const double k2 = k_norm2(k, dim);
            for (int i = 0; i < dim; ++i) out[i] -= k2 * (c[i] * e).real();
        }
        return out;
    }
};

struct TrigScalar {
    int dim;
    ScalarModes modes;

    double eval(const Vec& x) const {
        double out = 0;
        for (const auto& [k, c] : modes) out += (c * std::polar(1.0, phase_of(k, x, dim))).real();
        return out;
    }
    Vec grad(const Vec& x) const {
        Vec out(dim);
        for (const auto& [k, c] : modes) {
            const C ce = c * std::polar(1.0, phase_of(k, x, dim));
            for (int j = 0; j < dim; ++j) out[j] += (ce * C(0, k[j])).real();
        }
        return out;
    }
    double laplacian(const Vec& x) const {
        double out = 0;
        for (const auto& [k, c] : modes)
            out -= k_norm2(k, dim) * (c * std::polar(1.0, phase_of(k, x, dim))).real();
        return out;
    }
};

VecModes draw_divfree_modes(std::uint64_t seed, int n_modes, int dim, double amplitude) {
    VecModes mm;
    for (int m = 0; m < n_modes; ++m) {
        CounterStream cs(seed, static_cast<std::uint64_t>(m), /*stream=*/0xF1E1Du);
        KVec k{};
        double k2 = 0;
        do {
            for (int i = 0; i < dim; ++i)
                k[i] = static_cast<int>(std::floor(cs.next_double() * 5.0)) - 2;
            k2 = k_norm2(k, dim);
        } while (k2 == 0);
        CVec c{};
        for (int i = 0; i < dim; ++i) {
            double re, im;
            cs.next_gaussian_pair(re, im);
            c[i] = C(re, im) * (amplitude / (1.0 + k2));
        }
        // Leray projection: remove the component along k so k . c = 0.
        C kc(0, 0);
        for (int i = 0; i < dim; ++i) kc += c[i] * static_cast<double>(k[i]);
        for (int i = 0; i < dim; ++i) c[i] -= kc * (static_cast<double>(k[i]) / k2);

        KVec kneg{};
        for (int i = 0; i < dim; ++i) kneg[i] = -k[i];
        CVec cneg{};
        for (int i = 0; i < dim; ++i) cneg[i] = std::conj(c[i]);
        auto& slot = mm[k];
        auto& nslot = mm[kneg];
        for (int i = 0; i < dim; ++i) {
            slot[i] += c[i];
            nslot[i] += cneg[i];
        }
    }
    return mm;
}

VectorField wrap_trig_vec(TrigVec tv, int dim) {
    VectorField u;
    u.dim = dim;
    u.domain = Box::centered_cube(dim, M_PI);
    u.divergence_free_hint = true;
    auto sp = std::make_shared<const TrigVec>(std::move(tv));
    u.eval = [sp](const Vec& x) { return sp->eval(x); };
    u.grad = [sp](const Vec& x) { return sp->grad(x); };
    u.laplacian = [sp](const Vec& x) { return sp->laplacian(x); };
    return u;
}

ScalarField wrap_trig_scalar(TrigScalar ts, int dim) {
    ScalarField p;
    p.dim = dim;
    p.domain = Box::centered_cube(dim, M_PI);
    auto sp = std::make_shared<const TrigScalar>(std::move(ts));
    p.eval = [sp](const Vec& x) { return sp->eval(x); };
    p.grad = [sp](const Vec& x) { return sp->grad(x); };
    p.laplacian = [sp](const Vec& x) { return sp->laplacian(x); };
    return p;
}

} // namespace

std::pair<VectorField, ScalarField> make_constant(const Vec& value, double half_width) {
    const int dim = value.dim;
    VectorField u;
    u.dim = dim;
    u.domain = Box::centered_cube(dim, half_width);
    u.divergence_free_hint = true;
    u.eval = [value](const Vec&) { return value; };
    u.grad = [dim](const Vec&) { return Mat(dim); };
    u.laplacian = [dim](const Vec&) { return Vec::zero(dim); };

    ScalarField p;
    p.dim = dim;
    p.domain = u.domain;
    p.eval = [](const Vec&) { return 0.0; };
    p.grad = [dim](const Vec&) { return Vec::zero(dim); };
    p.laplacian = [](const Vec&) { return 0.0; };
    return {u, p};
}

std::pair<VectorField, ScalarField> make_rotation(double a, int dim, double half_width) {
    VectorField u;
    u.dim = dim;
    u.domain = Box::centered_cube(dim, half_width);
    u.divergence_free_hint = true;
    u.eval = [a, dim](const Vec& x) {
        Vec v(dim);
        v[0] = a * x[1];
        v[1] = -a * x[0];
        return v;
    };
    u.grad = [a, dim](const Vec&) {
        Mat g(dim);
        g(0, 1) = a;
        g(1, 0) = -a;
        return g;
    };
    u.laplacian = [dim](const Vec&) { return Vec::zero(dim); };

    ScalarField p;
    p.dim = dim;
    p.domain = u.domain;
    p.eval = [a](const Vec& x) { return 0.5 * a * a * (x[0] * x[0] + x[1] * x[1]); };
    p.grad = [a, dim](const Vec& x) {
        Vec g(dim);
        g[0] = a * a * x[0];
        g[1] = a * a * x[1];
        return g;
    };
    p.laplacian = [a](const Vec&) { return 2.0 * a * a; };
    return {u, p};
}

std::pair<VectorField, ScalarField> make_taylor_green6(int k, int dim) {
    if (k < 1) throw config_error("make_taylor_green6: wavenumber k must be >= 1");
    const double kk = static_cast<double>(k);
    VectorField u;
    u.dim = dim;
    u.domain = Box::centered_cube(dim, M_PI);
    u.divergence_free_hint = true;
    u.eval = [kk, dim](const Vec& x) {
        Vec v(dim);
        v[0] = std::sin(kk * x[0]) * std::cos(kk * x[1]);
        v[1] = -std::cos(kk * x[0]) * std::sin(kk * x[1]);
        return v;
    };
    u.grad = [kk, dim](const Vec& x) {
        Mat g(dim);
        const double s1 = std::sin(kk * x[0]), c1 = std::cos(kk * x[0]);
        const double s2 = std::sin(kk * x[1]), c2 = std::cos(kk * x[1]);
        g(0, 0) = kk * c1 * c2;
        g(0, 1) = -kk * s1 * s2;
        g(1, 0) = kk * s1 * s2;
        g(1, 1) = -kk * c1 * c2;
        return g;
    };
    u.laplacian = [kk, dim](const Vec& x) {
        Vec v(dim);
        v[0] = -2.0 * kk * kk * std::sin(kk * x[0]) * std::cos(kk * x[1]);
        v[1] = 2.0 * kk * kk * std::cos(kk * x[0]) * std::sin(kk * x[1]);
        return v;
    };

    ScalarField p;
    p.dim = dim;
    p.domain = u.domain;
    p.eval = [kk](const Vec& x) {
        return -0.25 * (std::cos(2 * kk * x[0]) + std::cos(2 * kk * x[1]));
    };
    p.grad = [kk, dim](const Vec& x) {
        Vec g(dim);
        g[0] = 0.5 * kk * std::sin(2 * kk * x[0]);
        g[1] = 0.5 * kk * std::sin(2 * kk * x[1]);
        return g;
    };
    p.laplacian = [kk](const Vec& x) {
        return kk * kk * (std::cos(2 * kk * x[0]) + std::cos(2 * kk * x[1]));
    };
    return {u, p};
}

VectorField taylor_green6_forcing(int k, int dim) {
    auto [u, p] = make_taylor_green6(k, dim);
    const double kk = static_cast<double>(k);
    VectorField f;
    f.dim = dim;
    f.domain = u.domain;
    VecFn ueval = u.eval;
    VecFn pgrad = p.grad;
    // f = u.grad u - lap u + grad p = 2 k^2 u + 2 grad p for this pair.
    f.eval = [ueval, pgrad, kk](const Vec& x) {
        Vec v = 2.0 * kk * kk * ueval(x);
        return v + 2.0 * pgrad(x);
    };
    return f;
}

Mat antisymmetric_pair(double m12, int dim) {
    Mat M(dim);
    M(0, 1) = m12;
    M(1, 0) = -m12;
    return M;
}

VectorField make_singular_rotation(const Mat& M, double half_width) {
    const int dim = M.dim;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            if (M(i, j) != -M(j, i))
                throw config_error("make_singular_rotation: M must be exactly antisymmetric");

    VectorField u;
    u.dim = dim;
    u.domain = Box::centered_cube(dim, half_width);
    u.singular_points = {Vec::zero(dim)};
    u.divergence_free_hint = true;
    u.eval = [M, dim](const Vec& x) {
        const double r2 = x.norm2();
        Vec v = M.apply(x);
        return v / r2;
    };
    u.grad = [M, dim](const Vec& x) {
        const double r2 = x.norm2();
        const Vec mx = M.apply(x);
        Mat g(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                g(i, j) = M(i, j) / r2 - 2.0 * mx[i] * x[j] / (r2 * r2);
        return g;
    };
    u.laplacian = [M, dim](const Vec& x) {
        const double r2 = x.norm2();
        Vec v = M.apply(x);
        return v * (-2.0 * (dim - 2) / (r2 * r2));
    };
    return u;
}

VectorField make_random_divfree(std::uint64_t seed, int modes, int dim, double amplitude) {
    if (modes < 0) throw config_error("make_random_divfree: modes must be >= 0");
    TrigVec tv{dim, draw_divfree_modes(seed, modes, dim, amplitude)};
    VectorField u = wrap_trig_vec(std::move(tv), dim);
    return u;
}

FieldTriple make_random_triple(std::uint64_t seed, int modes, int dim, double amplitude) {
    VecModes um = draw_divfree_modes(seed, modes, dim, amplitude);

    // w = (u.grad)u in modes: w_i(K) = sum_{k1+k2=K} i (u(k1).k2) u_i(k2).
    VecModes wm;
    for (const auto& [k1, c1] : um) {
        for (const auto& [k2, c2] : um) {
            C dot(0, 0);
            for (int i = 0; i < dim; ++i) dot += c1[i] * static_cast<double>(k2[i]);
            const C fac = C(0, 1) * dot;
            KVec K{};
            for (int i = 0; i < dim; ++i) K[i] = k1[i] + k2[i];
            auto& slot = wm[K];
            for (int i = 0; i < dim; ++i) slot[i] += fac * c2[i];
        }
    }

    // lap p = -div w  =>  p(K) = i K.w(K) / |K|^2, zero-mean gauge.
    ScalarModes pm;
    for (const auto& [K, wc] : wm) {
        const double K2 = k_norm2(K, dim);
        if (K2 == 0) continue;
        C kd(0, 0);
        for (int i = 0; i < dim; ++i) kd += wc[i] * static_cast<double>(K[i]);
        pm[K] = C(0, 1) * kd / K2;
    }

    // f = w - lap u + grad p in modes.
    VecModes fm = wm;
    for (const auto& [k, c] : um) {
        const double k2 = k_norm2(k, dim);
        auto& slot = fm[k];
        for (int i = 0; i < dim; ++i) slot[i] += k2 * c[i];
    }
    for (const auto& [K, pc] : pm) {
        auto& slot = fm[K];
        for (int i = 0; i < dim; ++i) slot[i] += C(0, static_cast<double>(K[i])) * pc;
    }

    FieldTriple t;
    t.u = wrap_trig_vec(TrigVec{dim, std::move(um)}, dim);
    t.p = wrap_trig_scalar(TrigScalar{dim, std::move(pm)}, dim);
    VectorField f = wrap_trig_vec(TrigVec{dim, std::move(fm)}, dim);
    f.divergence_free_hint = false;
    t.f = f;
    t.name = "random_divfree(seed=" + std::to_string(seed) + ",modes=" + std::to_string(modes) + ")";
    return t;
}

FieldSpec parse_field_spec(const std::string& text) {
    FieldSpec spec;
    const auto colon = text.find(':');
    spec.kind = text.substr(0, colon);
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw config_error("field spec: expected key=value, got '" + item + "'");
            try {
                spec.params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw config_error("field spec: bad numeric value in '" + item + "'");
            }
        }
    }
    if (spec.kind.empty()) throw config_error("field spec: empty kind");
    return spec;
}

namespace {

double param(const FieldSpec& s, const std::string& key, double dflt) {
    auto it = s.params.find(key);
    return it == s.params.end() ? dflt : it->second;
}

int iparam(const FieldSpec& s, const std::string& key, int dflt) {
    return static_cast<int>(std::llround(param(s, key, dflt)));
}

void check_keys(const FieldSpec& s, std::initializer_list<const char*> known) {
    for (const auto& [k, v] : s.params) {
        bool ok = false;
        for (const char* kk : known)
            if (k == kk) ok = true;
        if (!ok) throw config_error("field spec '" + s.kind + "': unknown parameter '" + k + "'");
    }
}

} // namespace

FieldTriple instantiate(const FieldSpec& spec) {
    FieldTriple t;
    t.name = spec.kind;
    const int dim = iparam(spec, "dim", 6);
    if (dim < 3 || dim > kMaxDim) throw config_error("field spec: dim must be in [3, 6]");

    if (spec.kind == "constant") {
        check_keys(spec, {"dim", "c1", "c2", "c3", "c4", "c5", "c6"});
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v[i] = param(spec, "c" + std::to_string(i + 1), 0.0);
        auto [u, p] = make_constant(v);
        t.u = u;
        t.p = p;
        VectorField f;
        f.dim = dim;
        f.domain = u.domain;
        f.eval = [dim](const Vec&) { return Vec::zero(dim); };
        t.f = f;
    } else if (spec.kind == "rotation") {
        check_keys(spec, {"dim", "a"});
        const double a = param(spec, "a", 1.0);
        auto [u, p] = make_rotation(a, dim);
        t.u = u;
        t.p = p;
        VectorField f;
        f.dim = dim;
        f.domain = u.domain;
        f.eval = [dim](const Vec&) { return Vec::zero(dim); }; // grad p cancels the convection
        t.f = f;
    } else if (spec.kind == "taylor_green6") {
        check_keys(spec, {"dim", "k"});
        const int k = iparam(spec, "k", 1);
        auto [u, p] = make_taylor_green6(k, dim);
        t.u = u;
        t.p = p;
        t.f = taylor_green6_forcing(k, dim);
    } else if (spec.kind == "singular_rotation") {
        check_keys(spec, {"dim", "m"});
        const double m = param(spec, "m", 0.056855);
        t.u = make_singular_rotation(antisymmetric_pair(m, dim));
    } else if (spec.kind == "random_divfree") {
        check_keys(spec, {"dim", "seed", "modes", "amplitude"});
        t = make_random_triple(static_cast<std::uint64_t>(param(spec, "seed", 1.0)),
                               iparam(spec, "modes", 8), dim, param(spec, "amplitude", 1.0));
        t.name = spec.kind;
    } else {
        throw config_error("field spec: unknown kind '" + spec.kind + "'");
    }
    return t;
}

std::string field_spec_documentation() {
    return "field spec syntax: kind:key=value,key=value\n"
           "\n"
           "kinds:\n"
           "  constant          params: c1..c6 (component values, default 0), dim\n"
           "                    u constant, p = 0, f = 0\n"
           "  rotation          params: a (amplitude, default 1), dim\n"
           "                    u = a(x2, -x1, 0, ...), p = a^2(x1^2+x2^2)/2, f = 0\n"
           "  taylor_green6     params: k (wavenumber >= 1, default 1), dim\n"
           "                    u = (sin(kx1)cos(kx2), -cos(kx1)sin(kx2), 0, ...),\n"
           "                    p = -(cos(2kx1)+cos(2kx2))/4, f = 2k^2 u + 2 grad p\n"
           "  singular_rotation params: m (M_12 entry, default 0.056855), dim\n"
           "                    u = Mx/|x|^2, singular at 0, no pressure/forcing\n"
           "  random_divfree    params: seed (default 1), modes (default 8),\n"
           "                    amplitude (default 1), dim\n"
           "                    Leray-projected random Fourier sum; p solves the\n"
           "                    torus Poisson problem for the convection, f closes\n"
           "                    the steady momentum balance exactly\n";
}

} // namespace nsreg
