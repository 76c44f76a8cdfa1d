#include "nsreg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "nsreg/errors.hpp"
#include "nsreg/parallel.hpp"
#include "nsreg/rng.hpp"

namespace nsreg {

namespace {

constexpr std::int64_t kBlock = 65536;
constexpr int kRadialStrata = 64;   // equal-mass strata when cfg.stratified
constexpr int kSingularShells = 26; // dyadic shells around a singular point
constexpr std::int64_t kMinPerStratum = 512;

// ---------------------------------------------------------------------------
// Tensor rule: Gauss-Legendre radius x per-polar-angle Gaussian rules in
// t = cos(phi) x periodic-trapezoid azimuth.  Exact for polynomials; the
// angular weight sin^k dphi becomes (1-t^2)^((k-1)/2) dt, handled by GL with
// a polynomial factor (k odd) or Gauss-Chebyshev-2 (k even).
// ---------------------------------------------------------------------------

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

// Rule for int_{-1}^{1} f(t) (1-t^2)^((k-1)/2) dt.
void angle_rule(int k, int n, std::vector<double>& t, std::vector<double>& w) {
    if (k % 2 == 1) {
        gauss_legendre(n, t, w);
        const int pw = (k - 1) / 2;
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < pw; ++p) w[i] *= 1.0 - t[i] * t[i];
    } else {
        t.resize(n);
        w.resize(n);
        for (int i = 1; i <= n; ++i) {
            const double th = i * M_PI / (n + 1);
            t[i - 1] = std::cos(th);
            double wi = M_PI / (n + 1) * std::sin(th) * std::sin(th);
            for (int p = 0; p < k / 2 - 1; ++p) wi *= 1.0 - t[i - 1] * t[i - 1];
            w[i - 1] = wi;
        }
    }
}

struct DirectionRule {
    std::vector<Vec> dirs;
    std::vector<double> weights; // sums to area(S^{d-1})
};

struct RadialRule {
    std::vector<double> r;       // nodes in (0, 1)
    std::vector<double> weights; // include r^{d-1}; sums to 1/d
};

std::shared_ptr<const DirectionRule> direction_rule(int dim, int na) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const DirectionRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dim, na);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    auto rule = std::make_shared<DirectionRule>();
    const int n_polar = dim - 2;
    std::vector<std::vector<double>> ts(n_polar), ws(n_polar);
    for (int a = 0; a < n_polar; ++a) angle_rule(dim - 2 - a, na, ts[a], ws[a]);

    std::vector<double> az(na), azw(na, 2.0 * M_PI / na);
    for (int i = 0; i < na; ++i) az[i] = 2.0 * M_PI * i / na;

    std::vector<int> idx(n_polar, 0);
    while (true) {
        double w_polar = 1.0;
        Vec n(dim);
        double sp = 1.0;
        for (int a = 0; a < n_polar; ++a) {
            const double t = ts[a][idx[a]];
            w_polar *= ws[a][idx[a]];
            n[a] = sp * t;
            sp *= std::sqrt(std::max(0.0, 1.0 - t * t));
        }
        for (int i = 0; i < na; ++i) {
            Vec d = n;
            d[dim - 2] = sp * std::cos(az[i]);
            d[dim - 1] = sp * std::sin(az[i]);
            rule->dirs.push_back(d);
            rule->weights.push_back(w_polar * azw[i]);
        }
        int a = n_polar - 1;
        while (a >= 0 && ++idx[a] == na) idx[a--] = 0;
        if (a < 0) break;
    }
    cache[key] = rule;
    return rule;
}

std::shared_ptr<const RadialRule> radial_rule(int dim, int nr) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const RadialRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dim, nr);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    auto rule = std::make_shared<RadialRule>();
    std::vector<double> x, w;
    gauss_legendre(nr, x, w);
    rule->r.resize(nr);
    rule->weights.resize(nr);
    for (int i = 0; i < nr; ++i) {
        const double r = 0.5 * (x[i] + 1.0);
        rule->r[i] = r;
        rule->weights[i] = 0.5 * w[i] * std::pow(r, dim - 1);
    }
    cache[key] = rule;
    return rule;
}

MultiEstimate tensor_ball(const MultiIntegrand& g, int n_comp, const Ball& b,
                          const QuadratureConfig& cfg) {
    const int dim = b.center.dim;
    auto dr = direction_rule(dim, cfg.angular_nodes);
    auto rr = radial_rule(dim, cfg.radial_nodes);
    const double Rd = std::pow(b.radius, dim);

    const std::int64_t nd = static_cast<std::int64_t>(dr->dirs.size());
    std::vector<double> partial(static_cast<size_t>(nd) * n_comp, 0.0);
    std::vector<std::uint8_t> bad(static_cast<size_t>(nd), 0);
    std::vector<Vec> bad_pt(static_cast<size_t>(nd), Vec(dim));

    parallel_blocks(nd, [&](std::int64_t i) {
        std::vector<double> vals(static_cast<size_t>(n_comp));
        double* acc = &partial[static_cast<size_t>(i) * n_comp];
        for (size_t j = 0; j < rr->r.size(); ++j) {
            const Vec y = b.center + (b.radius * rr->r[j]) * dr->dirs[i];
            g(y, vals.data());
            for (int c = 0; c < n_comp; ++c) {
                if (!std::isfinite(vals[c])) {
                    bad[i] = 1;
                    bad_pt[i] = y;
                    return;
                }
                acc[c] += dr->weights[i] * rr->weights[j] * vals[c];
            }
        }
    });
    for (std::int64_t i = 0; i < nd; ++i)
        if (bad[i])
            throw numeric_error("quadrature failure: non-finite integrand at sample point " +
                                format_point(bad_pt[i]));

    MultiEstimate out;
    out.comp.resize(static_cast<size_t>(n_comp));
    std::vector<double> col(static_cast<size_t>(nd));
    for (int c = 0; c < n_comp; ++c) {
        for (std::int64_t i = 0; i < nd; ++i) col[i] = partial[static_cast<size_t>(i) * n_comp + c];
        out.comp[c].value = pairwise_sum(col) * Rd;
        out.comp[c].stderr_ = 0.0;
    }
    out.evals = nd * static_cast<std::int64_t>(rr->r.size());
    return out;
}

// One MC stratum: uniform sampling on (shell [a, b] around origin) or, when
// in_ball_indicator is set, on the shell clipped to the target ball.
struct Stratum {
    Vec origin;
    double a = 0, b = 1;
    double volume = 0;
    std::int64_t n = 0;
    bool indicator = false; // multiply by 1_{y in ball}
};

MultiEstimate mc_strata(const MultiIntegrand& g, int n_comp, const Ball& ball,
                        const std::vector<Stratum>& strata, const QuadratureConfig& cfg) {
    const int dim = ball.center.dim;

    struct BlockRef {
        int stratum;
        std::int64_t first, count;
    };
    std::vector<BlockRef> blocks;
    for (int s = 0; s < static_cast<int>(strata.size()); ++s)
        for (std::int64_t f = 0; f < strata[s].n; f += kBlock)
            blocks.push_back({s, f, std::min(kBlock, strata[s].n - f)});

    const std::int64_t nb = static_cast<std::int64_t>(blocks.size());
    // slots: per block, per component: sum and sum of squares
    std::vector<double> sums(static_cast<size_t>(nb) * n_comp, 0.0);
    std::vector<double> sqs(static_cast<size_t>(nb) * n_comp, 0.0);
    std::vector<std::uint8_t> bad(static_cast<size_t>(nb), 0);
    std::vector<Vec> bad_pt(static_cast<size_t>(nb), Vec(dim));

    parallel_blocks(nb, [&](std::int64_t bi) {
        const BlockRef& br = blocks[bi];
        const Stratum& st = strata[br.stratum];
        std::vector<double> vals(static_cast<size_t>(n_comp));
        double* bsum = &sums[static_cast<size_t>(bi) * n_comp];
        double* bsq = &sqs[static_cast<size_t>(bi) * n_comp];
        const double ad = std::pow(st.a, dim), bd = std::pow(st.b, dim);
        for (std::int64_t k = 0; k < br.count; ++k) {
            CounterStream cs(cfg.seed, static_cast<std::uint64_t>(br.first + k),
                             static_cast<std::uint32_t>(br.stratum));
            const double u = cs.next_double();
            double r = std::pow(ad + u * (bd - ad), 1.0 / dim);
            const double r_floor = 1e-9 * st.b;
            if (r < r_floor) r = r_floor; // keep clear of an exact singular hit
            const Vec y = st.origin + r * cs.direction(dim);
            bool inside = true;
            if (st.indicator) inside = (y - ball.center).norm() < ball.radius;
            if (inside) {
                g(y, vals.data());
                for (int c = 0; c < n_comp; ++c) {
                    if (!std::isfinite(vals[c])) {
                        bad[bi] = 1;
                        bad_pt[bi] = y;
                        return;
                    }
                    bsum[c] += vals[c];
                    bsq[c] += vals[c] * vals[c];
                }
            }
        }
    });
    for (std::int64_t bi = 0; bi < nb; ++bi)
        if (bad[bi])
            throw numeric_error("quadrature failure: non-finite integrand at sample point " +
                                format_point(bad_pt[bi]));

    MultiEstimate out;
    out.comp.resize(static_cast<size_t>(n_comp));
    std::vector<double> parts;
    for (int c = 0; c < n_comp; ++c) {
        double value = 0, var_sum = 0;
        for (int s = 0; s < static_cast<int>(strata.size()); ++s) {
            parts.clear();
            double sq = 0;
            for (std::int64_t bi = 0; bi < nb; ++bi) {
                if (blocks[bi].stratum != s) continue;
                parts.push_back(sums[static_cast<size_t>(bi) * n_comp + c]);
                sq += sqs[static_cast<size_t>(bi) * n_comp + c];
            }
            const double n = static_cast<double>(strata[s].n);
            const double mean = pairwise_sum(parts) / n;
            double var = 0;
            if (strata[s].n > 1) var = std::max(0.0, (sq / n - mean * mean) * n / (n - 1.0));
            value += strata[s].volume * mean;
            var_sum += strata[s].volume * strata[s].volume * var / n;
        }
        out.comp[c].value = value;
        out.comp[c].stderr_ = std::sqrt(var_sum);
    }
    for (const Stratum& st : strata) out.evals += st.n;
    return out;
}

std::vector<Stratum> plan_strata(const Ball& ball, const QuadratureConfig& cfg,
                                 std::span<const Vec> singular_points) {
    const int dim = ball.center.dim;
    const double vol_unit = unit_ball_volume(dim);

    const Vec* inner_sp = nullptr;
    for (const Vec& sp : singular_points)
        if ((sp - ball.center).norm() < ball.radius) {
            inner_sp = &sp;
            break;
        }

    std::vector<Stratum> strata;
    if (inner_sp) {
        // Dyadic shells around the singular point; |grad u|^2 ~ |x|^-4 style
        // integrands are integrable but heavy-tailed for uniform sampling.
        const double dist = (*inner_sp - ball.center).norm();
        const double r_out = dist + ball.radius;
        const std::int64_t per =
            std::max<std::int64_t>(kMinPerStratum, cfg.samples / (kSingularShells + 1));
        double hi = r_out;
        for (int t = 0; t < kSingularShells; ++t) {
            Stratum st;
            st.origin = *inner_sp;
            st.b = hi;
            st.a = hi * 0.5;
            st.volume = vol_unit * (std::pow(st.b, dim) - std::pow(st.a, dim));
            st.n = per;
            st.indicator = true;
            strata.push_back(st);
            hi *= 0.5;
        }
        Stratum core;
        core.origin = *inner_sp;
        core.a = 0;
        core.b = hi;
        core.volume = vol_unit * std::pow(hi, dim);
        core.n = per;
        core.indicator = true;
        strata.push_back(core);
    } else if (cfg.stratified) {
        const std::int64_t per =
            std::max<std::int64_t>(kMinPerStratum, (cfg.samples + kRadialStrata - 1) / kRadialStrata);
        for (int s = 0; s < kRadialStrata; ++s) {
            Stratum st;
            st.origin = ball.center;
            st.a = ball.radius * std::pow(static_cast<double>(s) / kRadialStrata, 1.0 / dim);
            st.b = ball.radius * std::pow(static_cast<double>(s + 1) / kRadialStrata, 1.0 / dim);
            st.volume = vol_unit * std::pow(ball.radius, dim) / kRadialStrata;
            st.n = per;
            strata.push_back(st);
        }
    } else {
        Stratum st;
        st.origin = ball.center;
        st.a = 0;
        st.b = ball.radius;
        st.volume = vol_unit * std::pow(ball.radius, dim);
        st.n = cfg.samples;
        strata.push_back(st);
    }
    return strata;
}

} // namespace

MultiEstimate integrate_ball_multi(const MultiIntegrand& g, int n_comp, const Ball& b,
                                   const QuadratureConfig& cfg,
                                   std::span<const Vec> singular_points) {
    cfg.validate();
    if (cfg.method == QuadMethod::tensor_spherical) return tensor_ball(g, n_comp, b, cfg);
    return mc_strata(g, n_comp, b, plan_strata(b, cfg, singular_points), cfg);
}

Estimate integrate_ball(const ScalarFn& g, const Ball& b, const QuadratureConfig& cfg,
                        std::span<const Vec> singular_points) {
    MultiIntegrand mg = [&g](const Vec& y, double* out) { out[0] = g(y); };
    return integrate_ball_multi(mg, 1, b, cfg, singular_points).comp[0];
}

Estimate integrate_sphere(const ScalarFn& g, const Vec& center, double radius,
                          const QuadratureConfig& cfg) {
    cfg.validate();
    const int dim = center.dim;
    const double area = unit_sphere_area(dim) * std::pow(radius, dim - 1);

    if (cfg.method == QuadMethod::tensor_spherical) {
        auto dr = direction_rule(dim, cfg.angular_nodes);
        const std::int64_t nd = static_cast<std::int64_t>(dr->dirs.size());
        std::vector<double> partial(static_cast<size_t>(nd), 0.0);
        parallel_blocks(nd, [&](std::int64_t i) {
            partial[i] = dr->weights[i] * g(center + radius * dr->dirs[i]);
        });
        Estimate e;
        e.value = pairwise_sum(partial) * std::pow(radius, dim - 1);
        return e;
    }

    const std::int64_t n = cfg.samples;
    const std::int64_t nb = (n + kBlock - 1) / kBlock;
    std::vector<double> sums(static_cast<size_t>(nb), 0.0), sqs(static_cast<size_t>(nb), 0.0);
    parallel_blocks(nb, [&](std::int64_t bi) {
        const std::int64_t first = bi * kBlock, count = std::min(kBlock, n - first);
        double s = 0, q = 0;
        for (std::int64_t k = 0; k < count; ++k) {
            CounterStream cs(cfg.seed, static_cast<std::uint64_t>(first + k), /*stream=*/0x5F3E3Eu);
            const double v = g(center + radius * cs.direction(dim));
            s += v;
            q += v * v;
        }
        sums[bi] = s;
        sqs[bi] = q;
    });
    const double mean = pairwise_sum(sums) / static_cast<double>(n);
    double sq = 0;
    for (double v : sqs) sq += v;
    double var = 0;
    if (n > 1) var = std::max(0.0, (sq / n - mean * mean) * n / (n - 1.0));
    if (!std::isfinite(mean))
        throw numeric_error("quadrature failure: non-finite sphere integrand");
    Estimate e;
    e.value = area * mean;
    e.stderr_ = area * std::sqrt(var / static_cast<double>(n));
    return e;
}

double sphere_average(const ScalarFn& g, const Vec& center, double radius,
                      const QuadratureConfig& cfg) {
    const double area = unit_sphere_area(center.dim) * std::pow(radius, center.dim - 1);
    return integrate_sphere(g, center, radius, cfg).value / area;
}

Vec mean_value(const VectorField& u, const Ball& b, const QuadratureConfig& cfg, Vec* stderr_out) {
    const int dim = u.dim;
    MultiIntegrand g = [&u, dim](const Vec& y, double* out) {
        const Vec v = u.eval(y);
        for (int i = 0; i < dim; ++i) out[i] = v[i];
    };
    const auto est = integrate_ball_multi(g, dim, b, cfg, u.singular_points);
    const double vol = unit_ball_volume(dim) * std::pow(b.radius, dim);
    Vec m(dim);
    if (stderr_out) *stderr_out = Vec(dim);
    for (int i = 0; i < dim; ++i) {
        m[i] = est.comp[i].value / vol;
        if (stderr_out) (*stderr_out)[i] = est.comp[i].stderr_ / vol;
    }
    return m;
}

double mean_value(const ScalarField& s, const Ball& b, const QuadratureConfig& cfg,
                  double* stderr_out) {
    MultiIntegrand g = [&s](const Vec& y, double* out) { out[0] = s.eval(y); };
    const auto est = integrate_ball_multi(g, 1, b, cfg, s.singular_points);
    const double vol = unit_ball_volume(s.dim) * std::pow(b.radius, s.dim);
    if (stderr_out) *stderr_out = est.comp[0].stderr_ / vol;
    return est.comp[0].value / vol;
}

} // namespace nsreg
