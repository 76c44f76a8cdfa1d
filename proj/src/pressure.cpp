#include "nsreg/pressure.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include "nsreg/parallel.hpp"

namespace nsreg {

namespace {

using Cx = std::complex<double>;

// FFTW planner calls are not thread-safe; executions are.
std::mutex& fftw_mutex() {
    static std::mutex mu;
    return mu;
}

struct FftwArray {
    fftw_complex* ptr = nullptr;
    std::size_t n = 0;
    explicit FftwArray(std::size_t count) : n(count) {
        ptr = fftw_alloc_complex(count);
        if (!ptr) throw numeric_error("solve_p_tilde: grid allocation failed");
    }
    ~FftwArray() { fftw_free(ptr); }
    FftwArray(const FftwArray&) = delete;
    FftwArray& operator=(const FftwArray&) = delete;
    Cx* data() { return reinterpret_cast<Cx*>(ptr); }
};

struct Plans {
    fftw_plan fwd = nullptr, bwd = nullptr;
    Plans(int dim, int n, fftw_complex* buf) {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        std::vector<int> ns(static_cast<size_t>(dim), n);
        fwd = fftw_plan_dft(dim, ns.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft(dim, ns.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd || !bwd) throw numeric_error("solve_p_tilde: FFT plan creation failed");
    }
    ~Plans() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

/// Periodic uniform grid over a cube, with 4-point (cubic Lagrange) separable
/// interpolation.  Node j sits at lo + j*h, h = side/n.
struct PeriodicGrid {
    int dim = 6, n = 0;
    Vec lo;
    double side = 0;
    std::vector<double> values; // C order, last axis fastest

    double h() const { return side / n; }
    std::size_t cells() const {
        std::size_t c = 1;
        for (int d = 0; d < dim; ++d) c *= static_cast<std::size_t>(n);
        return c;
    }
    Vec node(std::size_t flat) const {
        Vec x(dim);
        for (int d = dim - 1; d >= 0; --d) {
            x[d] = lo[d] + static_cast<double>(flat % n) * h();
            flat /= static_cast<std::size_t>(n);
        }
        return x;
    }

    double interpolate(const Vec& x) const {
        int base[kMaxDim];
        double w[kMaxDim][4];
        for (int d = 0; d < dim; ++d) {
            const double t = (x[d] - lo[d]) / h();
            const double fl = std::floor(t);
            const double s = t - fl;
            base[d] = static_cast<int>(fl);
            // cubic Lagrange on offsets {-1, 0, 1, 2}
            w[d][0] = -s * (s - 1) * (s - 2) / 6.0;
            w[d][1] = (s + 1) * (s - 1) * (s - 2) / 2.0;
            w[d][2] = -(s + 1) * s * (s - 2) / 2.0;
            w[d][3] = (s + 1) * s * (s - 1) / 6.0;
        }
        int idx[kMaxDim][4];
        for (int d = 0; d < dim; ++d)
            for (int o = 0; o < 4; ++o) {
                int j = (base[d] + o - 1) % n;
                if (j < 0) j += n;
                idx[d][o] = j;
            }
        double acc = 0;
        const int combos = 1 << (2 * dim); // 4^dim
        for (int c = 0; c < combos; ++c) {
            double wt = 1.0;
            std::size_t flat = 0;
            int cc = c;
            for (int d = 0; d < dim; ++d) {
                const int o = cc & 3;
                cc >>= 2;
                wt *= w[d][o];
                flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[d][o]);
            }
            acc += wt * values[flat];
        }
        return acc;
    }
};

ScalarField wrap_grid(std::shared_ptr<const PeriodicGrid> grid) {
    ScalarField s;
    s.dim = grid->dim;
    s.domain.lo = grid->lo;
    s.domain.hi = grid->lo;
    for (int d = 0; d < grid->dim; ++d) s.domain.hi[d] += grid->side;
    s.eval = [grid](const Vec& x) { return grid->interpolate(x); };
    return s;
}

// signed FFT frequency index: 0, 1, .., n/2, -(n/2-1), .., -1
double sfreq(int j, int n) {
    return j <= n / 2 ? static_cast<double>(j) : static_cast<double>(j - n);
}

std::pair<std::shared_ptr<PeriodicGrid>, SolverMeta>
solve_grid(const VectorField& u, const VectorField* f, const CutoffEta& eta,
           const DecompositionConfig& cfg) {
    const int dim = u.dim;
    const int n = cfg.grid_n;
    if (n < 4 || (n & (n - 1)) != 0)
        throw config_error("solve_p_tilde: grid_n must be a power of two >= 4");
    const Ball support(eta.center, eta.radius);
    if (!support.inside(u.domain))
        throw config_error("solve_p_tilde: cutoff support ball exits the field domain");

    std::size_t N = 1;
    for (int d = 0; d < dim; ++d) N *= static_cast<std::size_t>(n);
    // component grids (worst case dim) + work + accumulator complex arrays
    const std::uint64_t bytes =
        static_cast<std::uint64_t>(N) * (static_cast<std::uint64_t>(dim) * 8 + 32) + N * 8;
    if (bytes > cfg.memory_budget)
        throw numeric_error("solve_p_tilde: grid memory " + std::to_string(bytes) +
                            " bytes exceeds budget " + std::to_string(cfg.memory_budget));

    const double L = 2.0 * cfg.pad * eta.radius;
    Vec lo = eta.center;
    for (int d = 0; d < dim; ++d) lo[d] -= 0.5 * L;
    const double hh = L / n;

    const Vec u_mean = mean_value(u, support, cfg.mean_quad);

    SolverMeta meta;
    meta.grid_n = n;
    meta.box_side = L;
    meta.pad = cfg.pad;
    meta.bytes = bytes;

    // Pass 1: per-component activity of (u_i - mean_i) eta on the grid.
    // Pass 2 stores only the active components.
    const std::int64_t NN = static_cast<std::int64_t>(N);
    auto node_at = [&](std::size_t flat) {
        Vec x(dim);
        for (int d = dim - 1; d >= 0; --d) {
            x[d] = lo[d] + static_cast<double>(flat % static_cast<std::size_t>(n)) * hh;
            flat /= static_cast<std::size_t>(n);
        }
        return x;
    };

    std::vector<std::uint8_t> comp_active(static_cast<size_t>(dim), 0);
    {
        constexpr std::int64_t chunk = 1 << 16;
        const std::int64_t nb = (NN + chunk - 1) / chunk;
        std::vector<std::uint8_t> found(static_cast<size_t>(nb) * dim, 0);
        parallel_blocks(nb, [&](std::int64_t b) {
            std::uint8_t* slot = &found[static_cast<size_t>(b) * dim];
            for (std::int64_t i = b * chunk; i < std::min(NN, (b + 1) * chunk); ++i) {
                const Vec y = node_at(static_cast<std::size_t>(i));
                const double e = eta.eval(y);
                if (e == 0.0) continue;
                const Vec uy = u.eval(y);
                for (int d = 0; d < dim; ++d)
                    if ((uy[d] - u_mean[d]) * e != 0.0) slot[d] = 1;
            }
        });
        for (std::int64_t b = 0; b < nb; ++b)
            for (int d = 0; d < dim; ++d)
                if (found[static_cast<size_t>(b) * dim + d]) comp_active[d] = 1;
    }

    std::vector<std::vector<double>> comp(static_cast<size_t>(dim));
    for (int d = 0; d < dim; ++d)
        if (comp_active[d]) comp[d].assign(N, 0.0);
    parallel_blocks((NN + (1 << 16) - 1) >> 16, [&](std::int64_t b) {
        for (std::int64_t i = b << 16; i < std::min(NN, (b + 1) << 16); ++i) {
            const Vec y = node_at(static_cast<std::size_t>(i));
            const double e = eta.eval(y);
            if (e == 0.0) continue;
            const Vec uy = u.eval(y);
            for (int d = 0; d < dim; ++d)
                if (comp_active[d]) comp[d][static_cast<std::size_t>(i)] = (uy[d] - u_mean[d]) * e;
        }
    });

    // wavenumbers per axis; odd-derivative multiplier zeroed at Nyquist
    std::vector<double> kfull(static_cast<size_t>(n)), kodd(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        kfull[j] = 2.0 * M_PI / L * sfreq(j, n);
        kodd[j] = (j == n / 2) ? 0.0 : kfull[j];
    }

    FftwArray work(N), acc(N);
    Plans plans(dim, n, work.ptr);
    std::memset(acc.ptr, 0, N * sizeof(fftw_complex));

    auto accumulate = [&](int di, int dj, bool odd_i) {
        // acc += m(k) * work(k);  m = k_i k_j (even pair) or i k_j (odd, di < 0)
        parallel_blocks((NN + (1 << 16) - 1) >> 16, [&](std::int64_t b) {
            for (std::int64_t i = b << 16; i < std::min(NN, (b + 1) << 16); ++i) {
                std::size_t rem = static_cast<std::size_t>(i);
                double ki = 1.0, kj = 1.0;
                for (int d = dim - 1; d >= 0; --d) {
                    const int jd = static_cast<int>(rem % static_cast<std::size_t>(n));
                    rem /= static_cast<std::size_t>(n);
                    if (d == di) ki = kfull[jd];
                    if (d == dj) kj = odd_i ? kodd[jd] : kfull[jd];
                }
                const Cx w = work.data()[i];
                acc.data()[i] += odd_i ? Cx(0, kj) * w : Cx(ki * kj) * w;
            }
        });
    };

    // quadratic pairs: sum_{ij} k_i k_j G_ij = sum_{i<=j} (2 - delta_ij) k_i k_j G_ij
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            if (!comp_active[i] || !comp_active[j]) continue;
            const double fac = (i == j) ? 1.0 : 2.0;
            parallel_blocks((NN + (1 << 16) - 1) >> 16, [&](std::int64_t b) {
                for (std::int64_t t = b << 16; t < std::min(NN, (b + 1) << 16); ++t) {
                    const auto s = static_cast<std::size_t>(t);
                    work.data()[t] = Cx(fac * comp[i][s] * comp[j][s], 0.0);
                }
            });
            fftw_execute(plans.fwd);
            accumulate(i, j, /*odd_i=*/false);
            ++meta.active_pairs;
        }
    }
    for (auto& c : comp) {
        c.clear();
        c.shrink_to_fit();
    }

    if (f) {
        for (int j = 0; j < dim; ++j) {
            std::atomic<bool> any{false};
            parallel_blocks((NN + (1 << 16) - 1) >> 16, [&](std::int64_t b) {
                bool local = false;
                for (std::int64_t t = b << 16; t < std::min(NN, (b + 1) << 16); ++t) {
                    const Vec y = node_at(static_cast<std::size_t>(t));
                    const double e = eta.eval(y);
                    const double v = (e == 0.0) ? 0.0 : f->eval(y)[j] * e;
                    work.data()[t] = Cx(v, 0.0);
                    if (v != 0.0) local = true;
                }
                if (local) any.store(true, std::memory_order_relaxed);
            });
            if (!any.load()) continue;
            fftw_execute(plans.fwd);
            accumulate(-1, j, /*odd_i=*/true);
            ++meta.active_f_comps;
        }
    }

    // p_hat = -S / |k|^2, zero-mean gauge, then invert.
    parallel_blocks((NN + (1 << 16) - 1) >> 16, [&](std::int64_t b) {
        for (std::int64_t t = b << 16; t < std::min(NN, (b + 1) << 16); ++t) {
            std::size_t rem = static_cast<std::size_t>(t);
            double k2 = 0;
            for (int d = dim - 1; d >= 0; --d) {
                const double kd = kfull[rem % static_cast<std::size_t>(n)];
                rem /= static_cast<std::size_t>(n);
                k2 += kd * kd;
            }
            acc.data()[t] = (k2 == 0.0) ? Cx(0, 0) : -acc.data()[t] / k2;
        }
    });
    std::memcpy(work.ptr, acc.ptr, N * sizeof(fftw_complex));
    fftw_execute(plans.bwd);

    auto grid = std::make_shared<PeriodicGrid>();
    grid->dim = dim;
    grid->n = n;
    grid->lo = lo;
    grid->side = L;
    grid->values.assign(N, 0.0);
    const double inv_n = 1.0 / static_cast<double>(N);
    parallel_blocks((NN + (1 << 16) - 1) >> 16, [&](std::int64_t b) {
        for (std::int64_t t = b << 16; t < std::min(NN, (b + 1) << 16); ++t)
            grid->values[static_cast<std::size_t>(t)] = work.data()[t].real() * inv_n;
    });

    return {grid, meta};
}

} // namespace

std::pair<ScalarField, SolverMeta> solve_p_tilde(const VectorField& u, const VectorField* f,
                                                 const CutoffEta& eta,
                                                 const DecompositionConfig& cfg) {
    auto [grid, meta] = solve_grid(u, f, eta, cfg);
    return {wrap_grid(grid), meta};
}

ScalarField harmonic_remainder(const ScalarField& p, const ScalarField& p_tilde,
                               const Ball& region) {
    ScalarField h;
    h.dim = p.dim;
    h.domain = p_tilde.domain;
    ScalarFn pe = p.eval, pt = p_tilde.eval;
    const Ball reg = region;
    h.eval = [pe, pt, reg](const Vec& x) {
        if ((x - reg.center).norm() > reg.radius)
            throw domain_error("harmonic remainder evaluated outside its region");
        return pe(x) - pt(x);
    };
    return h;
}

double oscillation(const ScalarField& g, const Ball& region, int n_probes, std::uint64_t seed) {
    Box bb;
    bb.lo = region.center;
    bb.hi = region.center;
    for (int d = 0; d < region.center.dim; ++d) {
        bb.lo[d] -= region.radius;
        bb.hi[d] += region.radius;
    }
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    int used = 0;
    std::uint64_t idx = 0;
    while (used < n_probes && idx < 64ull * static_cast<std::uint64_t>(n_probes)) {
        CounterStream cs(seed, idx++, /*stream=*/0x05C11u);
        Vec x(region.center.dim);
        for (int d = 0; d < x.dim; ++d)
            x[d] = bb.lo[d] + cs.next_double() * (bb.hi[d] - bb.lo[d]);
        if ((x - region.center).norm() >= region.radius) continue;
        const double v = g.eval(x);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        ++used;
    }
    return used > 0 ? mx - mn : 0.0;
}

double mean_value_check(const ScalarField& h, const Ball& region, const Vec& x, double s,
                        const QuadratureConfig& cfg, double osc) {
    if ((x - region.center).norm() + s > region.radius)
        throw domain_error("mean_value_check: B(x, s) exits the harmonic region");
    const double avg = sphere_average(h.eval, x, s, cfg);
    return std::fabs(h.eval(x) - avg) / std::max(osc, 1e-12);
}

PressureDecomposition decompose_pressure(const VectorField& u, const ScalarField& p,
                                         const VectorField* f, const CutoffEta& eta,
                                         const DecompositionConfig& cfg) {
    PressureDecomposition dec;
    auto [pt_grid, meta] = solve_grid(u, f, eta, cfg);
    dec.p_tilde = wrap_grid(pt_grid);
    dec.meta = meta;
    dec.region = Ball(eta.center, 2.0 * eta.radius / 3.0);

    // h on the same grid: p at nodes minus the p_tilde node values.
    auto grid = std::make_shared<PeriodicGrid>();
    grid->dim = pt_grid->dim;
    grid->n = pt_grid->n;
    grid->side = pt_grid->side;
    grid->lo = pt_grid->lo;
    grid->values.assign(grid->cells(), 0.0);

    const std::int64_t NN = static_cast<std::int64_t>(grid->cells());
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    std::mutex osc_mu;
    parallel_blocks((NN + (1 << 16) - 1) >> 16, [&](std::int64_t b) {
        double lmn = std::numeric_limits<double>::infinity(), lmx = -lmn;
        for (std::int64_t t = b << 16; t < std::min(NN, (b + 1) << 16); ++t) {
            const Vec y = grid->node(static_cast<std::size_t>(t));
            double hv = 0.0;
            if (p.domain.contains(y))
                hv = p.eval(y) - pt_grid->values[static_cast<std::size_t>(t)];
            grid->values[static_cast<std::size_t>(t)] = hv;
            if ((y - dec.region.center).norm() < dec.region.radius) {
                lmn = std::min(lmn, hv);
                lmx = std::max(lmx, hv);
            }
        }
        std::lock_guard<std::mutex> lk(osc_mu);
        mn = std::min(mn, lmn);
        mx = std::max(mx, lmx);
    });
    dec.h_osc = (mx > mn) ? mx - mn : 0.0;
    dec.h = wrap_grid(grid);
    return dec;
}

double PressureDecomposition::h_mean_on(const Ball& b, const QuadratureConfig& cfg) const {
    QuadratureConfig c = cfg;
    if (c.method == QuadMethod::monte_carlo && c.samples > 200'000)
        c.samples = 200'000; // h is smooth; interpolation dominates the cost
    return mean_value(h, b, c);
}

double PressureDecomposition::mean_value_deviation(const Vec& x, double s,
                                                   const QuadratureConfig& cfg) const {
    return mean_value_check(h, region, x, s, cfg, h_osc);
}

OracleResult newtonian_potential_oracle(const VectorField& u, const VectorField* f,
                                        const CutoffEta& eta, const Vec& x,
                                        const QuadratureConfig& cfg,
                                        const Vec* u_mean_precomputed) {
    const int dim = u.dim;
    const double r = eta.radius;
    const double dist_to_edge = r - (x - eta.center).norm();
    if (dist_to_edge < 0.05 * r)
        throw config_error("newtonian_potential_oracle: probe too close to the cutoff boundary");

    Vec u_mean;
    if (u_mean_precomputed) {
        u_mean = *u_mean_precomputed;
    } else {
        QuadratureConfig mq = cfg;
        mq.method = QuadMethod::tensor_spherical;
        u_mean = mean_value(u, Ball(eta.center, r), mq);
    }

    // G_ij at the probe (for the PV subtraction and the trace term)
    const Vec ux = u.eval(x);
    const double eta_x = eta.eval(x);
    Mat Gx(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            Gx(i, j) = (ux[i] - u_mean[i]) * (ux[j] - u_mean[j]) * eta_x;

    const double pv_radius = 0.1 * r;
    const double reject_radius = 1e-7 * r;
    const double inv_pi3 = 1.0 / (M_PI * M_PI * M_PI);
    auto rejected = std::make_shared<std::atomic<long long>>(0);

    MultiIntegrand g = [&, rejected](const Vec& y, double* out) {
        const Vec z = x - y;
        const double zn2 = z.norm2();
        if (zn2 < reject_radius * reject_radius) {
            rejected->fetch_add(1, std::memory_order_relaxed);
            out[0] = 0.0;
            return;
        }
        const double e = eta.eval(y);
        const double zn6 = zn2 * zn2 * zn2;
        double term = 0.0;
        if (e != 0.0 || zn2 < pv_radius * pv_radius) {
            Vec uy = e != 0.0 ? u.eval(y) : Vec::zero(dim);
            const bool pv = zn2 < pv_radius * pv_radius;
            // K_ij(z) = (-delta_ij |z|^-6 + 6 z_i z_j |z|^-8) / pi^3
            for (int i = 0; i < dim; ++i) {
                for (int j = 0; j < dim; ++j) {
                    double Gij = e != 0.0 ? (uy[i] - u_mean[i]) * (uy[j] - u_mean[j]) * e : 0.0;
                    if (pv) Gij -= Gx(i, j);
                    if (Gij == 0.0) continue;
                    const double kij =
                        inv_pi3 * (-(i == j ? 1.0 : 0.0) / zn6 + 6.0 * z[i] * z[j] / (zn6 * zn2));
                    term += kij * Gij;
                }
            }
            if (f && e != 0.0) {
                // -grad Phi (z) . (f eta)(y) = + z . (f eta)(y) / (pi^3 |z|^6)
                const Vec fy = f->eval(y);
                term += inv_pi3 * z.dot(fy) * e / zn6;
            }
        }
        out[0] = term;
    };

    std::vector<Vec> sing = {x};
    const auto est = integrate_ball_multi(g, 1, Ball(eta.center, r), cfg, sing);

    OracleResult res;
    res.value = est.comp[0].value - Gx.trace() / 6.0;
    res.stderr_ = est.comp[0].stderr_;
    res.rejected_fraction =
        est.evals > 0 ? static_cast<double>(rejected->load()) / static_cast<double>(est.evals) : 0;
    res.accuracy_warning = res.rejected_fraction > 0.01;
    return res;
}

} // namespace nsreg
