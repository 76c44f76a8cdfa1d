#include "nsreg/detector.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nsreg/parallel.hpp"

namespace nsreg {

const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::regular: return "REGULAR";
        case VerdictKind::singular_candidate: return "SINGULAR-CANDIDATE";
        default: return "INCONCLUSIVE";
    }
}

Verdict criterion_E(const SweepResult& sweep, const EpsilonConfig& cfg) {
    cfg.validate();
    Verdict v;
    v.threshold = cfg.eps0;

    // trusted radii, smallest first
    std::vector<std::pair<double, double>> trusted; // (radius, E)
    for (size_t i = 0; i < sweep.radii.size(); ++i) {
        const auto& rep = sweep.reports[i];
        if (!rep.E) continue;
        if (sweep.radii[i] < cfg.r_floor) continue;
        const double val = rep.E->value;
        if (rep.E->stderr_ > 0.1 * std::max(val, 1e-12)) continue;
        trusted.push_back({sweep.radii[i], val});
    }
    std::sort(trusted.begin(), trusted.end());
    if (trusted.size() < 3) {
        v.kind = VerdictKind::inconclusive;
        v.note = "fewer than 3 trusted radii";
        v.radii_used = static_cast<int>(trusted.size());
        return v;
    }
    double mx = 0;
    for (int i = 0; i < 3; ++i) mx = std::max(mx, trusted[static_cast<size_t>(i)].second);
    v.achieved = mx;
    v.radii_used = 3;
    v.kind = mx <= cfg.eps0 ? VerdictKind::regular : VerdictKind::singular_candidate;
    return v;
}

Verdict criterion_CDF(const QuantityReport& report, const EpsilonConfig& cfg) {
    cfg.validate();
    Verdict v;
    v.threshold = cfg.eps0;
    if (!report.C || !report.D || !report.F) {
        v.kind = VerdictKind::inconclusive;
        v.note = "missing C, D or F";
        return v;
    }
    v.achieved = report.C->value + report.D->value + report.F->value;
    v.radii_used = 1;
    v.kind = v.achieved <= cfg.eps0 ? VerdictKind::regular : VerdictKind::singular_candidate;
    return v;
}

SingularSetEstimate detect_singular_set(const FieldTriple& t, const ProbeGridSpec& grid,
                                        const EpsilonConfig& cfg, const QuadratureConfig& quad) {
    cfg.validate();
    if (grid.per_axis < 2) throw config_error("detect_singular_set: per_axis must be >= 2");
    const int dim = t.u.dim;

    // probe lattice, inset by r_max so that every ladder ball stays inside
    std::vector<Vec> probes;
    {
        std::vector<int> idx(static_cast<size_t>(dim), 0);
        while (true) {
            Vec x(dim);
            for (int d = 0; d < dim; ++d) {
                const double lo = grid.box.lo[d] + grid.r_max;
                const double hi = grid.box.hi[d] - grid.r_max;
                if (hi <= lo) throw config_error("detect_singular_set: margin leaves no room");
                x[d] = lo + (hi - lo) * static_cast<double>(idx[static_cast<size_t>(d)]) /
                                 (grid.per_axis - 1);
            }
            probes.push_back(x);
            int d = dim - 1;
            while (d >= 0 && ++idx[static_cast<size_t>(d)] == grid.per_axis) idx[static_cast<size_t>(d--)] = 0;
            if (d < 0) break;
        }
    }

    SingularSetEstimate est;
    est.thresholds = cfg;
    est.probes = probes;
    est.probes_total = static_cast<int>(probes.size());

    // E-only ladder per probe (quadrature parallelizes internally; probes are
    // evaluated sequentially so memory stays bounded and output is ordered)
    std::vector<double> radii;
    for (int j = 0; j <= cfg.ladder_levels; ++j) radii.push_back(grid.r_max * std::pow(2.0, -j));

    for (const Vec& probe : probes) {
        SweepResult sweep;
        sweep.radii = radii;
        for (double r : radii) {
            MultiIntegrand g = [&](const Vec& y, double* out) {
                out[0] = t.u.grad ? t.u.grad(y).frobenius2() : t.u.gradient_at(y).frobenius2();
            };
            const auto e = integrate_ball_multi(g, 1, Ball(probe, r), quad, t.u.singular_points);
            QuantityReport rep;
            rep.center = probe;
            rep.radius = r;
            rep.E = Estimate{std::max(0.0, e.comp[0].value) * std::pow(r, -(dim - 4)),
                             e.comp[0].stderr_ * std::pow(r, -(dim - 4))};
            sweep.reports.push_back(rep);
        }
        const Verdict v = criterion_E(sweep, cfg);
        if (v.kind == VerdictKind::singular_candidate)
            est.flagged.push_back({probe, v.achieved, v.kind});
        else if (v.kind == VerdictKind::inconclusive)
            est.inconclusive.push_back({probe, v.achieved, v.kind});
    }

    // box covering at scales {2^-3 .. 2^-6} * extent
    const double extent = grid.box.max_extent();
    for (int s = 3; s <= 6; ++s) {
        const double delta = extent * std::pow(2.0, -s);
        std::set<std::vector<long>> boxes;
        for (const auto& fp : est.flagged) {
            std::vector<long> key(static_cast<size_t>(dim));
            for (int d = 0; d < dim; ++d)
                key[static_cast<size_t>(d)] =
                    static_cast<long>(std::floor((fp.point[d] - grid.box.lo[d]) / delta));
            boxes.insert(key);
        }
        est.covering[delta] = static_cast<std::int64_t>(boxes.size());
        est.measure_estimates[delta] = static_cast<double>(boxes.size()) * delta * delta;
    }

    // dimension estimate: slope of log N vs log(1/delta)
    std::vector<double> lx, ly;
    for (const auto& [delta, count] : est.covering)
        if (count > 0) {
            lx.push_back(std::log(1.0 / delta));
            ly.push_back(std::log(static_cast<double>(count)));
        }
    if (lx.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double n = static_cast<double>(lx.size());
        est.dimension_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    } else if (lx.size() == 1) {
        est.dimension_fit = 0.0; // constant covering
    } else {
        est.dimension_fit = std::numeric_limits<double>::quiet_NaN(); // empty set
    }
    return est;
}

double bootstrap_alpha_step(double alpha) { return 12.0 * alpha / (10.0 + alpha); }

double morrey_beta(double delta) { return (6.0 - 1.5 * delta) / (1.25 - 0.125 * delta); }

BootstrapSchedule bootstrap_schedule(double alpha0, double delta) {
    if (!(alpha0 > 0) || alpha0 > 2.0)
        throw config_error("bootstrap_schedule: alpha0 must lie in (0, 2]");
    if (!(delta > 0) || !(delta < 0.1))
        throw config_error("bootstrap_schedule: delta must lie in (0, 1/10)");
    BootstrapSchedule s;
    s.delta = delta;
    s.beta = morrey_beta(delta);
    double a = alpha0;
    s.alpha.push_back(a);
    s.mu.push_back(a / (10.0 + a));
    // contraction 2 - a_{k+1} = 10 (2 - a_k) / (10 + a_k) guarantees termination
    const int hard_cap = 1 << 20;
    while (a <= 2.0 - delta && static_cast<int>(s.alpha.size()) < hard_cap) {
        a = bootstrap_alpha_step(a);
        s.alpha.push_back(a);
        s.mu.push_back(a / (10.0 + a));
    }
    s.m = static_cast<int>(s.alpha.size()) - 1;
    return s;
}

MorreyVerdict morrey_verdict(const ExponentFit& grad_l32_fit, double margin) {
    MorreyVerdict v;
    v.threshold = 4.5;
    if (!grad_l32_fit.defined() || std::isnan(grad_l32_fit.slope)) {
        v.passes = true; // zero field: vacuous truth
        v.sentinel = true;
        return v;
    }
    v.exponent = grad_l32_fit.slope;
    v.passes = grad_l32_fit.slope > v.threshold + margin;
    return v;
}

} // namespace nsreg
