#include "nsreg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "nsreg/pressure.hpp"

namespace nsreg {

const char* to_string(LemmaId id) {
    switch (id) {
        case LemmaId::L31_eq1135: return "L31_eq1135";
        case LemmaId::L32_eq1130d: return "L32_eq1130d";
        case LemmaId::L33_eq1136: return "L33_eq1136";
        case LemmaId::P34_eq171115: return "P34_eq171115";
        case LemmaId::L35_eq18231: return "L35_eq18231";
        case LemmaId::L36_eq531: return "L36_eq531";
        default: return "P37_decay";
    }
}

LemmaId parse_lemma_id(const std::string& name) {
    for (LemmaId id : all_lemma_ids())
        if (name == to_string(id)) return id;
    throw config_error("unknown lemma id '" + name + "'");
}

std::vector<LemmaId> all_lemma_ids() {
    return {LemmaId::L31_eq1135, LemmaId::L32_eq1130d, LemmaId::L33_eq1136,
            LemmaId::P34_eq171115, LemmaId::L35_eq18231, LemmaId::L36_eq531, LemmaId::P37_decay};
}

namespace {

double pw(double x, double e) { return std::pow(std::max(x, 0.0), e); }

std::uint64_t bits_of(double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, sizeof(u));
    return u;
}

// cache key: (field index, center bits, radius bits)
struct QKey {
    int field;
    std::array<std::uint64_t, kMaxDim> center{};
    std::uint64_t radius;
    bool operator<(const QKey& o) const {
        if (field != o.field) return field < o.field;
        if (center != o.center) return center < o.center;
        return radius < o.radius;
    }
};

class ReportCache {
public:
    ReportCache(const std::vector<FieldTriple>& family, const HarnessParams& params)
        : family_(family), params_(params) {}

    const QuantityReport& at(int field, const Vec& center, double radius) {
        QKey key{field, {}, bits_of(radius)};
        for (int d = 0; d < center.dim; ++d) key.center[static_cast<size_t>(d)] = bits_of(center[d]);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        const FieldTriple& t = family_[static_cast<size_t>(field)];
        const HMeanProvider* provider = nullptr;
        if (static_cast<size_t>(field) < params_.h_means_per_field.size() &&
            params_.h_means_per_field[static_cast<size_t>(field)])
            provider = &params_.h_means_per_field[static_cast<size_t>(field)];
        std::optional<double> hm;
        if (t.p && provider) hm = (*provider)(center, radius);
        const bool use_p = t.p.has_value() && hm.has_value();
        QuantityReport rep =
            compute_quantities(t.u, use_p ? &*t.p : nullptr, t.f ? &*t.f : nullptr, hm,
                               Ball(center, radius), params_.quad);
        return cache_.emplace(key, std::move(rep)).first->second;
    }

private:
    const std::vector<FieldTriple>& family_;
    const HarnessParams& params_;
    std::map<QKey, QuantityReport> cache_;
};

double opt(const std::optional<Estimate>& e) { return e ? e->value : 0.0; }

std::vector<double> default_gammas(LemmaId id) {
    switch (id) {
        case LemmaId::L31_eq1135: return {0.5, 0.25, 0.125};
        case LemmaId::L32_eq1130d: return {0.25, 0.125, 0.0625};
        case LemmaId::L33_eq1136: return {0.5, 0.25};
        case LemmaId::P34_eq171115: return {0.1, 0.05, 0.025};
        case LemmaId::L35_eq18231: return {1.0 / 3.0, 0.25, 0.125};
        case LemmaId::L36_eq531: return {0.125, 0.0625, 0.03125};
        default: return {};
    }
}

void finalize(ConstantSweep& sweep) {
    std::vector<double> included;
    for (const CaseResult& c : sweep.cases) {
        if (c.skipped) {
            ++sweep.n_skipped;
            continue;
        }
        if (c.zero_bracket) {
            ++sweep.n_zero_bracket;
            continue;
        }
        included.push_back(c.ratio);
    }
    sweep.n_included = static_cast<int>(included.size());
    if (included.empty()) return;
    std::sort(included.begin(), included.end());
    sweep.best_constant = included.back();
    sweep.median_ratio = included[included.size() / 2];
    sweep.dispersion = sweep.median_ratio > 0
                           ? sweep.best_constant / sweep.median_ratio
                           : (sweep.best_constant > 0 ? std::numeric_limits<double>::infinity() : 0.0);
}

} // namespace

ConstantSweep sweep_constant(LemmaId lemma, const std::vector<FieldTriple>& family,
                             const HarnessParams& params) {
    ConstantSweep sweep;
    sweep.lemma = lemma;

    if (lemma == LemmaId::P37_decay) {
        for (double phi0 : params.p37_phi0)
            for (double theta1 : params.p37_theta1)
                for (double n1 : params.p37_n1)
                    for (double rho0 : params.p37_rho0) {
                        CaseResult cr;
                        cr.field = "decay";
                        cr.rho = rho0;
                        cr.gamma = theta1;
                        const DecayIteration it =
                            decay_iteration(phi0, theta1, n1, rho0, params.p37_k_max);
                        double worst = 0;
                        for (size_t k = 0; k < it.seq.size(); ++k)
                            worst = std::max(worst, it.seq[k] / it.bound[k]);
                        cr.lhs = worst;
                        cr.bracket = 1.0;
                        cr.ratio = worst; // <= 1 when the closed-form bound holds
                        sweep.cases.push_back(cr);
                    }
        finalize(sweep);
        return sweep;
    }

    const std::vector<double> gammas = params.gammas.empty() ? default_gammas(lemma) : params.gammas;
    std::vector<Vec> centers = params.centers;
    if (centers.empty()) centers.push_back(Vec::zero(family.empty() ? kMaxDim : family[0].u.dim));

    ReportCache cache(family, params);
    const bool needs_pressure = lemma == LemmaId::L32_eq1130d || lemma == LemmaId::L33_eq1136 ||
                                lemma == LemmaId::P34_eq171115 || lemma == LemmaId::L35_eq18231 ||
                                lemma == LemmaId::L36_eq531;

    for (int fi = 0; fi < static_cast<int>(family.size()); ++fi) {
        const FieldTriple& t = family[static_cast<size_t>(fi)];
        const bool has_h = static_cast<size_t>(fi) < params.h_means_per_field.size() &&
                           params.h_means_per_field[static_cast<size_t>(fi)] != nullptr;
        for (const Vec& x0 : centers) {
            for (double rho : params.rhos) {
                for (double g : gammas) {
                    CaseResult cr;
                    cr.field = t.name.empty() ? ("field" + std::to_string(fi)) : t.name;
                    cr.center = x0;
                    cr.rho = rho;
                    cr.gamma = g;

                    auto skip = [&](const std::string& why) {
                        cr.skipped = true;
                        cr.skip_reason = why;
                        sweep.cases.push_back(cr);
                    };

                    if (!(g > 0) || g >= 1) {
                        skip("gamma outside (0,1)");
                        continue;
                    }
                    if (needs_pressure && (!t.p || !has_h)) {
                        skip("lemma needs the pressure decomposition");
                        continue;
                    }
                    if (!Ball(x0, rho).inside(t.u.domain)) {
                        skip("ball exits domain");
                        continue;
                    }

                    try {
                        switch (lemma) {
                            case LemmaId::L31_eq1135: {
                                const auto& big = cache.at(fi, x0, rho);
                                const auto& small = cache.at(fi, x0, g * rho);
                                cr.lhs = opt(small.C);
                                cr.bracket = pw(g, -3) * pw(opt(big.E), 1.5) +
                                             pw(g, -6) * pw(opt(big.A), 0.75) * pw(opt(big.E), 0.75) +
                                             g * g * g * opt(big.C);
                                break;
                            }
                            case LemmaId::L32_eq1130d: {
                                if (g > 0.25) {
                                    skip("hypothesis gamma <= 1/4");
                                    continue;
                                }
                                if (params.x1_offset > 0.25) {
                                    skip("hypothesis |x1-x0| <= rho/4");
                                    continue;
                                }
                                Vec x1 = x0;
                                x1[fi % t.u.dim] += params.x1_offset * rho;
                                cr.center_inner = x1;
                                const auto& big = cache.at(fi, x0, rho);
                                const auto& small = cache.at(fi, x1, g * rho);
                                cr.lhs = opt(small.D);
                                cr.bracket = pw(g, 4.5) * opt(big.D) + pw(g, -3) * pw(opt(big.E), 1.5) +
                                             pw(g, -3) * pw(opt(big.F), 0.75);
                                break;
                            }
                            case LemmaId::L33_eq1136: {
                                if (g > 0.5) {
                                    skip("hypothesis theta <= 1/2");
                                    continue;
                                }
                                const auto& big = cache.at(fi, x0, rho);
                                const auto& small = cache.at(fi, x0, g * rho);
                                cr.lhs = opt(small.A) + opt(small.E);
                                cr.bracket = (pw(opt(big.C), 2.0 / 3.0) + opt(big.C) +
                                              pw(opt(big.C), 1.0 / 3.0) * pw(opt(big.D), 2.0 / 3.0) +
                                              opt(big.F)) /
                                             (g * g);
                                break;
                            }
                            case LemmaId::P34_eq171115: {
                                if (g >= 0.125) {
                                    skip("hypothesis gamma < 1/8");
                                    continue;
                                }
                                const auto& big = cache.at(fi, x0, rho);
                                const auto& small = cache.at(fi, x0, g * rho);
                                const double phi_big =
                                    opt(big.A) + opt(big.E) + opt(big.C) + opt(big.D);
                                cr.lhs = opt(small.A) + opt(small.E) + opt(small.C) + opt(small.D);
                                cr.bracket = g * g * (phi_big + 1.0) +
                                             pw(g, -50) * (opt(big.E) + pw(opt(big.E), 3.0) + opt(big.F));
                                break;
                            }
                            case LemmaId::L35_eq18231: {
                                if (g > 1.0 / 3.0) {
                                    skip("hypothesis theta <= 1/3");
                                    continue;
                                }
                                const auto& big = cache.at(fi, x0, rho);
                                const auto& small = cache.at(fi, x0, g * rho);
                                cr.lhs = opt(small.A) + opt(small.E);
                                cr.bracket = g * g * opt(big.A) +
                                             pw(g, -3) * (pw(opt(big.A) + opt(big.E), 1.5) + opt(big.D)) +
                                             pw(g, -6) * opt(big.F);
                                break;
                            }
                            case LemmaId::L36_eq531: {
                                const auto& big = cache.at(fi, x0, rho);
                                const auto& small = cache.at(fi, x0, g * rho);
                                const double m_small =
                                    opt(small.A) + opt(small.E) + pw(opt(small.D), 2.0 / 3.0);
                                const double m_big = opt(big.A) + opt(big.E) + pw(opt(big.D), 2.0 / 3.0);
                                cr.lhs = std::max(0.0, m_small - 0.25 * m_big);
                                cr.bracket =
                                    pw(m_big, 1.5) + opt(big.F) + pw(opt(big.F), 0.5);
                                break;
                            }
                            default: break;
                        }
                    } catch (const std::exception& e) {
                        skip(std::string("evaluation failed: ") + e.what());
                        continue;
                    }

                    if (cr.bracket < 1e-12) {
                        cr.zero_bracket = true;
                        cr.ratio = 0.0;
                    } else {
                        cr.ratio = cr.lhs / cr.bracket;
                    }
                    sweep.cases.push_back(cr);
                }
            }
        }
    }
    finalize(sweep);
    return sweep;
}

Step1Trace step1_iteration(const FieldTriple& t, const Vec& x0, double rho1, double eps0,
                           double eps1, double gamma, int k_max, const QuadratureConfig& quad,
                           const HMeanProvider& h_means) {
    if (!(gamma > 0) || gamma >= 1) throw config_error("step1_iteration: gamma must be in (0,1)");
    Step1Trace tr;
    for (int k = 0; k <= k_max; ++k) tr.rho.push_back(rho1 * std::pow(gamma, k));

    for (double r : tr.rho) {
        std::optional<double> hm;
        if (t.p && h_means) hm = h_means(x0, r);
        const bool use_p = t.p.has_value() && hm.has_value();
        const QuantityReport rep = compute_quantities(
            t.u, use_p ? &*t.p : nullptr, t.f ? &*t.f : nullptr, hm, Ball(x0, r), quad);
        const double e = opt(rep.E);
        tr.e_values.push_back(e);
        tr.phi.push_back(opt(rep.A) + e + opt(rep.C) + opt(rep.D));
    }
    for (double e : tr.e_values)
        if (e > eps1) {
            tr.applicable = false;
            tr.note = "hypothesis violated: E exceeds eps1 on the ladder";
            return tr;
        }
    for (size_t k = 0; k + 1 < tr.phi.size(); ++k)
        tr.recurrence_ok.push_back(tr.phi[k + 1] <= tr.phi[k] / 3.0 + eps0 / 2.0 + 1e-12);
    for (size_t k = 0; k < tr.phi.size(); ++k)
        if (tr.phi[k] <= eps0) {
            tr.concluded_at = static_cast<int>(k);
            break;
        }
    return tr;
}

DecayIteration decay_iteration(double phi0, double theta1, double N1, double rho0, int k_max) {
    if (!(theta1 > 0) || theta1 > 0.5)
        throw config_error("decay_iteration: theta1 must lie in (0, 1/2]");
    if (k_max < 1) throw config_error("decay_iteration: k_max must be >= 1");
    DecayIteration it;
    it.alpha0 = std::log(0.5) / std::log(theta1);
    const double tail = phi0 + 2.0 * N1 * rho0 * rho0 / (1.0 - theta1);
    double phi = phi0;
    double radius = rho0;
    for (int k = 0; k <= k_max; ++k) {
        it.radii.push_back(radius);
        it.seq.push_back(phi);
        it.bound.push_back(std::pow(0.5, k) * tail);
        if (it.seq.back() > it.bound.back() * (1.0 + 1e-12)) it.seq_below_bound = false;
        phi = 0.5 * phi + N1 * radius * radius; // phi(theta^{k+1}) from phi(theta^k)
        radius *= theta1;
    }
    return it;
}

BootstrapTrace bootstrap_trace(const FieldTriple& t, const Vec& x1, const BootstrapSchedule& sched,
                               double r_max, int levels, const QuadratureConfig& quad,
                               const HMeanProvider& h_means) {
    BootstrapTrace tr;
    tr.alpha = sched.alpha;
    const SweepResult sweep = radius_sweep(t, x1, r_max, levels, quad, h_means);
    tr.fit_AE = sweep.fit_AE;
    tr.fit_C = sweep.fit_C;
    tr.fit_D = sweep.fit_D;

    if (!tr.fit_AE.defined()) {
        tr.vacuous = true;
        tr.note = "decay fits undefined (zero field); vacuously consistent";
        for (size_t k = 0; k < sched.alpha.size(); ++k) {
            tr.ae_meets.push_back(true);
            tr.c_meets.push_back(true);
            tr.d_meets.push_back(true);
        }
        return tr;
    }
    const double tol = 0.1;
    if (tr.fit_AE.slope < sched.alpha.front() - tol) {
        tr.applicable = false;
        tr.note = "measured decay below alpha_0; bootstrap hypothesis fails here";
    }
    for (double ak : sched.alpha) {
        tr.ae_meets.push_back(tr.fit_AE.slope >= ak - tol);
        tr.c_meets.push_back(!tr.fit_C.defined() || tr.fit_C.slope >= 1.5 * ak - tol);
        tr.d_meets.push_back(!tr.fit_D.defined() || tr.fit_D.slope >= 1.5 * ak - tol);
    }
    return tr;
}

HMeanProvider make_decomposition_h_means(const FieldTriple& t, int grid_n,
                                         const QuadratureConfig& quad, double pad) {
    if (!t.p) throw config_error("make_decomposition_h_means: triple has no pressure");
    struct State {
        std::map<QKey, double> cache;
        std::mutex mu;
    };
    auto state = std::make_shared<State>();
    const FieldTriple triple = t;
    const QuadratureConfig q = quad;
    const int gn = grid_n;
    const double padc = pad;
    return [state, triple, q, gn, padc](const Vec& center, double radius) {
        QKey key{0, {}, bits_of(radius)};
        for (int d = 0; d < center.dim; ++d) key.center[static_cast<size_t>(d)] = bits_of(center[d]);
        {
            std::lock_guard<std::mutex> lock(state->mu);
            if (auto it = state->cache.find(key); it != state->cache.end()) return it->second;
        }
        DecompositionConfig dc;
        dc.grid_n = gn;
        dc.pad = padc;
        CutoffEta eta(center, radius);
        const PressureDecomposition dec = decompose_pressure(
            triple.u, *triple.p, triple.f ? &*triple.f : nullptr, eta, dc);
        const double hm = dec.h_mean_on(Ball(center, radius), q);
        std::lock_guard<std::mutex> lock(state->mu);
        state->cache[key] = hm;
        return hm;
    };
}

} // namespace nsreg
