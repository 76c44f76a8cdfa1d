#pragma once

// Empirical best-constant sweeps for the interior lemma inequalities and both
// iteration arguments.  "Verified" means: ratios LHS / RHS-bracket finite,
// uniformly bounded over the sweep, dispersion (max/median) controlled — the
// paper's constants N are existential, so boundedness is the falsifiable
// surrogate.

#include <optional>
#include <string>
#include <vector>

#include "nsreg/detector.hpp"
#include "nsreg/quantities.hpp"

namespace nsreg {

enum class LemmaId {
    L31_eq1135,   // C(g r) <= N[g^-3 E^{3/2} + g^-6 A^{3/4} E^{3/4} + g^3 C](r)
    L32_eq1130d,  // D(g r, x1) <= N[g^{9/2} D + g^-3 E^{3/2} + g^-3 F^{3/4}](r, x0)
    L33_eq1136,   // A + E at (t r) <= N t^-2 [C^{2/3} + C + C^{1/3} D^{2/3} + F](r)
    P34_eq171115, // A+E+C+D at (g r) <= N g^2 [Phi(r)+1] + N g^-50 [E + E^3 + F](r)
    L35_eq18231,  // A + E at (t r) <= N t^2 A + N t^-3([A+E]^{3/2} + D) + N t^-6 F
    L36_eq531,    // quarter-absorbed contraction of A + E + D^{2/3}
    P37_decay,    // phi(t^k r) <= (1/2) phi(t^{k-1} r) + N1 (t^{k-1} r)^2
};

const char* to_string(LemmaId id);
LemmaId parse_lemma_id(const std::string& name);
std::vector<LemmaId> all_lemma_ids();

struct CaseResult {
    std::string field;
    Vec center;          // x0
    std::optional<Vec> center_inner; // x1 (L32)
    double rho = 0;
    double gamma = 0;    // gamma or theta, lemma-dependent
    double lhs = 0, bracket = 0, ratio = 0;
    bool skipped = false;
    bool zero_bracket = false;
    std::string skip_reason;
};

struct ConstantSweep {
    LemmaId lemma = LemmaId::L31_eq1135;
    std::vector<CaseResult> cases;
    double best_constant = 0; // max ratio over included cases
    double median_ratio = 0;
    double dispersion = 0;    // max / median
    int n_included = 0, n_skipped = 0, n_zero_bracket = 0;
};

struct HarnessParams {
    std::vector<double> gammas;     // fractions gamma or theta; empty -> lemma default
    std::vector<double> rhos = {0.5, 0.25};
    std::vector<Vec> centers;       // empty -> origin
    double x1_offset = 0.125;       // L32: |x1 - x0| / rho (hypothesis needs <= 1/4)
    QuadratureConfig quad;
    std::vector<HMeanProvider> h_means_per_field; // parallel to the family; required by D-lemmas
    // P37 grids (field-free lemma)
    std::vector<double> p37_phi0 = {0.5, 1.0, 2.0};
    std::vector<double> p37_theta1 = {0.125, 0.25, 0.5};
    std::vector<double> p37_n1 = {0.0, 1.0, 4.0};
    std::vector<double> p37_rho0 = {0.25, 0.5, 1.0};
    int p37_k_max = 100;
};

ConstantSweep sweep_constant(LemmaId lemma, const std::vector<FieldTriple>& family,
                             const HarnessParams& params);

struct Step1Trace {
    bool applicable = true;
    std::string note;
    std::vector<double> rho, phi, e_values;
    std::vector<bool> recurrence_ok; // phi(g r) <= phi(r)/3 + eps0/2 empirically
    int concluded_at = -1;           // first ladder index with phi <= eps0
};

/// Numerical run of the Step-1 absorption iteration on measured quantities.
Step1Trace step1_iteration(const FieldTriple& t, const Vec& x0, double rho1, double eps0,
                           double eps1, double gamma, int k_max, const QuadratureConfig& quad,
                           const HMeanProvider& h_means);

struct DecayIteration {
    std::vector<double> radii; // theta1^k rho0
    std::vector<double> seq;   // recursive sequence (equality form)
    std::vector<double> bound; // (1/2)^k [phi0 + 2 N1 rho0^2 / (1 - theta1)]
    double alpha0 = 0;         // log(1/2) / log(theta1)
    bool seq_below_bound = true;
};

DecayIteration decay_iteration(double phi0, double theta1, double N1, double rho0, int k_max);

struct BootstrapTrace {
    ExponentFit fit_AE, fit_C, fit_D;
    std::vector<double> alpha;
    std::vector<bool> ae_meets, c_meets, d_meets; // fit >= alpha_k resp. 3 alpha_k / 2
    bool applicable = true;
    bool vacuous = false; // zero field sentinel
    std::string note;
};

BootstrapTrace bootstrap_trace(const FieldTriple& t, const Vec& x1, const BootstrapSchedule& sched,
                               double r_max, int levels, const QuadratureConfig& quad,
                               const HMeanProvider& h_means);

/// Decomposition-backed [h] provider with per-(center, radius) caching.
HMeanProvider make_decomposition_h_means(const FieldTriple& t, int grid_n,
                                         const QuadratureConfig& quad, double pad = 2.0);

} // namespace nsreg
