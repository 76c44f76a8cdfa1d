#pragma once

// Epsilon-regularity criteria, singular-set extraction with 2D-Hausdorff
// box counting, and the Step-3 bootstrap exponent schedule
//   alpha_{k+1} = 12 alpha_k / (10 + alpha_k)  (increasing to 2),
//   mu_k = alpha_k / (10 + alpha_k),  beta(delta) = (6 - 3 delta/2)/(5/4 - delta/8).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsreg/quantities.hpp"

namespace nsreg {

struct EpsilonConfig {
    double eps0 = 0.01;   // criterion threshold (paper proves existence, not a value)
    double eps1 = 0.005;  // the small-E hypothesis threshold of the Step-1 iteration
    double r_floor = 0.0; // smallest trusted radius
    int ladder_levels = 6;

    void validate() const {
        if (!(eps0 > 0) || !(eps1 > 0)) throw config_error("EpsilonConfig: thresholds must be > 0");
        if (r_floor < 0) throw config_error("EpsilonConfig: r_floor must be >= 0");
    }
};

enum class VerdictKind { regular, singular_candidate, inconclusive };

struct Verdict {
    VerdictKind kind = VerdictKind::inconclusive;
    double achieved = 0;    // the max E (criterion_E) or the C+D+F sum (criterion_CDF)
    double threshold = 0;
    int radii_used = 0;
    std::string note;
};

const char* to_string(VerdictKind k);

/// limsup surrogate: max of E over the three smallest trusted ladder radii.
Verdict criterion_E(const SweepResult& sweep, const EpsilonConfig& cfg);

/// Theorem's C(rho0) + D(rho0) + F(rho0) <= eps0 form; needs all three present.
Verdict criterion_CDF(const QuantityReport& report, const EpsilonConfig& cfg);

struct FlaggedPoint {
    Vec point;
    double achieved = 0;
    VerdictKind kind = VerdictKind::singular_candidate;
};

struct SingularSetEstimate {
    std::vector<Vec> probes;                  // the full probe lattice
    std::vector<FlaggedPoint> flagged;        // singular candidates
    std::vector<FlaggedPoint> inconclusive;
    int probes_total = 0;
    std::map<double, std::int64_t> covering;  // box scale delta -> box count N(delta)
    std::map<double, double> measure_estimates; // N(delta) * delta^2
    double dimension_fit = 0;                 // slope of log N vs log(1/delta); NaN if empty
    EpsilonConfig thresholds;
};

struct ProbeGridSpec {
    Box box;             // probes inset from this box by margin r_max
    int per_axis = 5;
    double r_max = 0.25; // ladder top radius at every probe
};

SingularSetEstimate detect_singular_set(const FieldTriple& t, const ProbeGridSpec& grid,
                                        const EpsilonConfig& cfg, const QuadratureConfig& quad);

struct BootstrapSchedule {
    std::vector<double> alpha; // alpha_0 .. alpha_m
    std::vector<double> mu;    // mu_k = alpha_k / (10 + alpha_k)
    double delta = 0;
    int m = 0;                 // first index with alpha_m > 2 - delta
    double beta = 0;           // Morrey exponent for this delta
};

double bootstrap_alpha_step(double alpha);           // 12 a / (10 + a)
double morrey_beta(double delta);                    // (6 - 3 delta/2)/(5/4 - delta/8)
BootstrapSchedule bootstrap_schedule(double alpha0, double delta);

/// Morrey lemma gate in 6D: fitted exponent of int_{B(r)} |grad u|^{3/2} must
/// exceed 6 - 3/2 = 4.5 (by `margin`) for Hoelder continuity.  Undefined fits
/// (zero field) return true with a sentinel note.
struct MorreyVerdict {
    bool passes = false;
    double exponent = 0;
    double threshold = 4.5;
    bool sentinel = false; // set when the fit was undefined
};
MorreyVerdict morrey_verdict(const ExponentFit& grad_l32_fit, double margin = 0.1);

} // namespace nsreg
