#include "nsreg/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nsreg {

using ordered_json = nlohmann::ordered_json;

OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw config_error("unknown output format '" + name + "' (expected csv or json)");
}

namespace {

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void append_cell(std::string& row, const std::optional<Estimate>& e) {
    if (e) {
        row += format_double(e->value);
        row += ",";
        row += format_double(e->stderr_);
    } else {
        row += ",";
    }
}

ordered_json fit_json(const ExponentFit& f) {
    ordered_json j;
    if (f.defined())
        j["slope"] = f.slope;
    else
        j["slope"] = nullptr;
    j["points_used"] = f.points_used;
    return j;
}

std::string fit_str(const ExponentFit& f) {
    return f.defined() ? format_double(f.slope) : "undefined";
}

} // namespace

std::string csv_banner(const ReportHeader& header) {
    std::string out = "# nsreg " + std::string(kVersion) + "\n";
    if (!header.reproducible) out += "# timestamp = " + timestamp_utc() + "\n";
    for (const auto& [k, v] : header.config_echo) out += "# " + k + " = " + v + "\n";
    return out;
}

nlohmann::ordered_json json_header(const ReportHeader& h) {
    ordered_json j;
    j["version"] = kVersion;
    if (!h.reproducible) j["timestamp"] = timestamp_utc();
    ordered_json cfg;
    for (const auto& [k, v] : h.config_echo) cfg[k] = v;
    j["config"] = cfg;
    return j;
}

std::string sweep_to_csv(const SweepResult& sweep, const ReportHeader& header) {
    std::string out = csv_banner(header);
    out += "# fit.A = " + fit_str(sweep.fit_A) + "\n";
    out += "# fit.E = " + fit_str(sweep.fit_E) + "\n";
    out += "# fit.C = " + fit_str(sweep.fit_C) + "\n";
    out += "# fit.D = " + fit_str(sweep.fit_D) + "\n";
    out += "# fit.F = " + fit_str(sweep.fit_F) + "\n";
    out += "center_1,center_2,center_3,center_4,center_5,center_6,"
           "r,A,A_err,E,E_err,C,C_err,D,D_err,F,F_err\n";
    for (const QuantityReport& rep : sweep.reports) {
        std::string row;
        for (int d = 0; d < kMaxDim; ++d) {
            row += d < rep.center.dim ? format_double(rep.center[d]) : "0";
            row += ",";
        }
        row += format_double(rep.radius);
        row += ",";
        append_cell(row, rep.A);
        row += ",";
        append_cell(row, rep.E);
        row += ",";
        append_cell(row, rep.C);
        row += ",";
        append_cell(row, rep.D);
        row += ",";
        append_cell(row, rep.F);
        out += row + "\n";
    }
    return out;
}

std::string energy_rows_to_csv(const std::vector<std::pair<TestFunction, EnergyResidual>>& rows,
                               const ReportHeader& header) {
    std::string out = csv_banner(header);
    out += "center_1,center_2,center_3,center_4,center_5,center_6,rho,lhs,rhs,residual\n";
    for (const auto& [tf, res] : rows) {
        std::string row;
        for (int d = 0; d < kMaxDim; ++d) {
            row += d < tf.support.center.dim ? format_double(tf.support.center[d]) : "0";
            row += ",";
        }
        row += format_double(tf.support.radius);
        row += ",";
        row += format_double(res.lhs);
        row += ",";
        row += format_double(res.rhs);
        row += ",";
        row += format_double(res.residual);
        out += row + "\n";
    }
    return out;
}

std::string constant_sweep_to_csv(const ConstantSweep& sweep, const ReportHeader& header) {
    std::string out = csv_banner(header);
    out += "# lemma = " + std::string(to_string(sweep.lemma)) + "\n";
    out += "# best_constant = " + format_double(sweep.best_constant) + "\n";
    out += "# dispersion = " + format_double(sweep.dispersion) + "\n";
    out += "field,rho,gamma,lhs,bracket,ratio,status\n";
    for (const CaseResult& c : sweep.cases) {
        std::string row = c.field;
        row += ",";
        row += format_double(c.rho);
        row += ",";
        row += format_double(c.gamma);
        row += ",";
        if (c.skipped) {
            row += ",,,skipped: " + c.skip_reason;
        } else {
            row += format_double(c.lhs);
            row += ",";
            row += format_double(c.bracket);
            row += ",";
            row += format_double(c.ratio);
            row += c.zero_bracket ? ",zero_bracket" : ",ok";
        }
        out += row + "\n";
    }
    return out;
}

std::string sweep_to_json(const SweepResult& sweep, const ReportHeader& header) {
    ordered_json j = json_header(header);
    j["schema"] = "nsreg.sweep.v1";
    j["fits"] = {{"A", fit_json(sweep.fit_A)},
                 {"E", fit_json(sweep.fit_E)},
                 {"C", fit_json(sweep.fit_C)},
                 {"D", fit_json(sweep.fit_D)},
                 {"F", fit_json(sweep.fit_F)}};
    ordered_json rows = ordered_json::array();
    for (const QuantityReport& rep : sweep.reports) {
        ordered_json r;
        r["center"] = std::vector<double>(rep.center.c.begin(), rep.center.c.begin() + rep.center.dim);
        r["r"] = rep.radius;
        auto put = [&r](const char* name, const std::optional<Estimate>& e) {
            if (e)
                r[name] = {{"value", e->value}, {"stderr", e->stderr_}};
            else
                r[name] = nullptr;
        };
        put("A", rep.A);
        put("E", rep.E);
        put("C", rep.C);
        put("D", rep.D);
        put("F", rep.F);
        if (rep.h_mean_used) r["h_mean_used"] = *rep.h_mean_used;
        rows.push_back(r);
    }
    j["reports"] = rows;
    return j.dump(2) + "\n";
}

std::string singular_set_to_json(const SingularSetEstimate& est, const ReportHeader& header) {
    ordered_json j = json_header(header);
    j["schema"] = "nsreg.detect.v1";
    auto pts = [](const std::vector<Vec>& v) {
        ordered_json a = ordered_json::array();
        for (const Vec& x : v)
            a.push_back(std::vector<double>(x.c.begin(), x.c.begin() + x.dim));
        return a;
    };
    j["probes"] = pts(est.probes);
    ordered_json flagged = ordered_json::array();
    for (const FlaggedPoint& fp : est.flagged) {
        ordered_json f;
        f["point"] = std::vector<double>(fp.point.c.begin(), fp.point.c.begin() + fp.point.dim);
        f["achieved"] = fp.achieved;
        flagged.push_back(f);
    }
    j["flagged"] = flagged;
    ordered_json inconclusive = ordered_json::array();
    for (const FlaggedPoint& fp : est.inconclusive)
        inconclusive.push_back(std::vector<double>(fp.point.c.begin(), fp.point.c.begin() + fp.point.dim));
    j["inconclusive"] = inconclusive;
    ordered_json cov;
    for (const auto& [delta, n] : est.covering) cov[format_double(delta)] = n;
    j["covering"] = cov;
    ordered_json meas;
    for (const auto& [delta, m] : est.measure_estimates) meas[format_double(delta)] = m;
    j["measure_estimates"] = meas;
    if (std::isnan(est.dimension_fit))
        j["dimension_fit"] = nullptr;
    else
        j["dimension_fit"] = est.dimension_fit;
    j["thresholds"] = {{"eps0", est.thresholds.eps0},
                       {"eps1", est.thresholds.eps1},
                       {"r_floor", est.thresholds.r_floor},
                       {"ladder_levels", est.thresholds.ladder_levels}};
    return j.dump(2) + "\n";
}

std::string constant_sweep_to_json(const ConstantSweep& sweep, const ReportHeader& header) {
    ordered_json j = json_header(header);
    j["schema"] = "nsreg.verify.v1";
    j["lemma"] = to_string(sweep.lemma);
    j["best_constant"] = sweep.best_constant;
    j["median_ratio"] = sweep.median_ratio;
    j["dispersion"] = sweep.dispersion;
    j["cases"] = sweep.n_included;
    j["skipped"] = sweep.n_skipped;
    j["zero_bracket"] = sweep.n_zero_bracket;
    ordered_json cases = ordered_json::array();
    for (const CaseResult& c : sweep.cases) {
        ordered_json cj;
        cj["field"] = c.field;
        cj["rho"] = c.rho;
        cj["gamma"] = c.gamma;
        if (c.skipped) {
            cj["skipped"] = c.skip_reason;
        } else {
            cj["lhs"] = c.lhs;
            cj["bracket"] = c.bracket;
            cj["ratio"] = c.ratio;
            cj["zero_bracket"] = c.zero_bracket;
        }
        cases.push_back(cj);
    }
    j["case_table"] = cases;
    return j.dump(2) + "\n";
}

std::string schedule_to_json(const BootstrapSchedule& sched, const ReportHeader& header) {
    ordered_json j = json_header(header);
    j["schema"] = "nsreg.schedule.v1";
    j["delta"] = sched.delta;
    j["m"] = sched.m;
    j["beta"] = sched.beta;
    j["alpha"] = sched.alpha;
    j["mu"] = sched.mu;
    return j.dump(2) + "\n";
}

std::string schedule_to_csv(const BootstrapSchedule& sched, const ReportHeader& header) {
    std::string out = csv_banner(header);
    out += "# delta = " + format_double(sched.delta) + "\n";
    out += "# m = " + std::to_string(sched.m) + "\n";
    out += "# beta = " + format_double(sched.beta) + "\n";
    out += "k,alpha_k,mu_k\n";
    for (size_t k = 0; k < sched.alpha.size(); ++k)
        out += std::to_string(k) + "," + format_double(sched.alpha[k]) + "," +
               format_double(sched.mu[k]) + "\n";
    return out;
}

void write_report(const std::string& content, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw numeric_error("write_report: cannot open " + tmp);
        out << content;
        out.flush();
        if (!out) throw numeric_error("write_report: short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw numeric_error("write_report: rename to " + path + " failed");
    }
}

} // namespace nsreg
