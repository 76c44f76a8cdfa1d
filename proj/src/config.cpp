#include "nsreg/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nsreg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path + ": cannot open config file");
    RunConfig cfg;
    cfg.source_ = path;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = value;
        cfg.lines_[key] = lineno;
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    values_[key] = value;
    lines_[key] = 0; // CLI origin
}

std::string RunConfig::raw(const std::string& key, const std::string& dflt) const {
    consumed_.insert(key);
    auto it = values_.find(key);
    const std::string v = it == values_.end() ? dflt : it->second;
    resolved_[key] = v;
    return v;
}

std::string RunConfig::get_string(const std::string& key, const std::string& dflt) const {
    return raw(key, dflt);
}

double RunConfig::get_double(const std::string& key, double dflt) const {
    const std::string v = raw(key, format_double(dflt));
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error(source_ + ": key '" + key + "': expected a number, got '" + v + "'");
    }
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t dflt) const {
    const std::string v = raw(key, std::to_string(dflt));
    try {
        size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error(source_ + ": key '" + key + "': expected an integer, got '" + v + "'");
    }
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t dflt) const {
    const std::string v = raw(key, std::to_string(dflt));
    try {
        size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error(source_ + ": key '" + key + "': expected an unsigned integer, got '" + v + "'");
    }
}

bool RunConfig::get_bool(const std::string& key, bool dflt) const {
    const std::string v = raw(key, dflt ? "true" : "false");
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error(source_ + ": key '" + key + "': expected true/false, got '" + v + "'");
}

Vec RunConfig::get_vec(const std::string& key, const Vec& dflt) const {
    std::string d;
    for (int i = 0; i < dflt.dim; ++i) {
        if (i) d += ",";
        d += format_double(dflt[i]);
    }
    const std::string v = raw(key, d);
    Vec out;
    std::stringstream ss(v);
    std::string item;
    int n = 0;
    while (std::getline(ss, item, ',')) {
        if (n >= kMaxDim)
            throw config_error(source_ + ": key '" + key + "': too many components");
        try {
            out[n++] = std::stod(trim(item));
        } catch (const std::exception&) {
            throw config_error(source_ + ": key '" + key + "': bad component '" + item + "'");
        }
    }
    if (n == 0) throw config_error(source_ + ": key '" + key + "': empty vector");
    out.dim = n;
    return out;
}

void RunConfig::reject_unknown() const {
    for (const auto& [key, value] : values_) {
        if (consumed_.count(key)) continue;
        const int line = lines_.count(key) ? lines_.at(key) : 0;
        throw config_error(source_ + ":" + std::to_string(line) + ": unknown key '" + key + "'");
    }
}

} // namespace nsreg
