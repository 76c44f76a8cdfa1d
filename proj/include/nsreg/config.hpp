#pragma once

// Flat, typed key = value configuration with dotted sections.  Every getter
// records the resolved value, so the echoed config reproduces the run; keys
// nobody consumed are rejected before any compute starts.

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "nsreg/errors.hpp"
#include "nsreg/vec.hpp"

namespace nsreg {

inline constexpr const char* kVersion = "0.1.0";

class RunConfig {
public:
    RunConfig() = default;

    static RunConfig from_file(const std::string& path);

    /// CLI override; wins over file values.
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key, double dflt) const;
    std::int64_t get_int(const std::string& key, std::int64_t dflt) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;
    Vec get_vec(const std::string& key, const Vec& dflt) const; // comma-separated

    /// Throws config_error naming the first unconsumed key (with its source line).
    void reject_unknown() const;

    /// Resolved key -> value map (defaults included), for output headers.
    const std::map<std::string, std::string>& echo() const { return resolved_; }

private:
    std::string raw(const std::string& key, const std::string& dflt) const;

    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_; // source line for diagnostics
    mutable std::set<std::string> consumed_;
    mutable std::map<std::string, std::string> resolved_;
    std::string source_ = "<cli>";
};

std::string format_double(double v); // %.17g, locale-independent

} // namespace nsreg
