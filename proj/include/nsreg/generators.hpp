#pragma once

// Manufactured exact solutions and singular model fields that every
// diagnostic is exercised on.  All constructors are pure; outputs immutable.

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsreg/field.hpp"

namespace nsreg {

/// (u, p, f) with optional members: p/f absent where a generator defines none.
struct FieldTriple {
    VectorField u;
    std::optional<ScalarField> p;
    std::optional<VectorField> f;
    std::string name;
};

/// Declarative field description: the CLI's `--field` payload.
struct FieldSpec {
    std::string kind; // constant | rotation | taylor_green6 | singular_rotation | random_divfree
    std::map<std::string, double> params;
};

FieldSpec parse_field_spec(const std::string& text); // "kind:key=val,key=val"
FieldTriple instantiate(const FieldSpec& spec);
std::string field_spec_documentation();

/// u = a (x2, -x1, 0, ...), p = a^2 (x1^2 + x2^2)/2; with this p the
/// manufactured forcing vanishes identically.
std::pair<VectorField, ScalarField> make_rotation(double a, int dim = 6, double half_width = 2.0);

/// u = (sin(k x1) cos(k x2), -cos(k x1) sin(k x2), 0, ...) on [-pi, pi]^dim,
/// p = -(cos(2k x1) + cos(2k x2))/4.  The manufactured forcing is smooth and
/// bounded: f = 2k^2 u + 2 grad p.
std::pair<VectorField, ScalarField> make_taylor_green6(int k, int dim = 6);
VectorField taylor_green6_forcing(int k, int dim = 6);

/// u(x) = M x / |x|^2 for antisymmetric M: degree -1 homogeneous, singular at
/// the origin, divergence-free away from it, pointwise fixed by the natural
/// scaling.  Throws config_error unless M^T = -M exactly.
VectorField make_singular_rotation(const Mat& M, double half_width = 2.0);
Mat antisymmetric_pair(double m12, int dim = 6); // M with M_{12}=m12=-M_{21}

/// Truncated Fourier sum with every mode Leray-projected orthogonal to its
/// wavevector; deterministic in seed.  Period 2*pi, domain [-pi, pi]^dim.
VectorField make_random_divfree(std::uint64_t seed, int modes, int dim = 6, double amplitude = 1.0);

/// The exact triple for a random divergence-free field: p solves
/// lap p = -div(u.grad u) on the torus (computed mode-by-mode), and
/// f = u.grad u - lap u + grad p, all in closed trigonometric form.
FieldTriple make_random_triple(std::uint64_t seed, int modes, int dim = 6, double amplitude = 1.0);

std::pair<VectorField, ScalarField> make_constant(const Vec& value, double half_width = 2.0);

} // namespace nsreg
