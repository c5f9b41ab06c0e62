// regvar.hpp
//
// Regularly varying targets F(x) = c * x^kappa * (log x)^a * (log log x)^b
// and the sampling density f(x) = (x F(x))^(1/h) derived from them.

#pragma once

#include <string>
#include <string_view>

#include "subbasis/basesets.hpp"

namespace subbasis {

// Evaluation floor: arguments below it are clamped so that log log x > 0.
inline constexpr double kRegVarFloor = 16.0;

struct RegVarFn {
    double c = 1.0;
    double kappa = 0.0;
    double log_power = 0.0;     // a
    double loglog_power = 0.0;  // b

    // psi(x) = (log x)^a (log log x)^b, clamped at the floor.
    double psi(double x) const;
    double operator()(double x) const;

    // Parses "c*x^kappa*log^a*loglog^b"; factors may be omitted or reordered.
    static RegVarFn parse(std::string_view text);
    std::string to_string() const;

    bool operator==(const RegVarFn&) const = default;
};

class TargetDensity {
public:
    TargetDensity(RegVarFn F, unsigned h);

    const RegVarFn& F() const { return F_; }
    unsigned h() const { return h_; }
    double omega() const { return omega_; }

    // f(x) = (x F(x))^(1/h), with x clamped at the floor.
    double operator()(double x) const;

private:
    RegVarFn F_;
    unsigned h_;
    double omega_;
};

enum class Theorem { MT1i, MT1ii, MTp1i, MTp1ii };

std::string_view to_string(Theorem t);
Theorem parse_theorem(std::string_view text);

struct Admissibility {
    bool pass = true;
    bool boundary = false;  // kappa sits exactly at h/k - 1
    std::string reason;     // empty on pass; else a reason code
    std::string detail;
};

// Exponent and scale constraints of the selected existence theorem.
Admissibility check_admissible(const RegVarFn& F, const BaseSetSpec& base, unsigned h,
                               Theorem theorem);

// Gamma(1 + 1/k)^h / Gamma(h/k).
double gamma_ratio_bound(unsigned k, unsigned h);

// C_{B,h,f} = k^-h Gamma(omega)^h / Gamma(h omega).
double weight_constant(unsigned k, unsigned h, double omega);

// Gamma(omega)^h / Gamma(h omega).
double gamma_main_constant(unsigned h, double omega);

// The scale C_{B,h,f}^(-1/h) that makes E r(n) ~ S(n) F(n) when F has c = 1.
double canonical_scale(unsigned k, unsigned h, double omega);

}  // namespace subbasis
