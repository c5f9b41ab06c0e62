#include "subbasis/regvar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "subbasis/error.hpp"

namespace subbasis {

namespace {

double parse_number(std::string_view text, std::string_view whole) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ConfigError("bad_function", fmt::format("bad number '{}' in '{}'", text, whole));
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

double lgamma_checked(double x) { return boost::math::lgamma(x); }

}  // namespace

double RegVarFn::psi(double x) const {
    x = std::max(x, kRegVarFloor);
    const double lx = std::log(x);
    double v = 1.0;
    if (log_power != 0.0) v *= std::pow(lx, log_power);
    if (loglog_power != 0.0) v *= std::pow(std::log(lx), loglog_power);
    return v;
}

double RegVarFn::operator()(double x) const {
    x = std::max(x, kRegVarFloor);
    return c * std::pow(x, kappa) * psi(x);
}

RegVarFn RegVarFn::parse(std::string_view text) {
    RegVarFn fn;
    fn.c = 1.0;
    bool seen_c = false, seen_x = false, seen_log = false, seen_loglog = false;
    std::string_view rest = text;
    while (true) {
        const auto star = rest.find('*');
        const std::string_view tok = trim(rest.substr(0, star));
        if (tok.empty()) throw ConfigError("bad_function", fmt::format("empty factor in '{}'", text));

        const auto caret = tok.find('^');
        const std::string_view head = trim(tok.substr(0, caret));
        const double power =
            caret == std::string_view::npos ? 1.0 : parse_number(trim(tok.substr(caret + 1)), text);
        auto once = [&](bool& flag) {
            if (flag) throw ConfigError("bad_function", fmt::format("repeated factor in '{}'", text));
            flag = true;
        };
        if (head == "x") {
            once(seen_x);
            fn.kappa = power;
        } else if (head == "log") {
            once(seen_log);
            fn.log_power = power;
        } else if (head == "loglog") {
            once(seen_loglog);
            fn.loglog_power = power;
        } else if (caret == std::string_view::npos) {
            once(seen_c);
            fn.c = parse_number(head, text);
        } else {
            throw ConfigError("bad_function", fmt::format("unknown factor '{}' in '{}'", tok, text));
        }
        if (star == std::string_view::npos) break;
        rest.remove_prefix(star + 1);
    }
    if (!(fn.c > 0.0))
        throw ConfigError("bad_function", fmt::format("scale must be positive in '{}'", text));
    return fn;
}

std::string RegVarFn::to_string() const {
    return fmt::format("{:.15g}*x^{:.15g}*log^{:.15g}*loglog^{:.15g}", c, kappa, log_power,
                       loglog_power);
}

TargetDensity::TargetDensity(RegVarFn F, unsigned h)
    : F_(F), h_(h), omega_((1.0 + F.kappa) / static_cast<double>(h)) {
    if (h < 2) throw ConfigError("bad_h", "target density needs h >= 2");
}

double TargetDensity::operator()(double x) const {
    x = std::max(x, kRegVarFloor);
    return std::pow(x * F_(x), 1.0 / static_cast<double>(h_));
}

std::string_view to_string(Theorem t) {
    switch (t) {
        case Theorem::MT1i: return "MT1i";
        case Theorem::MT1ii: return "MT1ii";
        case Theorem::MTp1i: return "MTp1i";
        case Theorem::MTp1ii: return "MTp1ii";
    }
    return "?";
}

Theorem parse_theorem(std::string_view text) {
    for (Theorem t : {Theorem::MT1i, Theorem::MT1ii, Theorem::MTp1i, Theorem::MTp1ii})
        if (text == to_string(t)) return t;
    throw ConfigError("bad_theorem", fmt::format("unknown theorem '{}'", text));
}

double gamma_main_constant(unsigned h, double omega) {
    const double hd = static_cast<double>(h);
    return std::exp(hd * lgamma_checked(omega) - lgamma_checked(hd * omega));
}

double gamma_ratio_bound(unsigned k, unsigned h) {
    const double kd = static_cast<double>(k);
    const double hd = static_cast<double>(h);
    return std::exp(hd * lgamma_checked(1.0 + 1.0 / kd) - lgamma_checked(hd / kd));
}

double weight_constant(unsigned k, unsigned h, double omega) {
    return gamma_main_constant(h, omega) / std::pow(static_cast<double>(k), static_cast<double>(h));
}

double canonical_scale(unsigned k, unsigned h, double omega) {
    return std::pow(weight_constant(k, h, omega), -1.0 / static_cast<double>(h));
}

namespace {

Admissibility fail(std::string reason, std::string detail) {
    Admissibility out;
    out.pass = false;
    out.reason = std::move(reason);
    out.detail = std::move(detail);
    return out;
}

// Sign of the growth of psi: +1 grows, 0 constant, -1 decays.
int psi_trend(const RegVarFn& F) {
    if (F.log_power != 0.0) return F.log_power > 0 ? 1 : -1;
    if (F.loglog_power != 0.0) return F.loglog_power > 0 ? 1 : -1;
    return 0;
}

}  // namespace

Admissibility check_admissible(const RegVarFn& F, const BaseSetSpec& base, unsigned h,
                               Theorem theorem) {
    if (h < 2) throw ConfigError("bad_h", "admissibility needs h >= 2");
    const double top = static_cast<double>(h) / static_cast<double>(base.k) - 1.0;
    const double eps = 1e-12;
    const bool at_top = std::abs(F.kappa - top) <= eps;
    const double bound = gamma_ratio_bound(base.k, h);

    switch (theorem) {
        case Theorem::MT1i:
        case Theorem::MTp1i: {
            if (F.kappa <= 0.0)
                return fail("grows_too_slowly", fmt::format("need kappa > 0, got {:.15g}", F.kappa));
            if (at_top && theorem == Theorem::MT1i) {
                if (psi_trend(F) > 0 || F.c > bound)
                    return fail("scale_too_large",
                                fmt::format("boundary kappa = h/k-1 needs c <= {:.15g}", bound));
                Admissibility ok;
                ok.boundary = true;
                return ok;
            }
            if (F.kappa >= top)
                return fail("exponent_too_large",
                            fmt::format("need kappa < h/k-1 = {:.15g}, got {:.15g}", top, F.kappa));
            return {};
        }
        case Theorem::MT1ii: {
            const bool beats_log = F.kappa > 0.0 ||
                                   (F.kappa == 0.0 && (F.log_power > 1.0 ||
                                                       (F.log_power == 1.0 && F.loglog_power > 0.0)));
            if (!beats_log)
                return fail("grows_too_slowly", "need F(x)/log x -> infinity");
            if (F.kappa > top + eps)
                return fail("exponent_too_large",
                            fmt::format("need kappa <= h/k-1 = {:.15g}, got {:.15g}", top, F.kappa));
            if (at_top) {
                if (psi_trend(F) > 0 || (psi_trend(F) == 0 && F.c > bound))
                    return fail("scale_too_large",
                                fmt::format("need F(x) <= (1+o(1)) {:.15g} x^(h/k-1)", bound));
                Admissibility ok;
                ok.boundary = true;
                return ok;
            }
            return {};
        }
        case Theorem::MTp1ii: {
            if (F.kappa < -eps)
                return fail("grows_too_slowly", fmt::format("need kappa >= 0, got {:.15g}", F.kappa));
            if (F.kappa > top + eps)
                return fail("exponent_too_large",
                            fmt::format("need kappa <= h/k-1 = {:.15g}, got {:.15g}", top, F.kappa));
            // log x << F(x): with kappa = 0 this needs psi >> log.
            if (F.kappa <= eps &&
                (F.log_power < 1.0 || (F.log_power == 1.0 && F.loglog_power < 0.0)))
                return fail("grows_too_slowly", "need log x << F(x)");
            // F(x) << x^(h/k-1) / (log x)^h at the top exponent.
            const double hd = static_cast<double>(h);
            if (at_top && (F.log_power > -hd || (F.log_power == -hd && F.loglog_power > 0.0)))
                return fail("scale_too_large", "need F(x) << x^(h/k-1) / (log x)^h");
            // Numerical sandwich at the sieve limit.
            const double x = static_cast<double>(base.limit);
            const double lower = std::log(x);
            const double upper = std::pow(x, top) / std::pow(std::log(x), hd);
            const double v = F(x);
            Admissibility ok;
            ok.boundary = at_top;
            if (!(v >= lower * 1e-6 && v <= upper * 1e6))
                ok.detail = fmt::format("F({:.15g}) = {:.15g} sits far outside [log x, x^(h/k-1)/log^h x]"
                                        " = [{:.15g}, {:.15g}] at the limit",
                                        x, v, lower, upper);
            return ok;
        }
    }
    return {};
}

}  // namespace subbasis
