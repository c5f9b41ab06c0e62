#include "subbasis/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "subbasis/error.hpp"

namespace subbasis {

std::complex<double> unit_phase(double turns) {
    const double r = turns - std::nearbyint(turns);
    const double angle = 2.0 * std::numbers::pi * r;
    return {std::cos(angle), std::sin(angle)};
}

std::complex<double> unit_phase_ratio(std::uint64_t m, std::uint64_t q) {
    m %= q;
    // Map to the symmetric range so the angle stays in [-pi, pi].
    const double signed_m = (2 * m > q) ? -static_cast<double>(q - m) : static_cast<double>(m);
    const double angle = 2.0 * std::numbers::pi * signed_m / static_cast<double>(q);
    return {std::cos(angle), std::sin(angle)};
}

double frac_product(std::uint64_t n, double alpha) {
    const double nd = static_cast<double>(n);
    const double p = nd * alpha;
    const double err = std::fma(nd, alpha, -p);
    const double f = p - std::floor(p);
    double r = f + err;
    r -= std::floor(r);
    return r;
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    if (m == 1) return 0;
    std::uint64_t result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, unsigned>> out;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p != 0) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1u);
    return out;
}

std::uint64_t euler_phi(std::uint64_t n) {
    if (n == 0) return 0;
    std::uint64_t phi = n;
    for (const auto& [p, e] : factorize(n)) phi = phi / p * (p - 1);
    return phi;
}

bool is_prime_trial(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

std::uint64_t integer_root(std::uint64_t n, unsigned k) {
    if (k == 0) throw ConfigError("bad_exponent", "integer_root: k must be >= 1");
    if (k == 1 || n < 2) return n;
    auto pow_le = [&](std::uint64_t m) {
        unsigned __int128 acc = 1;
        for (unsigned i = 0; i < k; ++i) {
            acc *= m;
            if (acc > n) return false;
        }
        return true;
    };
    auto r = static_cast<std::uint64_t>(std::pow(static_cast<double>(n), 1.0 / k));
    while (r > 0 && !pow_le(r)) --r;
    while (pow_le(r + 1)) ++r;
    return r;
}

double logarithmic_integral(double x) {
    if (x <= 2.0) return 0.0;
    auto integrand = [](double t) { return 1.0 / std::log(t); };
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 2.0, x, 40,
                                                                         1e-14, &error);
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ConfigError("bad_fit", "least_squares_slope needs >= 2 paired points");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

}  // namespace subbasis
