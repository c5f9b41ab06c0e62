// numeric.hpp
//
// Small numeric helpers used across the library: compensated summation,
// exactly reduced unit phases e(x) = exp(2 pi i x), modular arithmetic,
// Euler's totient, the logarithmic integral and a least-squares slope.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace subbasis {

// Neumaier's variant of Kahan summation.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class ComplexKahanSum {
public:
    void add(std::complex<double> z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    std::complex<double> value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_;
    KahanSum im_;
};

// e(turns) with the argument first reduced to [-1/2, 1/2].
std::complex<double> unit_phase(double turns);

// e(m/q) computed from the exact residue m mod q.
std::complex<double> unit_phase_ratio(std::uint64_t m, std::uint64_t q);

// Fractional part of n*alpha, using an fma to recover the rounding error
// of the product before reduction.
double frac_product(std::uint64_t n, double alpha);

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

// Prime factorization by trial division, ascending primes.
std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n);

std::uint64_t euler_phi(std::uint64_t n);

bool is_prime_trial(std::uint64_t n);

// Floor of the k-th root of n.
std::uint64_t integer_root(std::uint64_t n, unsigned k);

// li(x) = integral from 2 to x of dt / log t (adaptive Gauss-Kronrod).
double logarithmic_integral(double x);

// Ordinary least-squares slope of ys against xs.
double least_squares_slope(std::span<const double> xs, std::span<const double> ys);

double median(std::vector<double> values);

}  // namespace subbasis
