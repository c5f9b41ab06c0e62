// convolution.hpp
//
// Real linear convolution through FFTW, truncated to a requested length.
// Integer mode rounds every intermediate product and refuses results whose
// rounding defect suggests lost precision.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace subbasis {

struct ConvolutionOptions {
    std::uint64_t memory_budget = std::uint64_t{1} << 30;
    // Integer mode: round outputs to the nearest integer, and throw
    // SizeError if any output is farther than this from an integer.
    bool integer = false;
    double max_rounding_defect = 0.3;
};

// (a * b)[0 .. out_len).
std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t out_len, const ConvolutionOptions& options = {});

// v^{*h}[0 .. out_len) by binary powering.
std::vector<double> convolution_power(std::span<const double> v, unsigned h, std::size_t out_len,
                                      const ConvolutionOptions& options = {});

// Bytes of FFT workspace needed for a product of the given output length.
std::uint64_t convolution_workspace_bytes(std::size_t a_len, std::size_t b_len);

}  // namespace subbasis
