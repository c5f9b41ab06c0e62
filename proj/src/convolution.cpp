#include "subbasis/convolution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>

#include <fftw3.h>
#include <fmt/format.h>

#include "subbasis/error.hpp"

namespace subbasis {

namespace {

// FFTW's planner is not reentrant.
std::mutex g_plan_mutex;

std::size_t fft_size(std::size_t a_len, std::size_t b_len) {
    return std::bit_ceil(a_len + b_len - 1);
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
        if (!ptr) throw ResourceError("memory_budget", "fftw_malloc failed");
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    void* ptr;
};

struct Plan {
    fftw_plan p = nullptr;
    ~Plan() {
        if (p) {
            std::lock_guard lock(g_plan_mutex);
            fftw_destroy_plan(p);
        }
    }
};

void finish(std::vector<double>& out, const ConvolutionOptions& options) {
    if (!options.integer) return;
    double worst = 0.0;
    for (double& x : out) {
        const double r = std::nearbyint(x);
        worst = std::max(worst, std::abs(x - r));
        x = r == 0.0 ? 0.0 : r;
    }
    if (worst > options.max_rounding_defect)
        throw SizeError("precision",
                        fmt::format("FFT rounding defect {:.3g} exceeds {:.3g}; counts too large "
                                    "for double-precision convolution",
                                    worst, options.max_rounding_defect));
}

std::vector<double> convolve_impl(std::span<const double> a, std::span<const double> b,
                                  bool same, std::size_t out_len,
                                  const ConvolutionOptions& options) {
    a = a.first(std::min(a.size(), out_len));
    b = b.first(std::min(b.size(), out_len));
    if (a.empty() || b.empty() || out_len == 0) return std::vector<double>(out_len, 0.0);

    const std::uint64_t need = convolution_workspace_bytes(a.size(), b.size());
    if (need > options.memory_budget)
        throw ResourceError("memory_budget",
                            fmt::format("convolution of lengths {} and {} needs {} bytes, memory "
                                        "budget is {} bytes",
                                        a.size(), b.size(), need, options.memory_budget));

    const std::size_t n = fft_size(a.size(), b.size());
    const std::size_t nc = n / 2 + 1;
    FftwBuffer real_buf(sizeof(double) * n);
    FftwBuffer fa_buf(sizeof(fftw_complex) * nc);
    FftwBuffer fb_buf(sizeof(fftw_complex) * (same ? 1 : nc));
    auto* real = static_cast<double*>(real_buf.ptr);
    auto* fa = static_cast<fftw_complex*>(fa_buf.ptr);
    auto* fb = static_cast<fftw_complex*>(fb_buf.ptr);

    Plan forward_a, forward_b, backward;
    {
        std::lock_guard lock(g_plan_mutex);
        forward_a.p = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, fa, FFTW_ESTIMATE);
        if (!same) forward_b.p = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, fb, FFTW_ESTIMATE);
        backward.p = fftw_plan_dft_c2r_1d(static_cast<int>(n), fa, real, FFTW_ESTIMATE);
    }
    if (!forward_a.p || !backward.p || (!same && !forward_b.p))
        throw ResourceError("fft_plan", "FFTW plan creation failed");

    std::fill(real, real + n, 0.0);
    std::copy(a.begin(), a.end(), real);
    fftw_execute(forward_a.p);
    if (same) {
        for (std::size_t i = 0; i < nc; ++i) {
            const double re = fa[i][0], im = fa[i][1];
            fa[i][0] = re * re - im * im;
            fa[i][1] = 2.0 * re * im;
        }
    } else {
        std::fill(real, real + n, 0.0);
        std::copy(b.begin(), b.end(), real);
        fftw_execute(forward_b.p);
        for (std::size_t i = 0; i < nc; ++i) {
            const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
            const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
            fa[i][0] = re;
            fa[i][1] = im;
        }
    }
    fftw_execute(backward.p);  // c2r overwrites fa; real now holds n * (a*b)

    std::vector<double> out(out_len, 0.0);
    const std::size_t valid = std::min(out_len, a.size() + b.size() - 1);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < valid; ++i) out[i] = real[i] * scale;
    finish(out, options);
    return out;
}

}  // namespace

std::uint64_t convolution_workspace_bytes(std::size_t a_len, std::size_t b_len) {
    if (a_len == 0 || b_len == 0) return 0;
    const std::uint64_t n = fft_size(a_len, b_len);
    return n * sizeof(double) + 2 * (n / 2 + 1) * sizeof(fftw_complex);
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t out_len, const ConvolutionOptions& options) {
    const bool same = a.data() == b.data() && a.size() == b.size();
    return convolve_impl(a, b, same, out_len, options);
}

std::vector<double> convolution_power(std::span<const double> v, unsigned h, std::size_t out_len,
                                      const ConvolutionOptions& options) {
    if (h == 0) {
        std::vector<double> unit(out_len, 0.0);
        if (out_len > 0) unit[0] = 1.0;
        return unit;
    }
    std::vector<double> base(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(
                                                       std::min(v.size(), out_len)));
    base.resize(out_len, 0.0);
    std::vector<double> result;
    bool have_result = false;
    // Most significant bit first, so the sequence of operations depends on h only.
    for (int bit = std::bit_width(h) - 1; bit >= 0; --bit) {
        if (have_result) result = convolve_impl(result, result, true, out_len, options);
        if ((h >> bit) & 1u) {
            if (have_result)
                result = convolve_impl(result, base, false, out_len, options);
            else
                result = base;
            have_result = true;
        }
    }
    return result;
}

}  // namespace subbasis
