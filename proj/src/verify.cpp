#include "subbasis/verify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "subbasis/error.hpp"
#include "subbasis/numeric.hpp"
#include "subbasis/parallel.hpp"
#include "subbasis/repcount.hpp"

namespace subbasis {

namespace {

// Rounds to 15 significant digits so reports print identically everywhere.
double j15(double v) {
    if (!std::isfinite(v)) return v;
    const std::string s = fmt::format("{:.15g}", v);
    double out = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

std::string_view to_string(VerdictRule r) {
    return r == VerdictRule::FractionInBand ? "fraction_in_band" : "median_in_band";
}

nlohmann::ordered_json band_json(const Band& b) {
    return {{"lo", j15(b.lo)}, {"hi", j15(b.hi)}};
}

}  // namespace

Band parse_band(const std::string& text) {
    const auto comma = text.find(',');
    auto num = [&](std::string_view s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw ConfigError("bad_band", fmt::format("bad band '{}', expected lo,hi", text));
        return v;
    };
    if (comma == std::string::npos)
        throw ConfigError("bad_band", fmt::format("bad band '{}', expected lo,hi", text));
    Band b{num(std::string_view(text).substr(0, comma)),
           num(std::string_view(text).substr(comma + 1))};
    if (!(b.lo > 0.0 && b.lo <= b.hi))
        throw ConfigError("bad_band", fmt::format("band '{}' needs 0 < lo <= hi", text));
    return b;
}

void VerificationReport::finalize() {
    std::vector<double> in_ratios, in_emp, off_emp;
    std::size_t hits = 0;
    for (ReportRow& row : rows) {
        row.ratio = row.predicted > 0.0 ? row.empirical / row.predicted : 0.0;
        const Band b = row.band.value_or(band);
        const Band widened{b.lo * (1.0 - row.truncation), b.hi * (1.0 + row.truncation)};
        row.in_band = row.in_class && row.predicted > 0.0 && widened.contains(row.ratio);
        if (row.in_class) {
            in_ratios.push_back(row.ratio);
            in_emp.push_back(row.empirical);
            if (row.in_band) ++hits;
        } else {
            off_emp.push_back(row.empirical);
        }
    }
    summary = {};
    summary.rows = rows.size();
    summary.in_class_rows = in_ratios.size();
    summary.off_class_rows = off_emp.size();
    summary.median_ratio = median(in_ratios);
    summary.fraction_in_band =
        in_ratios.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(in_ratios.size());
    summary.in_class_median_empirical = median(in_emp);
    summary.off_class_median_empirical = median(off_emp);
    summary.off_class_suppressed =
        off_emp.empty() || summary.off_class_median_empirical <=
                               0.05 * std::abs(summary.in_class_median_empirical);

    if (in_ratios.empty()) {
        verdict = "pass-vacuous";
        return;
    }
    const bool band_ok = rule == VerdictRule::FractionInBand
                             ? summary.fraction_in_band >= required_fraction
                             : band.contains(summary.median_ratio);
    verdict = band_ok && summary.off_class_suppressed ? "pass" : "fail";
}

nlohmann::ordered_json VerificationReport::to_json() const {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["params"] = params;
    j["band"] = band_json(band);
    j["rule"] = to_string(rule);
    j["required_fraction"] = j15(required_fraction);
    auto& rs = j["rows"] = nlohmann::ordered_json::array();
    for (const ReportRow& row : rows) {
        nlohmann::ordered_json r;
        r["n"] = row.n;
        r["label"] = row.label;
        r["empirical"] = j15(row.empirical);
        r["predicted"] = j15(row.predicted);
        r["ratio"] = j15(row.ratio);
        r["truncation"] = j15(row.truncation);
        r["in_class"] = row.in_class;
        r["in_band"] = row.in_band;
        if (row.band) r["band"] = band_json(*row.band);
        rs.push_back(std::move(r));
    }
    j["summary"] = {{"rows", summary.rows},
                    {"in_class_rows", summary.in_class_rows},
                    {"off_class_rows", summary.off_class_rows},
                    {"median_ratio", j15(summary.median_ratio)},
                    {"fraction_in_band", j15(summary.fraction_in_band)},
                    {"in_class_median_empirical", j15(summary.in_class_median_empirical)},
                    {"off_class_median_empirical", j15(summary.off_class_median_empirical)},
                    {"off_class_suppressed", summary.off_class_suppressed}};
    j["notes"] = notes;
    j["verdict"] = verdict;
    return j;
}

std::string VerificationReport::json_text() const { return to_json().dump(2) + "\n"; }

std::string VerificationReport::csv_text() const {
    std::string out = "n,label,empirical,predicted,ratio,truncation,in_class,in_band\n";
    for (const ReportRow& row : rows)
        out += fmt::format("{},{},{:.15g},{:.15g},{:.15g},{:.15g},{},{}\n", row.n, row.label,
                           row.empirical, row.predicted, row.ratio, row.truncation,
                           row.in_class ? 1 : 0, row.in_band ? 1 : 0);
    return out;
}

namespace {

void apply_options(VerificationReport& rep, const VerifyOptions& options) {
    rep.band = options.band;
    rep.rule = options.rule;
    rep.required_fraction = options.required_fraction;
}

RepOptions rep_options(const VerifyOptions& options) {
    RepOptions ro;
    ro.memory_budget = options.memory_budget;
    return ro;
}

SingularOptions singular_options(const VerifyOptions& options) {
    SingularOptions so;
    so.work_budget = options.work_budget;
    so.memory_budget = options.memory_budget;
    return so;
}

bool in_class(const BaseSetSpec& base, unsigned h, std::uint64_t n) {
    if (base.kind == BaseKind::PowersOfNaturals) return true;
    const std::uint64_t K = compute_K(base.k);
    return n % K == h % K;
}

// sum over elements x < n of w(x) W[n - x], compensated, per target.
std::vector<double> last_coordinate_sums(std::span<const std::uint64_t> elems,
                                         std::span<const double> w, std::span<const double> W,
                                         const std::vector<std::uint64_t>& ns) {
    std::vector<double> out(ns.size());
    parallel_blocks(ns.size(), [&](std::size_t i) {
        const std::uint64_t n = ns[i];
        KahanSum acc;
        for (std::size_t j = 0; j < elems.size() && elems[j] < n; ++j)
            acc.add(w[j] * W[n - elems[j]]);
        out[i] = acc.value();
    });
    return out;
}

// Singular values at Q and relative truncation change against Q/2.
struct SeriesAt {
    std::vector<double> value;
    std::vector<double> truncation;
};

SeriesAt series_with_truncation(SeriesVariant variant, const std::vector<std::uint64_t>& ns,
                                unsigned k, unsigned h, std::uint64_t Q,
                                const VerifyOptions& options) {
    SeriesAt out;
    const auto full = singular_series_batch(variant, ns, k, h, Q, singular_options(options));
    std::vector<SingularValue> half;
    if (Q >= 2) half = singular_series_batch(variant, ns, k, h, Q / 2, singular_options(options));
    for (std::size_t i = 0; i < ns.size(); ++i) {
        out.value.push_back(full[i].value);
        const double t = half.empty() || full[i].value == 0.0
                             ? 0.0
                             : std::abs(full[i].value - half[i].value) / std::abs(full[i].value);
        out.truncation.push_back(t);
    }
    return out;
}

std::uint64_t max_of(const std::vector<std::uint64_t>& ns) {
    return ns.empty() ? 0 : *std::max_element(ns.begin(), ns.end());
}

}  // namespace

std::vector<ExpectedRep> expected_rep(const SieveIndex& base, const TargetDensity& density,
                                      double c, const std::vector<std::uint64_t>& ns,
                                      std::uint64_t Q, const VerifyOptions& options) {
    std::vector<ExpectedRep> out;
    if (ns.empty()) return out;
    const std::uint64_t N = max_of(ns);
    const unsigned h = density.h();
    const unsigned k = base.spec().k;
    if (N > base.spec().limit)
        throw ResourceError("beyond_sieve", fmt::format("n = {} exceeds sieve limit {}", N,
                                                        base.spec().limit));
    const auto elems = base.elements_up_to(N);
    std::vector<double> w(elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i)
        w[i] = density(static_cast<double>(elems[i])) / static_cast<double>(i + 1);

    const RepTable W = rep_table_weighted(elems, w, h - 1, N, CountMethod::Convolution,
                                          rep_options(options));
    const auto sums = last_coordinate_sums(elems, w, W.sums, ns);

    const SeriesVariant variant = base.spec().kind == BaseKind::PowersOfPrimes
                                      ? SeriesVariant::WaringGoldbach
                                      : SeriesVariant::Waring;
    const auto series = singular_series_batch(variant, ns, k, h, Q, singular_options(options));
    const double ch = std::pow(c, static_cast<double>(h));
    const double C = weight_constant(k, h, density.omega());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double n = static_cast<double>(ns[i]);
        ExpectedRep e;
        e.n = ns[i];
        e.exact = ch * sums[i];
        e.singular = series[i].value;
        e.predicted = ch * e.singular * C * std::pow(density(n), static_cast<double>(h)) / n;
        out.push_back(e);
    }
    return out;
}

namespace {

VerificationReport weighted_main_term(const std::string& id, BaseKind kind, unsigned k, unsigned h,
                                      double omega, const std::vector<std::uint64_t>& ns,
                                      std::uint64_t Q, const VerifyOptions& options) {
    if (h < 2) throw ConfigError("bad_h", "weighted verification needs h >= 2");
    if (!(omega > 0.0)) throw ConfigError("bad_omega", "weighted verification needs omega > 0");
    VerificationReport rep;
    rep.id = id;
    apply_options(rep, options);
    const bool primes = kind == BaseKind::PowersOfPrimes;
    const SeriesVariant variant = primes ? SeriesVariant::WaringGoldbach : SeriesVariant::Waring;
    rep.params["base"] = std::string(to_string(kind));
    rep.params["variant"] = std::string(to_string(variant));
    rep.params["k"] = k;
    rep.params["h"] = h;
    rep.params["omega"] = j15(omega);
    rep.params["Q"] = Q;
    rep.params["n_count"] = ns.size();
    if (ns.empty()) {
        rep.finalize();
        return rep;
    }

    const std::uint64_t N = max_of(ns);
    const BaseSetSpec spec{kind, k, std::max<std::uint64_t>(N, 2)};
    SieveOptions so;
    so.memory_budget = options.memory_budget;
    const SieveIndex index = build_sieve(spec, so);
    const auto elems = index.elements();
    const double expo = omega - 1.0 / static_cast<double>(k);
    std::vector<double> w(elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i) {
        const double x = static_cast<double>(elems[i]);
        w[i] = std::pow(x, expo) * (primes ? std::log(x) : 1.0);
    }
    const RepTable W = rep_table_weighted(elems, w, h - 1, N, CountMethod::Convolution,
                                          rep_options(options));
    const auto sums = last_coordinate_sums(elems, w, W.sums, ns);

    std::vector<std::uint64_t> class_ns;
    for (std::uint64_t n : ns)
        if (in_class(spec, h, n)) class_ns.push_back(n);
    const SeriesAt series = series_with_truncation(variant, class_ns, k, h, Q, options);

    const double gamma_term = primes ? gamma_main_constant(h, omega) : weight_constant(k, h, omega);
    std::size_t next_class = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        ReportRow row;
        row.n = ns[i];
        row.empirical = sums[i];
        const double main = gamma_term * std::pow(static_cast<double>(ns[i]),
                                                  static_cast<double>(h) * omega - 1.0);
        row.in_class = in_class(spec, h, ns[i]);
        if (row.in_class) {
            row.label = "in_class";
            row.predicted = series.value[next_class] * main;
            row.truncation = series.truncation[next_class];
            ++next_class;
        } else {
            // The singular series vanishes here; the ratio is taken against
            // the bare Gamma term.
            row.label = "obstruction";
            row.predicted = main;
        }
        rep.rows.push_back(row);
    }
    rep.notes.push_back(
        "error term is O(n^(h omega - 1) / (log n)^R): convergence is logarithmic, so the band is "
        "wide at this scale");
    if (!primes && k >= 2) {
        rep.params["regime"] = "extrapolated";
        rep.notes.push_back("k >= 2 with moderate h lies outside the proven range of the "
                            "weighted Waring asymptotic; reported as an extrapolated regime");
    }
    if (primes && h < h_star(k))
        rep.notes.push_back(fmt::format("h = {} is below h*_k = {}", h, h_star(k)));
    if (omega < 1.0 / static_cast<double>(h) - 1e-12)
        rep.notes.push_back("omega < 1/h: outside the stated range");
    rep.finalize();
    return rep;
}

}  // namespace

VerificationReport verify_goldbach_weighted(unsigned k, unsigned h, double omega,
                                            const std::vector<std::uint64_t>& ns, std::uint64_t Q,
                                            const VerifyOptions& options) {
    return weighted_main_term("goldbach_weighted", BaseKind::PowersOfPrimes, k, h, omega, ns, Q,
                              options);
}

VerificationReport verify_waring_weighted(unsigned k, unsigned h, double omega,
                                          const std::vector<std::uint64_t>& ns, std::uint64_t Q,
                                          const VerifyOptions& options) {
    return weighted_main_term("waring_weighted", BaseKind::PowersOfNaturals, k, h, omega, ns, Q,
                              options);
}

VerificationReport verify_sampled_concentration(const SampledSubbasis& A, std::uint64_t n_lo,
                                                std::uint64_t n_hi, std::uint64_t Q,
                                                const VerifyOptions& options) {
    VerificationReport rep;
    rep.id = "sampled_concentration";
    apply_options(rep, options);
    const bool primes = A.base.kind == BaseKind::PowersOfPrimes;
    const SeriesVariant variant = primes ? SeriesVariant::WaringGoldbach : SeriesVariant::Waring;
    rep.params["base"] = std::string(to_string(A.base.kind));
    rep.params["k"] = A.base.k;
    rep.params["h"] = A.h;
    rep.params["F"] = A.F.to_string();
    rep.params["c"] = j15(A.c);
    rep.params["seed"] = A.seed;
    rep.params["limit"] = A.limit;
    rep.params["rng"] = kGeneratorName;
    rep.params["n_lo"] = n_lo;
    rep.params["n_hi"] = n_hi;
    rep.params["Q"] = Q;
    rep.params["variant"] = std::string(to_string(variant));
    if (n_hi < n_lo) {
        rep.finalize();
        return rep;
    }
    if (n_lo < 2) throw ConfigError("bad_window", "window must start at n >= 2");
    if (n_hi > static_cast<std::uint64_t>(A.h) * A.limit)
        throw ConfigError("bad_window", "window exceeds h times the sampling limit");
    if (n_hi > A.limit)
        rep.notes.push_back("window extends past the sampling limit; counts there are partial");

    const auto end = std::upper_bound(A.elements.begin(), A.elements.end(), n_hi);
    const std::span<const std::uint64_t> part(A.elements.data(),
                                              static_cast<std::size_t>(end - A.elements.begin()));
    const RepTable r = rep_table(part, A.h, n_hi, CountMethod::Convolution, rep_options(options));

    const SingularOptions so = singular_options(options);
    const SingularSeriesEvaluator full(variant, A.base.k, A.h, Q, so);
    std::optional<SingularSeriesEvaluator> half;
    if (Q >= 2) half.emplace(variant, A.base.k, A.h, Q / 2, so);

    const std::uint64_t count = n_hi - n_lo + 1;
    rep.rows.resize(count);
    constexpr std::size_t kBlock = 1024;
    parallel_blocks((count + kBlock - 1) / kBlock, [&](std::size_t b) {
        for (std::uint64_t i = b * kBlock; i < std::min<std::uint64_t>(count, (b + 1) * kBlock); ++i) {
            const std::uint64_t n = n_lo + i;
            ReportRow& row = rep.rows[i];
            row.n = n;
            row.empirical = static_cast<double>(r.counts[n]);
            const double F = A.F(static_cast<double>(n));
            row.in_class = in_class(A.base, A.h, n);
            if (row.in_class) {
                row.label = "in_class";
                const double s = full(n).value;
                row.predicted = s * F;
                if (half && s != 0.0) row.truncation = std::abs(s - (*half)(n).value) / std::abs(s);
            } else {
                row.label = "obstruction";
                row.predicted = F;
            }
        }
    });
    rep.notes.push_back("prediction S(n, Q) F(n); off-class rows are compared with F(n) alone");
    rep.finalize();
    return rep;
}

VerificationReport verify_full_prime_ternary(std::uint64_t n_lo, std::uint64_t n_hi,
                                             std::uint64_t Q, const VerifyOptions& options) {
    VerificationReport rep;
    rep.id = "full_prime_ternary";
    apply_options(rep, options);
    rep.params["base"] = "primes";
    rep.params["k"] = 1;
    rep.params["h"] = 3;
    rep.params["n_lo"] = n_lo;
    rep.params["n_hi"] = n_hi;
    rep.params["Q"] = Q;
    if (n_hi < n_lo) {
        rep.finalize();
        return rep;
    }
    if (n_lo < 16) throw ConfigError("bad_window", "window must start at n >= 16");
    SieveOptions so;
    so.memory_budget = options.memory_budget;
    const SieveIndex primes = build_sieve({BaseKind::PowersOfPrimes, 1, n_hi}, so);
    const RepTable r = rep_table(primes.elements(), 3, n_hi, CountMethod::Convolution,
                                 rep_options(options));
    const SingularSeriesEvaluator series(SeriesVariant::WaringGoldbach, 1, 3, Q,
                                         singular_options(options));
    for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
        ReportRow row;
        row.n = n;
        row.empirical = static_cast<double>(r.counts[n]);
        const double nd = static_cast<double>(n);
        const double main = nd * nd / (2.0 * std::pow(std::log(nd), 3.0));
        row.in_class = n % 2 == 1;
        row.label = row.in_class ? "in_class" : "obstruction";
        row.predicted = row.in_class ? series(n).value * main : main;
        rep.rows.push_back(row);
    }
    rep.finalize();
    return rep;
}

EnergyFit energy_exponent(const SieveIndex& base, unsigned ell, const std::vector<double>& xs,
                          const VerifyOptions& options) {
    EnergyFit fit;
    fit.ell = ell;
    fit.xs = xs;
    fit.expected = 2.0 * ell / static_cast<double>(base.spec().k) - 1.0;
    std::vector<double> lx, le;
    for (double x : xs) {
        const auto xi = static_cast<std::uint64_t>(std::floor(x));
        const double e = static_cast<double>(
            additive_energy(base.elements(), ell, xi, rep_options(options)));
        fit.energies.push_back(e);
        lx.push_back(std::log(x));
        le.push_back(std::log(e));
    }
    fit.slope = least_squares_slope(lx, le);
    return fit;
}

VerificationReport condition_diagnostics(const BaseSetSpec& base,
                                         const std::vector<unsigned>& ells,
                                         const std::vector<double>& x_grid,
                                         const VerifyOptions& options) {
    VerificationReport rep;
    rep.id = "condition_diagnostics";
    apply_options(rep, options);
    rep.band = {0.9, 1.1};
    rep.rule = VerdictRule::FractionInBand;
    rep.required_fraction = 1.0;
    rep.params["base"] = std::string(to_string(base.kind));
    rep.params["k"] = base.k;
    rep.params["ells"] = ells;
    std::vector<double> grid_out;
    for (double x : x_grid) grid_out.push_back(j15(x));
    rep.params["x_grid"] = grid_out;
    if (x_grid.empty()) {
        rep.finalize();
        return rep;
    }
    const double x_max = *std::max_element(x_grid.begin(), x_grid.end());
    SieveOptions so;
    so.memory_budget = options.memory_budget;
    const SieveIndex index =
        build_sieve({base.kind, base.k, static_cast<std::uint64_t>(8.0 * x_max) + 1}, so);

    // (i) regular variation.
    for (double lambda : {2.0, 4.0, 8.0})
        for (double x : x_grid) {
            const auto xi = static_cast<std::uint64_t>(x);
            ReportRow row;
            row.n = xi;
            row.label = fmt::format("regvar lambda={:g}", lambda);
            row.empirical = static_cast<double>(index.count(static_cast<std::uint64_t>(lambda * x))) /
                            static_cast<double>(std::max<std::uint64_t>(1, index.count(xi)));
            row.predicted = std::pow(lambda, base.beta());
            rep.rows.push_back(row);
        }

    // (ii) additive energy exponents.
    if (x_grid.size() >= 2)
        for (unsigned ell : ells) {
            const EnergyFit fit = energy_exponent(index, ell, x_grid, options);
            ReportRow row;
            row.n = static_cast<std::uint64_t>(x_max);
            row.label = fmt::format("energy slope l={}", ell);
            row.empirical = fit.slope;
            row.predicted = fit.expected;
            const double tol = 0.25 / fit.expected;
            row.band = Band{1.0 - tol, 1.0 + tol};
            rep.rows.push_back(row);
        }

    // (iii) weighted solution count against its main term.
    {
        const unsigned h = static_cast<unsigned>(h_star(std::min(base.k, 11u)));
        const std::uint64_t K = compute_K(base.k);
        std::uint64_t n = static_cast<std::uint64_t>(x_max);
        if (base.kind == BaseKind::PowersOfPrimes)
            while (n % K != h % K) --n;
        const TargetDensity density(RegVarFn{1.0, 0.0, 1.0, 0.0}, h);
        const auto e = expected_rep(index, density, 1.0, {n}, 200, options).front();
        ReportRow row;
        row.n = n;
        row.label = fmt::format("weighted count h={}", h);
        row.empirical = e.exact;
        row.predicted = e.predicted;
        row.band = Band{0.5, 2.0};
        rep.rows.push_back(row);
    }
    rep.finalize();
    return rep;
}

}  // namespace subbasis
