#include "subbasis/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <new>
#include <set>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "subbasis/basesets.hpp"
#include "subbasis/error.hpp"
#include "subbasis/expsums.hpp"
#include "subbasis/parallel.hpp"
#include "subbasis/regvar.hpp"
#include "subbasis/repcount.hpp"
#include "subbasis/sampler.hpp"
#include "subbasis/singular.hpp"
#include "subbasis/verify.hpp"

namespace subbasis::cli {

namespace {

struct Common {
    unsigned threads = 0;
    std::uint64_t memory_budget = std::uint64_t{1} << 30;
    double work_budget = 4e10;
    // Effective configuration without threads or output paths; embedded in
    // reports so that they can be regenerated with --config.
    std::string reproduce;
};

struct SieveArgs {
    std::string base = "primes";
    unsigned k = 1;
    std::uint64_t limit = 100'000'000;
    std::string output;
};

struct SingularArgs {
    std::string variant = "wg";
    unsigned k = 1;
    unsigned h = 3;
    std::uint64_t n = 0;
    std::uint64_t Q = 1024;
    std::vector<std::uint64_t> profile;
    std::string method = "direct";
    bool header = false;
};

struct ExpsumArgs {
    std::string sum = "T";
    double alpha = 0.0;
    std::uint64_t x = 0;
    double omega = 1.0;
    unsigned k = 1;
    unsigned h = 3;
    std::string range = "full";
    bool header = false;
};

struct SampleArgs {
    std::string base = "primes";
    unsigned k = 1;
    unsigned h = 3;
    std::string F = "1*x^0*log^1*loglog^0";
    double c = 0.0;  // 0 selects the canonical scale
    std::uint64_t seed = 42;
    std::uint64_t limit = 10'000'000;
    std::string output;
    std::vector<std::uint64_t> checkpoints;
};

struct CountArgs {
    std::string input;
    std::string base = "primes";
    unsigned k = 1;
    std::uint64_t limit = 0;
    unsigned h = 3;
    std::uint64_t N = 0;
    std::string method = "convolution";
    std::string weights = "none";
    double omega = 0.0;
    std::string F = "1*x^0*log^1*loglog^0";
    double c = 0.0;
    std::vector<std::uint64_t> checkpoints;
    std::string output;
};

struct TargetArgs {
    std::uint64_t n_count = 20;
    std::uint64_t near = 2'000'000;
    std::uint64_t span = 0;  // 0 means near / 20
    std::uint64_t off_class = 5;
    std::vector<std::uint64_t> n_list;
    std::uint64_t seed = 1;
};

struct ReportArgs {
    std::string band;
    double fraction = 0.8;
    std::string rule = "fraction";
    std::string output;
    std::string csv;
};

struct WeightedArgs {
    unsigned k = 1;
    unsigned h = 3;
    double omega = 1.0 / 3.0;
    std::uint64_t Q = 10'000;
    TargetArgs targets;
    ReportArgs report;
};

struct ConcentrationArgs {
    std::string input;
    std::string base = "primes";
    unsigned k = 1;
    unsigned h = 3;
    std::string F = "1*x^0.5*log^0*loglog^0";
    double c = 0.0;
    std::uint64_t seed = 42;
    std::uint64_t limit = 0;  // 0 means n_hi
    std::uint64_t n_lo = 100'000;
    std::uint64_t n_hi = 200'000;
    std::uint64_t Q = 1000;
    ReportArgs report;
};

struct DiagnoseArgs {
    std::string base = "primes";
    unsigned k = 1;
    std::vector<unsigned> ells = {2};
    std::vector<double> x_grid = {1e4, 31622.0, 1e5, 316227.0, 1e6};
    std::string output;
    std::string csv;
};

// Defaults for real options are recorded exactly so manifests round-trip.
std::string real_str(double v) { return fmt::format("{:.17g}", v); }

// A list default in the exact form the config writer uses for parsed values,
// so a default and its replay embed the same text.
template <class T>
std::string list_str(const std::vector<T>& values) {
    std::vector<std::string> parts;
    for (const T& v : values) {
        if constexpr (std::is_floating_point_v<T>)
            parts.push_back(real_str(v));
        else
            parts.push_back(std::to_string(v));
    }
    if (parts.size() == 1) return parts.front();
    return fmt::format("[{}]", fmt::join(parts, ", "));
}

// Writes text to a file, or to out when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw ConfigError("io", fmt::format("cannot write '{}'", path));
    f << text;
    if (!f) throw ConfigError("io", fmt::format("short write to '{}'", path));
}

std::filesystem::path cache_path(const BaseSetSpec& spec) {
    const char* dir = std::getenv("SUBBASIS_CACHE_DIR");
    if (!dir || !*dir) return {};
    return std::filesystem::path(dir) /
           fmt::format("{}-k{}-{}.sbl", to_string(spec.kind), spec.k, spec.limit);
}

SieveIndex obtain_sieve(const BaseSetSpec& spec, const Common& common) {
    const auto path = cache_path(spec);
    if (!path.empty() && std::filesystem::exists(path)) {
        SieveIndex cached = load_sieve_cache(path);
        if (cached.spec() == spec) return cached;
    }
    SieveOptions so;
    so.memory_budget = common.memory_budget;
    return build_sieve(spec, so);
}

VerifyOptions verify_options(const Common& common, const ReportArgs& r, const Band& default_band,
                             VerdictRule default_rule) {
    VerifyOptions vo;
    vo.memory_budget = common.memory_budget;
    vo.work_budget = common.work_budget;
    vo.band = r.band.empty() ? default_band : parse_band(r.band);
    if (r.rule == "fraction")
        vo.rule = VerdictRule::FractionInBand;
    else if (r.rule == "median")
        vo.rule = VerdictRule::MedianInBand;
    else if (r.rule.empty())
        vo.rule = default_rule;
    else
        throw ConfigError("bad_rule", fmt::format("unknown verdict rule '{}'", r.rule));
    vo.required_fraction = r.fraction;
    return vo;
}

// Distinct targets in [near, near + span] drawn from the counter-based
// generator, split into in-class and off-class sets.
std::vector<std::uint64_t> pick_targets(const TargetArgs& t,
                                        const std::function<bool(std::uint64_t)>& in_class) {
    if (!t.n_list.empty()) {
        std::vector<std::uint64_t> ns = t.n_list;
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        return ns;
    }
    const std::uint64_t span = t.span ? t.span : std::max<std::uint64_t>(1, t.near / 20);
    std::set<std::uint64_t> chosen;
    auto draw = [&](std::uint64_t want, bool cls, std::uint64_t stream) {
        std::uint64_t got = 0;
        for (std::uint64_t i = 0; got < want && i < 64 * (want + 1) + span; ++i) {
            const auto n = t.near + static_cast<std::uint64_t>(
                                        uniform_at(t.seed, stream + i) * static_cast<double>(span + 1));
            if (in_class(n) != cls || !chosen.insert(n).second) continue;
            ++got;
        }
        if (got < want)
            throw ConfigError("bad_targets", "window too small for the requested target count");
    };
    draw(t.n_count, true, 0);
    draw(t.off_class, false, std::uint64_t{1} << 40);
    return {chosen.begin(), chosen.end()};
}

void add_target_options(CLI::App* app, TargetArgs& t) {
    app->add_option("--n-count", t.n_count, "in-class targets drawn from the window")
        ->capture_default_str();
    app->add_option("--near", t.near, "window start")->capture_default_str();
    app->add_option("--span", t.span, "window length (0: near/20)")->capture_default_str();
    app->add_option("--off-class", t.off_class, "obstruction-class targets drawn from the window")
        ->capture_default_str();
    app->add_option("--n-list", t.n_list, "explicit targets (overrides the window)")
        ->delimiter(',');
    app->add_option("--seed", t.seed, "seed for target selection")->capture_default_str();
}

void add_report_options(CLI::App* app, ReportArgs& r, const std::string& band_default,
                        const std::string& rule_default, double fraction_default) {
    r.band = band_default;
    r.rule = rule_default;
    r.fraction = fraction_default;
    app->add_option("--band", r.band, "acceptance band lo,hi")->capture_default_str();
    app->add_option("--fraction", r.fraction, "required fraction of in-class rows in band")
        ->default_str(real_str(r.fraction));
    app->add_option("--rule", r.rule, "verdict rule: fraction or median")->capture_default_str();
    app->add_option("-o,--output", r.output, "JSON report path (stdout if empty)");
    app->add_option("--csv", r.csv, "CSV mirror of the report rows");
}

std::string summary_line(const VerificationReport& rep) {
    return fmt::format("{}: verdict={} rows={} in_class={} median_ratio={:.15g} "
                       "fraction_in_band={:.15g}\n",
                       rep.id, rep.verdict, rep.summary.rows, rep.summary.in_class_rows,
                       rep.summary.median_ratio, rep.summary.fraction_in_band);
}

int finish_report(VerificationReport& rep, const ReportArgs& r, const Common& common,
                  std::ostream& out, std::ostream& err) {
    rep.params["config"] = common.reproduce;
    emit(r.output, rep.json_text(), out);
    if (!r.csv.empty()) emit(r.csv, rep.csv_text(), out);
    err << summary_line(rep);
    return rep.passed() ? kExitOk : kExitVerdictFail;
}

int run_sieve(const SieveArgs& a, const Common& common, std::ostream& out) {
    const BaseSetSpec spec{parse_base_kind(a.base), a.k, a.limit};
    SieveOptions so;
    so.memory_budget = common.memory_budget;
    const SieveIndex index = build_sieve(spec, so);
    std::filesystem::path path = a.output.empty() ? cache_path(spec) : std::filesystem::path(a.output);
    if (!path.empty()) save_sieve_cache(path, index);
    out << fmt::format("base={},k={},limit={},count={},largest={}{}\n", to_string(spec.kind), spec.k,
                       spec.limit, index.size(), index.size() ? index.elements().back() : 0,
                       path.empty() ? "" : ",cache=" + path.string());
    return kExitOk;
}

int run_singular(const SingularArgs& a, const Common& common, std::ostream& out) {
    const SeriesVariant variant = parse_series_variant(a.variant);
    SingularOptions so;
    so.work_budget = common.work_budget;
    so.memory_budget = common.memory_budget;
    if (a.header) out << "variant,k,h,n,Q,value,imag_residual\n";
    auto row = [&](const SingularValue& v) {
        out << fmt::format("{},{},{},{},{},{:.15g},{:.15g}\n", to_string(v.variant), v.k, v.h, v.n,
                           v.Q, v.value, v.imag_residual);
    };
    if (!a.profile.empty()) {
        for (const auto& [Q, value] : truncation_profile(variant, a.n, a.k, a.h, a.profile, so)) {
            SingularValue v;
            v.variant = variant;
            v.k = a.k;
            v.h = a.h;
            v.n = a.n;
            v.Q = Q;
            v.value = value;
            row(v);
        }
        return kExitOk;
    }
    if (a.method == "direct")
        row(singular_series(variant, a.n, a.k, a.h, a.Q, so));
    else if (a.method == "evaluator")
        row(SingularSeriesEvaluator(variant, a.k, a.h, a.Q, so)(a.n));
    else if (a.method == "reference")
        row(singular_series_reference(variant, a.n, a.k, a.h, a.Q));
    else
        throw ConfigError("bad_method", fmt::format("unknown series method '{}'", a.method));
    return kExitOk;
}

int run_expsum(const ExpsumArgs& a, const Common& common, std::ostream& out) {
    const SumRange range = parse_sum_range(a.range);
    std::complex<double> v;
    if (a.sum == "u") {
        v = u_sum(a.alpha, a.x, a.omega, a.h, range);
    } else if (a.sum == "g" || a.sum == "T") {
        const SieveIndex index =
            obtain_sieve({BaseKind::PowersOfPrimes, a.k, std::max<std::uint64_t>(a.x, 2)}, common);
        v = a.sum == "g" ? g_sum(index, a.alpha, a.x)
                         : T_sum(index, a.alpha, a.x, a.omega, a.h, range);
    } else {
        throw ConfigError("bad_sum", fmt::format("unknown sum '{}' (g, T or u)", a.sum));
    }
    if (a.header) out << "sum,alpha,x,omega,k,range,re,im\n";
    out << fmt::format("{},{:.15g},{},{:.15g},{},{},{:.15g},{:.15g}\n", a.sum, a.alpha, a.x, a.omega,
                       a.k, to_string(range), v.real(), v.imag());
    return kExitOk;
}

std::string counting_csv(const std::vector<CountingRow>& rows) {
    std::string text = "x,count,predicted,ratio,low_mass\n";
    for (const auto& r : rows)
        text += fmt::format("{},{},{:.15g},{:.15g},{}\n", r.x, r.count, r.predicted, r.ratio,
                            r.low_mass ? 1 : 0);
    return text;
}

SampledSubbasis sample_from(const std::string& base, unsigned k, unsigned h, const std::string& F,
                            double c, std::uint64_t seed, std::uint64_t limit,
                            const Common& common) {
    const BaseSetSpec spec{parse_base_kind(base), k, limit};
    const TargetDensity density(RegVarFn::parse(F), h);
    const double scale = c > 0.0 ? c : canonical_scale(k, h, density.omega());
    const SieveIndex index = obtain_sieve(spec, common);
    return sample_subbasis(index, density, scale, seed, limit);
}

int run_sample(const SampleArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
    const SampledSubbasis A = sample_from(a.base, a.k, a.h, a.F, a.c, a.seed, a.limit, common);
    if (!a.output.empty()) write_subbasis(a.output, A);
    if (!a.checkpoints.empty()) out << counting_csv(counting_report(A, a.checkpoints));
    const Admissibility adm = check_admissible(
        A.F, A.base, A.h,
        A.base.kind == BaseKind::PowersOfPrimes
            ? (A.F.kappa > 0 ? Theorem::MTp1i : Theorem::MTp1ii)
            : (A.F.kappa > 0 ? Theorem::MT1i : Theorem::MT1ii));
    if (!adm.pass) err << fmt::format("warning: not admissible: {}: {}\n", adm.reason, adm.detail);
    err << fmt::format("sample: elements={} clamp_count={} c={:.15g} seed={} limit={}{}\n",
                       A.elements.size(), A.clamp_count, A.c, A.seed, A.limit,
                       a.output.empty() ? "" : " output=" + a.output);
    return kExitOk;
}

int run_count(const CountArgs& a, const Common& common, std::ostream& out) {
    SampledSubbasis A;
    std::vector<std::uint64_t> elems;
    std::string provenance;
    if (!a.input.empty()) {
        A = read_subbasis(a.input);
        elems = A.elements;
        provenance = fmt::format("seed={},source={}", A.seed, a.input);
    } else {
        const std::uint64_t limit = a.limit ? a.limit : a.N;
        const SieveIndex index = obtain_sieve({parse_base_kind(a.base), a.k, limit}, common);
        elems.assign(index.elements().begin(), index.elements().end());
        A.base = index.spec();
        A.F = RegVarFn::parse(a.F);
        A.h = a.h;
        A.limit = limit;
        provenance = fmt::format("seed=none,source=full {} k={}", to_string(A.base.kind), A.base.k);
    }
    if (!a.checkpoints.empty()) {
        if (a.input.empty()) throw ConfigError("bad_input", "--checkpoints needs --input");
        emit(a.output, counting_csv(counting_report(A, a.checkpoints)), out);
        return kExitOk;
    }
    if (a.N == 0) throw ConfigError("bad_N", "--N is required");
    const CountMethod method = parse_count_method(a.method);
    RepOptions ro;
    ro.memory_budget = common.memory_budget;

    std::string text = fmt::format("# h={},mode={},method={},elements={},{}\n", a.h, a.weights,
                                   to_string(method), elems.size(), provenance);
    text += "n,value\n";
    if (a.weights == "none") {
        const RepTable t = rep_table(elems, a.h, a.N, method, ro);
        for (std::uint64_t n = 0; n <= a.N; ++n)
            if (t.counts[n]) text += fmt::format("{},{}\n", n, t.counts[n]);
    } else {
        const unsigned k = A.base.k;
        std::vector<double> w(elems.size());
        const TargetDensity density(A.F, a.h);
        const SieveIndex base = obtain_sieve({A.base.kind, k, std::max<std::uint64_t>(
                                                                   2, elems.empty() ? 2 : elems.back())},
                                             common);
        for (std::size_t i = 0; i < elems.size(); ++i) {
            const double x = static_cast<double>(elems[i]);
            if (a.weights == "expectation") {
                const double c = a.c > 0 ? a.c : (A.c > 0 ? A.c : 1.0);
                w[i] = c * density(x) / static_cast<double>(base.count(elems[i]));
            } else if (a.weights == "mtp" || a.weights == "wooley") {
                if (!(a.omega > 0)) throw ConfigError("bad_omega", "--omega is required for these weights");
                w[i] = std::pow(x, a.omega - 1.0 / k) * (a.weights == "mtp" ? std::log(x) : 1.0);
            } else {
                throw ConfigError("bad_weights", fmt::format("unknown weights '{}'", a.weights));
            }
        }
        const RepTable t = rep_table_weighted(elems, w, a.h, a.N, method, ro);
        for (std::uint64_t n = 0; n <= a.N; ++n)
            if (t.sums[n] != 0.0) text += fmt::format("{},{:.15g}\n", n, t.sums[n]);
    }
    emit(a.output, text, out);
    return kExitOk;
}

int run_weighted(bool goldbach, const WeightedArgs& a, const Common& common, std::ostream& out,
                 std::ostream& err) {
    const BaseSetSpec spec{goldbach ? BaseKind::PowersOfPrimes : BaseKind::PowersOfNaturals, a.k, 2};
    const std::uint64_t K = compute_K(a.k);
    auto cls = [&](std::uint64_t n) {
        return spec.kind == BaseKind::PowersOfNaturals || n % K == a.h % K;
    };
    TargetArgs t = a.targets;
    if (!goldbach) t.off_class = 0;
    const auto ns = pick_targets(t, cls);
    const VerifyOptions vo =
        verify_options(common, a.report, goldbach ? Band{0.8, 1.25} : Band{0.5, 2.0},
                       goldbach ? VerdictRule::FractionInBand : VerdictRule::MedianInBand);
    VerificationReport rep = goldbach ? verify_goldbach_weighted(a.k, a.h, a.omega, ns, a.Q, vo)
                                      : verify_waring_weighted(a.k, a.h, a.omega, ns, a.Q, vo);
    return finish_report(rep, a.report, common, out, err);
}

int run_concentration(const ConcentrationArgs& a, const Common& common, std::ostream& out,
                      std::ostream& err) {
    const SampledSubbasis A =
        a.input.empty() ? sample_from(a.base, a.k, a.h, a.F, a.c, a.seed,
                                      a.limit ? a.limit : a.n_hi, common)
                        : read_subbasis(a.input);
    const VerifyOptions vo =
        verify_options(common, a.report, Band{0.7, 1.3}, VerdictRule::FractionInBand);
    VerificationReport rep = verify_sampled_concentration(A, a.n_lo, a.n_hi, a.Q, vo);
    return finish_report(rep, a.report, common, out, err);
}

int run_diagnose(const DiagnoseArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
    VerifyOptions vo;
    vo.memory_budget = common.memory_budget;
    vo.work_budget = common.work_budget;
    VerificationReport rep =
        condition_diagnostics({parse_base_kind(a.base), a.k, 2}, a.ells, a.x_grid, vo);
    ReportArgs r;
    r.output = a.output;
    r.csv = a.csv;
    return finish_report(rep, r, common, out, err);
}

// Effective configuration of the global options and the selected
// subcommand chain, in a form accepted by --config.
std::string active_config(const CLI::App& app) {
    std::string path;
    for (const CLI::App* sub = &app;;) {
        const auto chosen = sub->get_subcommands();
        if (chosen.empty()) break;
        sub = chosen.front();
        path += (path.empty() ? "" : ".") + sub->get_name();
    }
    std::string words = path;
    std::replace(words.begin(), words.end(), '.', ' ');
    std::string text = "; subbasis " + words + "\n";
    std::istringstream all(app.config_to_str(true, false));
    for (std::string line; std::getline(all, line);) {
        const std::string key = line.substr(0, line.find('='));
        // Quoted list defaults become the unquoted form of parsed lists.
        if (line.ends_with("]\"") && line.compare(key.size(), 3, "=\"[") == 0)
            line = key + "=" + line.substr(key.size() + 2, line.size() - key.size() - 3);
        const auto dot = key.rfind('.');
        if (line.ends_with("=\"\"")) continue;  // unset paths and lists
        if (dot == std::string::npos || key.substr(0, dot) == path) text += line + '\n';
    }
    return text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Waring and Waring-Goldbach subbases: singular series, sampling, counting "
                 "and verification"};
    app.name("subbasis");
    // "-h" would collide with the summand-count option "--h".
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);
    app.allow_config_extras(false);
    app.set_config("--config", "", "INI config file; flags override file values");

    Common common;
    app.add_option("--threads", common.threads, "worker threads (0: hardware)")
        ->capture_default_str();
    app.add_option("--memory-budget", common.memory_budget, "bytes")->capture_default_str();
    app.add_option("--work-budget", common.work_budget, "elementary operations")
        ->default_str(real_str(common.work_budget));
    std::string manifest_out;
    app.add_option("--manifest", manifest_out, "write the full effective configuration here")
        ->configurable(false);

    SieveArgs sieve;
    auto* s = app.add_subcommand("sieve", "sieve a base set, optionally to a cache file");
    s->add_option("--base", sieve.base, "naturals or primes")->capture_default_str();
    s->add_option("--k", sieve.k, "exponent")->capture_default_str();
    s->add_option("--limit", sieve.limit, "largest element")->capture_default_str();
    s->add_option("-o,--output", sieve.output, "cache file (default: SUBBASIS_CACHE_DIR)");

    SingularArgs sing;
    auto* g = app.add_subcommand("singular", "truncated singular series");
    g->add_option("--variant", sing.variant, "waring or wg")->capture_default_str();
    g->add_option("--k", sing.k, "exponent")->capture_default_str();
    g->add_option("--h", sing.h, "number of summands")->capture_default_str();
    g->add_option("--n", sing.n, "target")->required();
    g->add_option("--Q", sing.Q, "truncation bound")->capture_default_str();
    g->add_option("--profile", sing.profile, "increasing Q list; one row per Q")->delimiter(',');
    g->add_option("--method", sing.method, "direct, evaluator or reference")->capture_default_str();
    g->add_flag("--header", sing.header, "print the CSV header");

    ExpsumArgs es;
    auto* e = app.add_subcommand("expsum", "exponential sums g, T, u");
    e->add_option("--sum", es.sum, "g, T or u")->capture_default_str();
    e->add_option("--alpha", es.alpha, "frequency")->default_str(real_str(es.alpha));
    e->add_option("--x", es.x, "summation bound")->required();
    e->add_option("--omega", es.omega, "weight exponent")->default_str(real_str(es.omega));
    e->add_option("--k", es.k, "exponent")->capture_default_str();
    e->add_option("--h", es.h, "tail range starts at x/h")->capture_default_str();
    e->add_option("--range", es.range, "full or tail")->capture_default_str();
    e->add_flag("--header", es.header, "print the CSV header");

    SampleArgs sa;
    auto* sp = app.add_subcommand("sample", "sample a subbasis");
    sp->add_option("--base", sa.base, "naturals or primes")->capture_default_str();
    sp->add_option("--k", sa.k, "exponent")->capture_default_str();
    sp->add_option("--h", sa.h, "number of summands")->capture_default_str();
    sp->add_option("--F", sa.F, "target c*x^kappa*log^a*loglog^b")->capture_default_str();
    sp->add_option("--c", sa.c, "sampling scale (0: canonical)")->default_str(real_str(sa.c));
    sp->add_option("--seed", sa.seed, "seed")->capture_default_str();
    sp->add_option("--limit", sa.limit, "largest candidate")->capture_default_str();
    sp->add_option("-o,--output", sa.output, "subbasis file");
    sp->add_option("--checkpoints", sa.checkpoints, "print the counting report at these x")
        ->delimiter(',');

    CountArgs ca;
    auto* ct = app.add_subcommand("count", "representation tables and counting reports");
    ct->add_option("--input", ca.input, "subbasis file (default: the full base set)");
    ct->add_option("--base", ca.base, "naturals or primes")->capture_default_str();
    ct->add_option("--k", ca.k, "exponent")->capture_default_str();
    ct->add_option("--limit", ca.limit, "base sieve limit (0: N)")->capture_default_str();
    ct->add_option("--h", ca.h, "number of summands")->capture_default_str();
    ct->add_option("--N", ca.N, "largest n")->capture_default_str();
    ct->add_option("--method", ca.method, "naive, mim or convolution")->capture_default_str();
    ct->add_option("--weights", ca.weights, "none, expectation, mtp or wooley")
        ->capture_default_str();
    ct->add_option("--omega", ca.omega, "weight exponent for mtp/wooley")->default_str(real_str(ca.omega));
    ct->add_option("--F", ca.F, "target for expectation weights without --input")
        ->capture_default_str();
    ct->add_option("--c", ca.c, "scale for expectation weights (0: from input)")
        ->default_str(real_str(ca.c));
    ct->add_option("--checkpoints", ca.checkpoints, "counting report at these x")->delimiter(',');
    ct->add_option("-o,--output", ca.output, "CSV path (stdout if empty)");

    auto* v = app.add_subcommand("verify", "verification experiments");
    v->require_subcommand(1);
    WeightedArgs gb;
    auto* vg = v->add_subcommand("goldbach", "weighted Waring-Goldbach main term");
    vg->add_option("--k", gb.k, "exponent")->capture_default_str();
    vg->add_option("--h", gb.h, "number of summands")->capture_default_str();
    vg->add_option("--omega", gb.omega, "weight exponent")->default_str(real_str(gb.omega));
    vg->add_option("--Q", gb.Q, "singular series truncation")->capture_default_str();
    add_target_options(vg, gb.targets);
    add_report_options(vg, gb.report, "0.8,1.25", "fraction", 0.8);

    WeightedArgs wa;
    wa.k = 2;
    wa.h = 9;
    wa.omega = 0.3;
    wa.Q = 1024;
    wa.targets.near = 1'000'000;
    auto* vw = v->add_subcommand("waring", "weighted Waring main term");
    vw->add_option("--k", wa.k, "exponent")->capture_default_str();
    vw->add_option("--h", wa.h, "number of summands")->capture_default_str();
    vw->add_option("--omega", wa.omega, "weight exponent")->default_str(real_str(wa.omega));
    vw->add_option("--Q", wa.Q, "singular series truncation")->capture_default_str();
    add_target_options(vw, wa.targets);
    add_report_options(vw, wa.report, "0.5,2", "median", 0.8);

    ConcentrationArgs co;
    auto* vc = v->add_subcommand("concentration", "sampled subbasis against S(n) F(n)");
    vc->add_option("--input", co.input, "subbasis file (default: sample from the flags below)");
    vc->add_option("--base", co.base, "naturals or primes")->capture_default_str();
    vc->add_option("--k", co.k, "exponent")->capture_default_str();
    vc->add_option("--h", co.h, "number of summands")->capture_default_str();
    vc->add_option("--F", co.F, "target")->capture_default_str();
    vc->add_option("--c", co.c, "sampling scale (0: canonical)")->default_str(real_str(co.c));
    vc->add_option("--seed", co.seed, "seed")->capture_default_str();
    vc->add_option("--limit", co.limit, "sampling limit (0: n-hi)")->capture_default_str();
    vc->add_option("--n-lo", co.n_lo, "window start")->capture_default_str();
    vc->add_option("--n-hi", co.n_hi, "window end")->capture_default_str();
    vc->add_option("--Q", co.Q, "singular series truncation")->capture_default_str();
    add_report_options(vc, co.report, "0.7,1.3", "fraction", 0.9);

    DiagnoseArgs di;
    auto* dg = app.add_subcommand("diagnose", "regular variation, energy and weighted counts");
    dg->add_option("--base", di.base, "naturals or primes")->capture_default_str();
    dg->add_option("--k", di.k, "exponent")->capture_default_str();
    dg->add_option("--ells", di.ells, "energy orders")->delimiter(',')->default_str(list_str(di.ells));
    dg->add_option("--x-grid", di.x_grid, "grid of x")
        ->delimiter(',')
        ->default_str(list_str(di.x_grid));
    dg->add_option("-o,--output", di.output, "JSON report path (stdout if empty)");
    dg->add_option("--csv", di.csv, "CSV mirror of the report rows");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& ex) {
        std::string msg = ex.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << fmt::format("error: usage: {}\n", msg);
        return kExitUsage;
    }

    try {
        set_thread_count(common.threads);
        const std::string config = active_config(app);
        if (!manifest_out.empty()) emit(manifest_out, config, out);
        std::istringstream lines(config);
        for (std::string line; std::getline(lines, line);) {
            const std::string key = line.substr(0, line.find('='));
            if (key == "threads" || key.ends_with(".output") || key.ends_with(".csv")) continue;
            common.reproduce += line + '\n';
        }

        if (s->parsed()) return run_sieve(sieve, common, out);
        if (g->parsed()) return run_singular(sing, common, out);
        if (e->parsed()) return run_expsum(es, common, out);
        if (sp->parsed()) return run_sample(sa, common, out, err);
        if (ct->parsed()) return run_count(ca, common, out);
        if (vg->parsed()) return run_weighted(true, gb, common, out, err);
        if (vw->parsed()) return run_weighted(false, wa, common, out, err);
        if (vc->parsed()) return run_concentration(co, common, out, err);
        if (dg->parsed()) return run_diagnose(di, common, out, err);
        err << "error: usage: no subcommand\n";
        return kExitUsage;
    } catch (const ResourceError& ex) {
        err << fmt::format("error: {}: {}\n", ex.code(), ex.what());
        return kExitResource;
    } catch (const Error& ex) {
        err << fmt::format("error: {}: {}\n", ex.code(), ex.what());
        return kExitUsage;
    } catch (const std::bad_alloc&) {
        err << "error: memory: allocation failed\n";
        return kExitResource;
    } catch (const std::exception& ex) {
        err << fmt::format("error: internal: {}\n", ex.what());
        return kExitUsage;
    }
}

}  // namespace subbasis::cli
