#include "subbasis/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "subbasis/error.hpp"
#include "subbasis/parallel.hpp"

namespace subbasis {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53, kM1 = 0xCD9E8D57;
    constexpr std::uint32_t kW0 = 0x9E3779B9, kW1 = 0xBB67AE85;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

double uniform_at(std::uint64_t seed, std::uint64_t n) {
    const auto out = philox4x32_10(
        {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32), 0, 0},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    const std::uint64_t bits = (std::uint64_t{out[0]} << 32 | out[1]) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

double inclusion_probability(const TargetDensity& f, double c, std::uint64_t n, std::uint64_t B) {
    return c * f(static_cast<double>(n)) / static_cast<double>(B);
}

SampledSubbasis sample_subbasis(const SieveIndex& base, const TargetDensity& density, double c,
                                std::uint64_t seed, std::uint64_t limit) {
    if (!(c > 0.0)) throw ConfigError("bad_scale", "sampling scale c must be positive");
    if (limit > base.spec().limit)
        throw ResourceError("beyond_sieve", fmt::format("sampling limit {} exceeds sieve limit {}",
                                                        limit, base.spec().limit));
    const auto elems = base.elements_up_to(limit);

    constexpr std::size_t kBlock = std::size_t{1} << 16;
    const std::size_t n_blocks = (elems.size() + kBlock - 1) / kBlock;
    std::vector<std::vector<std::uint64_t>> kept(n_blocks);
    std::vector<std::uint64_t> clamped(n_blocks, 0);
    parallel_blocks(n_blocks, [&](std::size_t b) {
        const std::size_t start = b * kBlock;
        const std::size_t stop = std::min(elems.size(), start + kBlock);
        for (std::size_t i = start; i < stop; ++i) {
            // The element at position i has rank B(n) = i + 1.
            const double p = inclusion_probability(density, c, elems[i], i + 1);
            if (p >= 1.0) ++clamped[b];
            if (uniform_at(seed, elems[i]) < p) kept[b].push_back(elems[i]);
        }
    });

    SampledSubbasis A;
    A.base = base.spec();
    A.F = density.F();
    A.h = density.h();
    A.c = c;
    A.seed = seed;
    A.limit = limit;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        A.elements.insert(A.elements.end(), kept[b].begin(), kept[b].end());
        A.clamp_count += clamped[b];
    }
    return A;
}

std::vector<CountingRow> counting_report(const SampledSubbasis& A,
                                         const std::vector<std::uint64_t>& checkpoints) {
    const TargetDensity f(A.F, A.h);
    std::vector<CountingRow> rows;
    for (std::uint64_t x : checkpoints) {
        if (x > A.limit)
            throw ConfigError("bad_checkpoint",
                              fmt::format("checkpoint {} exceeds sampling limit {}", x, A.limit));
        CountingRow row;
        row.x = x;
        row.count = static_cast<std::uint64_t>(
            std::upper_bound(A.elements.begin(), A.elements.end(), x) - A.elements.begin());
        row.predicted = A.c * (A.base.beta() / f.omega()) * f(static_cast<double>(x));
        row.ratio = static_cast<double>(row.count) / row.predicted;
        row.low_mass = x < 1000;
        rows.push_back(row);
    }
    return rows;
}

std::string subbasis_header(const SampledSubbasis& A) {
    return fmt::format(
        "# base={},k={},kappa={:.15g},psi={:.15g},{:.15g},c={:.15g},h={},seed={},limit={},"
        "Fscale={:.15g},rng={}",
        to_string(A.base.kind), A.base.k, A.F.kappa, A.F.log_power, A.F.loglog_power, A.c, A.h,
        A.seed, A.limit, A.F.c, kGeneratorName);
}

void write_subbasis(const std::filesystem::path& path, const SampledSubbasis& A) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("io", fmt::format("cannot write '{}'", path.string()));
    out << subbasis_header(A) << '\n';
    for (std::uint64_t e : A.elements) out << e << '\n';
    if (!out) throw ConfigError("io", fmt::format("short write to '{}'", path.string()));
}

namespace {

double to_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("bad_subbasis", fmt::format("bad number '{}' in subbasis header", s));
    return v;
}

std::uint64_t to_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("bad_subbasis", fmt::format("bad integer '{}' in subbasis header", s));
    return v;
}

}  // namespace

SampledSubbasis read_subbasis(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("io", fmt::format("cannot read '{}'", path.string()));
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw ConfigError("bad_subbasis", "missing subbasis header line");

    // Split on commas; a piece without '=' continues the previous value.
    std::map<std::string, std::string> kv;
    std::string last;
    std::size_t pos = 2;
    while (pos <= line.size()) {
        const std::size_t comma = std::min(line.find(',', pos), line.size());
        const std::string piece = line.substr(pos, comma - pos);
        const std::size_t eq = piece.find('=');
        if (eq == std::string::npos) {
            if (last.empty()) throw ConfigError("bad_subbasis", "malformed subbasis header");
            kv[last] += "," + piece;
        } else {
            last = piece.substr(0, eq);
            kv[last] = piece.substr(eq + 1);
        }
        pos = comma + 1;
    }
    auto get = [&](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw ConfigError("bad_subbasis", fmt::format("subbasis header lacks '{}'", key));
        return it->second;
    };

    SampledSubbasis A;
    A.base.kind = parse_base_kind(get("base"));
    A.base.k = static_cast<unsigned>(to_u64(get("k")));
    A.F.kappa = to_double(get("kappa"));
    const std::string psi = get("psi");
    const std::size_t comma = psi.find(',');
    if (comma == std::string::npos) throw ConfigError("bad_subbasis", "psi needs two exponents");
    A.F.log_power = to_double(psi.substr(0, comma));
    A.F.loglog_power = to_double(psi.substr(comma + 1));
    A.c = to_double(get("c"));
    A.h = static_cast<unsigned>(to_u64(get("h")));
    A.seed = to_u64(get("seed"));
    A.limit = to_u64(get("limit"));
    A.base.limit = A.limit;
    A.F.c = kv.count("Fscale") ? to_double(kv["Fscale"]) : 1.0;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::uint64_t v = to_u64(line);
        if (!A.elements.empty() && v <= A.elements.back())
            throw ConfigError("bad_subbasis", "subbasis elements must be strictly increasing");
        A.elements.push_back(v);
    }
    return A;
}

}  // namespace subbasis
