#include "qrng/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qrng/errors.hpp"
#include "qrng/exec.hpp"

namespace qrng {

using detail::require;
using std::numbers::pi;

Histogram Histogram::uniform(double lo, double hi, std::size_t bins) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "histogram range must satisfy lo < hi");
    require(bins >= 1, "histogram needs at least one bin");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    }
    h.edges[bins] = hi;
    h.counts.assign(bins, 0);
    return h;
}

void Histogram::add(double x) {
    const double lo = edges.front();
    const double hi = edges.back();
    if (!(x >= lo && x <= hi)) {
        ++outside;
        return;
    }
    const std::size_t nb = counts.size();
    auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(nb));
    b = std::min(b, nb - 1);
    // The arithmetic guess can be one bin off near an edge.
    while (b > 0 && x < edges[b]) --b;
    while (b + 1 < nb && x >= edges[b + 1]) ++b;
    ++counts[b];
    ++total;
}

void Histogram::merge(const Histogram& other) {
    require(edges == other.edges, "histograms must share bin edges to merge");
    for (std::size_t b = 0; b < counts.size(); ++b) counts[b] += other.counts[b];
    total += other.total;
    outside += other.outside;
}

std::vector<double> Histogram::centers() const {
    std::vector<double> c(counts.size());
    for (std::size_t b = 0; b < c.size(); ++b) c[b] = 0.5 * (edges[b] + edges[b + 1]);
    return c;
}

std::vector<double> Histogram::probabilities() const {
    std::vector<double> p(counts.size(), 0.0);
    if (total == 0) return p;
    for (std::size_t b = 0; b < p.size(); ++b) {
        p[b] = static_cast<double>(counts[b]) / static_cast<double>(total);
    }
    return p;
}

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
    const Histogram empty = Histogram::uniform(lo, hi, bins);
    const auto chunks = static_cast<std::int64_t>(chunk_count(values.size()));
    std::vector<Histogram> shards(static_cast<std::size_t>(chunks), empty);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t i0 = static_cast<std::size_t>(c) * kChunk;
        const std::size_t i1 = std::min(values.size(), i0 + kChunk);
        Histogram& h = shards[static_cast<std::size_t>(c)];
        for (std::size_t i = i0; i < i1; ++i) h.add(values[i]);
    }
    Histogram out = empty;
    for (const Histogram& h : shards) out.merge(h);
    return out;
}

ReferenceLaw ReferenceLaw::gaussian(double mean, double variance) {
    ReferenceLaw r{Kind::gaussian, mean, variance};
    r.validate();
    return r;
}

ReferenceLaw ReferenceLaw::uniform(double a, double b) {
    ReferenceLaw r{Kind::uniform, a, b};
    r.validate();
    return r;
}

ReferenceLaw ReferenceLaw::arcsine(double amplitude) {
    ReferenceLaw r{Kind::arcsine, amplitude, 0.0};
    r.validate();
    return r;
}

ReferenceLaw ReferenceLaw::fitted_gaussian(std::span<const double> values) {
    require(!values.empty(), "cannot fit a Gaussian to an empty sample");
    double mean = 0.0;
    for (double x : values) mean += x;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double x : values) var += (x - mean) * (x - mean);
    var /= static_cast<double>(values.size());
    if (!(var > 0.0)) throw DegenerateError("sample has zero variance; no Gaussian fit");
    return gaussian(mean, var);
}

void ReferenceLaw::validate() const {
    switch (kind) {
        case Kind::gaussian:
            require(std::isfinite(p1) && std::isfinite(p2) && p2 > 0.0, "Gaussian variance must be positive");
            break;
        case Kind::uniform:
            require(std::isfinite(p1) && std::isfinite(p2) && p1 < p2, "uniform law needs a < b");
            break;
        case Kind::arcsine:
            require(std::isfinite(p1) && p1 > 0.0, "arcsine amplitude must be positive");
            break;
    }
}

double ReferenceLaw::cdf(double x) const {
    switch (kind) {
        case Kind::gaussian:
            return 0.5 * std::erfc(-(x - p1) / std::sqrt(2.0 * p2));
        case Kind::uniform:
            if (x <= p1) return 0.0;
            if (x >= p2) return 1.0;
            return (x - p1) / (p2 - p1);
        case Kind::arcsine:
            if (x <= -p1) return 0.0;
            if (x >= p1) return 1.0;
            return 0.5 + std::asin(x / p1) / pi;
    }
    return 0.0;
}

double reference_pdf(const ReferenceLaw& ref, double x) {
    switch (ref.kind) {
        case ReferenceLaw::Kind::gaussian: {
            const double d = x - ref.p1;
            return std::exp(-d * d / (2.0 * ref.p2)) / std::sqrt(2.0 * pi * ref.p2);
        }
        case ReferenceLaw::Kind::uniform:
            return (x >= ref.p1 && x < ref.p2) ? 1.0 / (ref.p2 - ref.p1) : 0.0;
        case ReferenceLaw::Kind::arcsine: {
            const double a = ref.p1;
            if (!(x > -a && x < a)) return 0.0;
            return 1.0 / (pi * std::sqrt(a * a - x * x));
        }
    }
    return 0.0;
}

double min_entropy(std::span<const std::uint64_t> counts) {
    require(!counts.empty(), "min-entropy needs a nonempty count vector");
    std::uint64_t total = 0;
    std::uint64_t peak = 0;
    for (std::uint64_t c : counts) {
        total += c;
        peak = std::max(peak, c);
    }
    require(total >= 1, "min-entropy needs at least one observation");
    return -std::log2(static_cast<double>(peak) / static_cast<double>(total));
}

std::vector<std::uint64_t> symbol_counts(const SymbolStream& symbols) {
    require(symbols.bits_per_symbol >= 1 && symbols.bits_per_symbol <= 16,
            "bits per symbol must lie in [1, 16]");
    const std::size_t alphabet = std::size_t{1} << symbols.bits_per_symbol;
    std::vector<std::uint64_t> counts(alphabet, 0);
    for (std::uint16_t s : symbols.symbols) {
        require(s < alphabet, "symbol exceeds its alphabet");
        ++counts[s];
    }
    return counts;
}

double min_entropy(const SymbolStream& symbols) { return min_entropy(symbol_counts(symbols)); }

KldResult kld(const Histogram& hist, const ReferenceLaw& ref) {
    ref.validate();
    require(hist.total >= 1, "KLD needs a nonempty histogram");
    KldResult out;
    const double total = static_cast<double>(hist.total);
    double sum = 0.0;
    for (std::size_t b = 0; b < hist.bins(); ++b) {
        if (hist.counts[b] == 0) continue;
        const double p = static_cast<double>(hist.counts[b]) / total;
        const double q = ref.cdf(hist.edges[b + 1]) - ref.cdf(hist.edges[b]);
        if (!(q > 0.0)) {
            out.support_mismatch = true;
            out.bits = std::numeric_limits<double>::infinity();
            return out;
        }
        sum += p * std::log2(p / q);
    }
    out.bits = sum;
    return out;
}

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
    const std::size_t n = series.size();
    require(n > max_lag, "series must be longer than max_lag");
    const auto chunks = static_cast<std::int64_t>(chunk_count(n));

    std::vector<double> part(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t i0 = static_cast<std::size_t>(c) * kChunk;
        const std::size_t i1 = std::min(n, i0 + kChunk);
        double s = 0.0;
        for (std::size_t i = i0; i < i1; ++i) s += series[i];
        part[static_cast<std::size_t>(c)] = s;
    }
    double mu = 0.0;
    for (double s : part) mu += s;
    mu /= static_cast<double>(n);

    const std::size_t lags = max_lag + 1;
    std::vector<double> lag_part(static_cast<std::size_t>(chunks) * lags, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t i0 = static_cast<std::size_t>(c) * kChunk;
        const std::size_t i1 = std::min(n, i0 + kChunk);
        double* acc = &lag_part[static_cast<std::size_t>(c) * lags];
        for (std::size_t k = 0; k < lags; ++k) {
            double s = 0.0;
            const std::size_t end = std::min(i1, n - k);
            for (std::size_t i = i0; i < end; ++i) s += (series[i] - mu) * (series[i + k] - mu);
            acc[k] = s;
        }
    }
    std::vector<double> r(lags, 0.0);
    for (std::int64_t c = 0; c < chunks; ++c) {
        for (std::size_t k = 0; k < lags; ++k) r[k] += lag_part[static_cast<std::size_t>(c) * lags + k];
    }
    const double var = r[0];
    if (!(var > 0.0)) throw DegenerateError("series has zero variance; autocorrelation undefined");
    for (double& v : r) v /= var;
    r[0] = 1.0;
    return r;
}

double total_variation(const Histogram& a, const Histogram& b) {
    require(a.edges == b.edges, "histograms must share bin edges");
    require(a.total > 0 && b.total > 0, "histograms must be nonempty");
    const auto pa = a.probabilities();
    const auto pb = b.probabilities();
    double d = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k) d += std::abs(pa[k] - pb[k]);
    return 0.5 * d;
}

}  // namespace qrng
