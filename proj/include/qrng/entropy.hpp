#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qrng/reconstruction.hpp"

namespace qrng {

/// Fixed-edge histogram. Values outside [edges.front(), edges.back()] are
/// tallied in `outside` and excluded from `total`; the right edge itself
/// falls in the last bin.
struct Histogram {
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    std::uint64_t outside = 0;

    static Histogram uniform(double lo, double hi, std::size_t bins);

    std::size_t bins() const { return counts.size(); }
    void add(double x);
    /// Bin-wise sum; both histograms must share edges.
    void merge(const Histogram& other);
    std::vector<double> centers() const;
    std::vector<double> probabilities() const;
};

/// OpenMP-sharded histogram; shards are merged in chunk order, so the result
/// equals reference::make_histogram exactly.
Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

/// Closed-form reference distribution.
struct ReferenceLaw {
    enum class Kind { gaussian, uniform, arcsine };

    Kind kind = Kind::uniform;
    double p1 = 0.0;  // gaussian: mean; uniform: a; arcsine: amplitude A
    double p2 = 0.0;  // gaussian: variance; uniform: b

    static ReferenceLaw gaussian(double mean, double variance);
    static ReferenceLaw uniform(double a, double b);
    static ReferenceLaw arcsine(double amplitude);
    /// Gaussian with the sample mean and (biased) variance of `values`.
    static ReferenceLaw fitted_gaussian(std::span<const double> values);

    void validate() const;
    double cdf(double x) const;
};

/// Density of the reference law; arcsine is 1 / (pi sqrt(A^2 - x^2)) inside
/// (-A, A) and 0 elsewhere.
double reference_pdf(const ReferenceLaw& ref, double x);

/// -log2(max_i count_i / total).
double min_entropy(std::span<const std::uint64_t> counts);

/// Min-entropy of a symbol stream over its 2^n alphabet.
double min_entropy(const SymbolStream& symbols);

/// Symbol counts over the full 2^n alphabet.
std::vector<std::uint64_t> symbol_counts(const SymbolStream& symbols);

struct KldResult {
    double bits = 0.0;
    bool support_mismatch = false;  // some p_i > 0 where q_i = 0; bits is +inf
};

/// D(p || q) = sum p_i log2(p_i / q_i) over bins with p_i > 0, q_i the
/// reference mass on each bin from CDF differences.
KldResult kld(const Histogram& hist, const ReferenceLaw& ref);

/// R(k) = mean((x_i - mu)(x_{i+k} - mu)) / var with biased 1/N normalization,
/// k = 0..max_lag. Chunked OpenMP reduction, deterministic for any thread
/// count.
std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);

/// Total-variation distance between two histograms with equal edges.
double total_variation(const Histogram& a, const Histogram& b);

}  // namespace qrng
