#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace credo {

// Inverse standard normal CDF. Acklam's rational approximation polished with
// one Halley step against the erfc-based CDF; accurate to well below the
// 1e-9 envelope the library needs.
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double z);

// Empirical quantile with linear interpolation between order statistics at
// 1-indexed position 1 + (n-1)p. This is the single convention used for
// envelope trimming and for the scarcity reference quantiles.
double linear_quantile(std::span<const double> values, double p);

double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);  // n-1 denominator

// Seedable deterministic RNG. std::mt19937_64 output is pinned by the
// standard; the distribution transforms are implemented here rather than via
// std:: distributions so streams are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound); bound >= 1.
    std::uint64_t uniform_below(std::uint64_t bound) { return engine_() % bound; }

    // Standard normal via the inverse-CDF transform.
    double normal() { return normal_quantile(uniform()); }

    // Gamma(shape, scale 1), Marsaglia-Tsang.
    double gamma(double shape);

    // Inverse-gamma(shape, scale).
    double inverse_gamma(double shape, double scale) { return scale / gamma(shape); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace credo
