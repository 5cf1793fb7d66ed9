#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace apidm {

/// splitmix64 finalizer; derives independent stream seeds from one base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded generator with distribution helpers defined here rather than by the
/// standard library, so draws are identical across standard library vendors.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive.
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return static_cast<std::size_t>(x % bound);
    }

    /// Uniform integer in [lo, hi].
    long between(long lo, long hi) {
        return lo + static_cast<long>(below(static_cast<std::size_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

    /// Index drawn proportionally to non-negative weights; weights must not all be zero.
    template <class Weights>
    std::size_t weighted(const Weights& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        std::size_t last_positive = 0;
        std::size_t i = 0;
        for (double w : weights) {
            if (w > 0.0) {
                if (u < w) return i;
                u -= w;
                last_positive = i;
            }
            ++i;
        }
        return last_positive;
    }

    std::string state() const {
        std::ostringstream out;
        out << engine_;
        return out.str();
    }

    void restore(const std::string& state) {
        std::istringstream in(state);
        in >> engine_;
    }

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace apidm
