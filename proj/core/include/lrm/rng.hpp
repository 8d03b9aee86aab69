#pragma once

#include <cstdint>
#include <random>

namespace lrm {

/// SplitMix64 finalizer. Used to turn (master seed, path, stream) triples
/// into well-separated engine seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Random streams drawn per simulated path.
enum class Stream : std::uint64_t { chain = 0, lifetimes = 1, price = 2, resample = 3 };

/// Seed for one stream of one path:
///   splitmix64(splitmix64(master + (path + 1) * 0x9E3779B97F4A7C15) ^ stream)
/// Depends only on its arguments, so results do not depend on how paths are
/// distributed across workers.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t path, Stream stream) noexcept;

class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }
    /// Unit-rate exponential.
    double exponential() noexcept;
    double normal() { return normal_(engine_); }

    /// Index drawn from a discrete law given by nonnegative weights.
    template <class Weights>
    int categorical(const Weights& w) noexcept {
        double total = 0.0;
        for (int i = 0; i < static_cast<int>(w.size()); ++i) total += w[i];
        double target = uniform() * total;
        int last_positive = 0;
        for (int i = 0; i < static_cast<int>(w.size()); ++i) {
            if (w[i] <= 0.0) continue;
            last_positive = i;
            if (target < w[i]) return i;
            target -= w[i];
        }
        return last_positive;
    }

    std::mt19937_64& engine() noexcept { return engine_; }

   private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace lrm
