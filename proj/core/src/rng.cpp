#include "lrm/rng.hpp"

#include <cmath>

namespace lrm {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t path, Stream stream) noexcept {
    const std::uint64_t base = splitmix64(master + (path + 1) * 0x9E3779B97F4A7C15ULL);
    return splitmix64(base ^ static_cast<std::uint64_t>(stream));
}

double Rng::exponential() noexcept { return -std::log(uniform()); }

}  // namespace lrm
