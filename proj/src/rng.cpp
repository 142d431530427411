#include "atrp/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

namespace atrp {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t s = a ^ (b * 0xd1342543de82ef95ULL);
    return splitmix64(s);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t key) noexcept {
    std::uint64_t s = key;
    for (auto& word : s_) word = splitmix64(s);
}

std::uint64_t RandomStream::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomStream::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform());
}

double RandomStream::exponential() noexcept { return -std::log(uniform()); }

RandomStream make_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t item,
                         StreamRole role) noexcept {
    std::uint64_t key = mix(seed, 0x5851f42d4c957f2dULL);
    key = mix(key, path);
    key = mix(key, item);
    key = mix(key, static_cast<std::uint64_t>(role));
    return RandomStream(key);
}

}  // namespace atrp
