#pragma once

#include <cstdint>

namespace atrp {

/// Purpose of a random stream. Each simulated quantity draws from its own
/// stream so that perturbing one model component leaves every other draw
/// untouched (common random numbers across scenarios).
enum class StreamRole : std::uint64_t {
    Occurrence = 1,
    ReportingDelay,
    SettlementDelay,
    Indemnity,
    Expense,
    Copula,
    TrpDelay,
    Parameters,
    Resample,
    Auxiliary,
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xoshiro256** generator seeded from a counter key.
///
/// A stream is identified by (seed, path, item, role); the same key always
/// yields the same sequence regardless of which worker creates it.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal by inversion (one uniform per variate).
    double normal();
    /// Unit-rate exponential by inversion.
    double exponential() noexcept;

private:
    std::uint64_t s_[4];
};

RandomStream make_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t item,
                         StreamRole role) noexcept;

}  // namespace atrp
