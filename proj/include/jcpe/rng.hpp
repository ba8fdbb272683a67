#ifndef JCPE_RNG_HPP
#define JCPE_RNG_HPP

#include <cstdint>
#include <random>

namespace jcpe::rng {

/// Role tag separating the independent random streams used in one trial.
enum class Role : std::uint64_t {
    DataBits = 1,
    Phase = 2,
    Noise = 3,
    Tuning = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a stream seed from (master seed, combination id, frame index, role).
/// The derivation is order-independent across frames so trials can run on any
/// number of workers and still reproduce bit-exactly.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t combo,
                                 std::uint64_t frame, Role role) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (combo * 0xd1342543de82ef95ULL + 1));
    s = splitmix64(s ^ (frame * 0xaf251af3b0f025b5ULL + 2));
    s = splitmix64(s ^ static_cast<std::uint64_t>(role));
    return s;
}

using Engine = std::mt19937_64;

inline Engine make_stream(std::uint64_t master, std::uint64_t combo,
                          std::uint64_t frame, Role role) {
    return Engine(derive_seed(master, combo, frame, role));
}

} // namespace jcpe::rng

#endif
