#pragma once

#include <array>
#include <cstdint>

namespace sdegbm {

// Counter-based generator (Philox4x64-10). Each (seed, stream) pair is an
// independent stream indexed purely by a draw counter, so path simulations
// replay bit-exactly no matter how work is scheduled across workers.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double next_uniform();  // open interval (0,1)
    double next_normal();   // standard normal via inverse CDF

    static std::array<std::uint64_t, 4> philox_block(
        std::array<std::uint64_t, 4> counter, std::array<std::uint64_t, 2> key);

private:
    std::array<std::uint64_t, 2> key_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 4> buf_{};
    int lane_ = 4;
};

// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
// Deterministic and accurate to ~1e-15 over (0,1).
double normal_icdf(double p);

}  // namespace sdegbm
