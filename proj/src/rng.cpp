#include "sdegbm/rng.hpp"

#include <cmath>

#include "sdegbm/errors.hpp"

namespace sdegbm {

namespace {

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

}  // namespace

std::array<std::uint64_t, 4> RandomStream::philox_block(
    std::array<std::uint64_t, 4> ctr, std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : key_{seed, stream} {}

std::uint64_t RandomStream::next_u64() {
    if (lane_ == 4) {
        buf_ = philox_block({block_, 0, 0, 0}, key_);
        ++block_;
        lane_ = 0;
    }
    return buf_[lane_++];
}

double RandomStream::next_uniform() {
    // 53 random bits onto (0,1); the half-ulp offset keeps 0 and 1 out.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_normal() { return normal_icdf(next_uniform()); }

namespace {

// Wichura AS 241 (PPND16) rational coefficients; arrays run from the
// highest power down so Horner evaluation reads left to right.
constexpr double kCentralNum[8] = {
    2.5090809287301226727e3, 3.3430575583588128105e4, 6.7265770927008700853e4,
    4.5921953931549871457e4, 1.3731693765509461125e4, 1.9715909503065514427e3,
    1.3314166789178437745e2, 3.3871328727963666080e0};
constexpr double kCentralDen[8] = {
    5.2264952788528545610e3, 2.8729085735721942674e4, 3.9307895800092710610e4,
    2.1213794301586595867e4, 5.3941960214247511077e3, 6.8718700749205790830e2,
    4.2313330701600911252e1, 1.0};
constexpr double kMidNum[8] = {
    7.74545014278341407640e-4, 2.27238449892691845833e-2,
    2.41780725177450611770e-1, 1.27045825245236838258e0,
    3.64784832476320460504e0,  5.76949722146069140550e0,
    4.63033784615654529590e0,  1.42343711074968357734e0};
constexpr double kMidDen[8] = {
    1.05075007164441684324e-9, 5.47593808499534494600e-4,
    1.51986665636164571966e-2, 1.48103976427480074590e-1,
    6.89767334985100004550e-1, 1.67638483018380384940e0,
    2.05319162663775882187e0,  1.0};
constexpr double kTailNum[8] = {
    2.01033439929228813265e-7, 2.71155556874348757815e-5,
    1.24266094738807843860e-3, 2.65321895265761230930e-2,
    2.96560571828504891230e-1, 1.78482653991729133580e0,
    5.46378491116411436990e0,  6.65790464350110377720e0};
constexpr double kTailDen[8] = {
    2.04426310338993978564e-15, 1.42151175831644588870e-7,
    1.84631831751005468180e-5,  7.86869131145613259100e-4,
    1.48753612908506148525e-2,  1.36929880922735805310e-1,
    5.99832206555887937690e-1,  1.0};

double rational8(const double (&num)[8], const double (&den)[8], double r) {
    double n = num[0], d = den[0];
    for (int i = 1; i < 8; ++i) {
        n = n * r + num[i];
        d = d * r + den[i];
    }
    return n / d;
}

}  // namespace

double normal_icdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("normal_icdf: p outside (0,1)");

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * rational8(kCentralNum, kCentralDen, r);
    }

    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    const double val = (r <= 5.0) ? rational8(kMidNum, kMidDen, r - 1.6)
                                  : rational8(kTailNum, kTailDen, r - 5.0);
    return (q < 0.0) ? -val : val;
}

}  // namespace sdegbm
