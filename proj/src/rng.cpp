#include "mfg/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mfg {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline uint32_t mulhi32(uint32_t a, uint32_t b) {
    return static_cast<uint32_t>((static_cast<uint64_t>(a) * b) >> 32);
}

inline void philox_round(std::array<uint32_t, 4>& c, PhiloxKey k) {
    const uint32_t hi0 = mulhi32(kPhiloxM0, c[0]);
    const uint32_t lo0 = kPhiloxM0 * c[0];
    const uint32_t hi1 = mulhi32(kPhiloxM1, c[2]);
    const uint32_t lo1 = kPhiloxM1 * c[2];
    c = {hi1 ^ c[1] ^ k.k0, lo1, hi0 ^ c[3] ^ k.k1, lo0};
}

}  // namespace

std::array<uint32_t, 4> philox4x32(PhiloxCounter ctr, PhiloxKey key) {
    std::array<uint32_t, 4> c = {ctr.c0, ctr.c1, ctr.c2, ctr.c3};
    PhiloxKey k = key;
    for (int round = 0; round < 10; ++round) {
        philox_round(c, k);
        k.k0 += kWeyl0;
        k.k1 += kWeyl1;
    }
    return c;
}

double philox_uniform(PhiloxCounter ctr, PhiloxKey key) {
    const auto w = philox4x32(ctr, key);
    return (static_cast<double>(w[0]) + 0.5) * 0x1p-32;
}

double philox_normal(PhiloxCounter ctr, PhiloxKey key) {
    const auto w = philox4x32(ctr, key);
    const double u1 = (static_cast<double>(w[0]) + 0.5) * 0x1p-32;
    const double u2 = (static_cast<double>(w[1]) + 0.5) * 0x1p-32;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

namespace {
// Counter domain words: keeps the W draws, the B draws and the
// initial-condition draws in disjoint regions of the counter space.
constexpr uint32_t kDomainW = 0u;
constexpr uint32_t kDomainB = 1u;
constexpr uint32_t kDomainInit = 2u;
}  // namespace

NoiseBundle::NoiseBundle(double dt, int n_steps, int n_streams,
                         uint32_t master_seed, uint32_t replica_index)
    : dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      n_steps_(n_steps),
      n_streams_(n_streams),
      seed_(master_seed),
      replica_(replica_index),
      key_{master_seed, replica_index} {
    if (dt <= 0.0) throw std::invalid_argument("NoiseBundle: dt must be positive");
    if (n_steps < 1) throw std::invalid_argument("NoiseBundle: n_steps must be >= 1");
    if (n_streams < 0) throw std::invalid_argument("NoiseBundle: n_streams must be >= 0");
    w_path_.resize(static_cast<size_t>(n_steps) + 1, 0.0);
    for (int n = 0; n < n_steps; ++n) {
        const double z = philox_normal({kDomainW, 0u, static_cast<uint32_t>(n), 0u}, key_);
        w_path_[static_cast<size_t>(n) + 1] = w_path_[static_cast<size_t>(n)] + sqrt_dt_ * z;
    }
}

double NoiseBundle::dW(int step) const {
    return w_path_[static_cast<size_t>(step) + 1] - w_path_[static_cast<size_t>(step)];
}

double NoiseBundle::dB(int stream, int step) const {
    const double z = philox_normal(
        {kDomainB, static_cast<uint32_t>(stream), static_cast<uint32_t>(step), 0u}, key_);
    return sqrt_dt_ * z;
}

double NoiseBundle::init_normal(int stream) const {
    return philox_normal({kDomainInit, static_cast<uint32_t>(stream), 0u, 0u}, key_);
}

}  // namespace mfg
