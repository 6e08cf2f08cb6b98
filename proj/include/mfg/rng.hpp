#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace mfg {

// Counter-based generator (Philox4x32-10). A draw is addressed by
// (key, counter); there is no generator state to carry around, which is
// what makes nested reuse of noise streams across ensemble sizes and
// worker counts well defined: the same address always yields the same
// bits.
struct PhiloxKey {
    uint32_t k0 = 0;
    uint32_t k1 = 0;
};

struct PhiloxCounter {
    uint32_t c0 = 0;  // domain word
    uint32_t c1 = 0;  // stream id
    uint32_t c2 = 0;  // step index
    uint32_t c3 = 0;  // sub-draw index
};

std::array<uint32_t, 4> philox4x32(PhiloxCounter ctr, PhiloxKey key);

// One standard normal per (key, counter) address, via Box-Muller on the
// first two output words.
double philox_normal(PhiloxCounter ctr, PhiloxKey key);

// Uniform in (0,1) from the first output word.
double philox_uniform(PhiloxCounter ctr, PhiloxKey key);

// Discretized driving noise for one replica: the common increments
// dW_n and per-particle idiosyncratic increments dB_n^i on a fixed time
// mesh, all N(0, dt). Increments are generated on demand from the
// counter RNG, so a bundle sized for N particles agrees bit for bit
// with the first N streams of any larger bundle built from the same
// seed. Domain words keep W, B and initial-condition draws disjoint.
class NoiseBundle {
  public:
    NoiseBundle(double dt, int n_steps, int n_streams, uint32_t master_seed,
                uint32_t replica_index);

    double dt() const { return dt_; }
    int n_steps() const { return n_steps_; }
    int n_streams() const { return n_streams_; }
    uint32_t master_seed() const { return seed_; }
    uint32_t replica_index() const { return replica_; }

    // Common-noise increment over step n and the cumulative path W_{t_n}
    // (W_path has n_steps+1 entries, W_path[0] = 0).
    double dW(int step) const;
    const std::vector<double>& W_path() const { return w_path_; }

    // Idiosyncratic increment of particle i over step n.
    double dB(int stream, int step) const;

    // Standard normal reserved for sampling the initial position of
    // particle i.
    double init_normal(int stream) const;

  private:
    double dt_ = 0.0;
    double sqrt_dt_ = 0.0;
    int n_steps_ = 0;
    int n_streams_ = 0;
    uint32_t seed_ = 0;
    uint32_t replica_ = 0;
    PhiloxKey key_;
    std::vector<double> w_path_;
};

}  // namespace mfg
