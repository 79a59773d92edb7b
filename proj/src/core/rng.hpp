#ifndef WIGSOLVE_CORE_RNG_HPP
#define WIGSOLVE_CORE_RNG_HPP

#include <array>
#include <cstdint>

namespace wig {

// Counter-based generator (Philox4x32-10). Each logical stream of the run
// (initial draws per branch, base noise per branch, time draws, test-function
// init, ...) owns a distinct stream id; the draw position is the only state.
// Draws are therefore reproducible independent of evaluation order and the
// whole RNG state serializes as a handful of integers.

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                   std::array<uint32_t, 2> key);

enum class StreamId : uint32_t {
    TestInit = 1,
    InitPlus = 2,
    InitMinus = 3,
    NoisePlus = 4,
    NoiseMinus = 5,
    Times = 6,
    NetInitPlus = 7,
    NetInitMinus = 8,
    HeldoutTest = 9,
    HeldoutInitPlus = 10,
    HeldoutInitMinus = 11,
    HeldoutNoisePlus = 12,
    HeldoutNoiseMinus = 13,
    HeldoutTimes = 14,
    EvalInitPlus = 16,
    EvalInitMinus = 17,
    EvalNoisePlus = 18,
    EvalNoiseMinus = 19,
    Scratch = 31,
};

constexpr std::size_t kNumStreams = 32;

/// One sub-stream of the run's generator. May own its draw position or bind
/// to an external slot (see StreamTable) so consumed draws persist.
class RandomStream {
public:
    RandomStream(uint64_t seed, StreamId id)
        : RandomStream(seed, static_cast<uint32_t>(id)) {}
    RandomStream(uint64_t seed, uint32_t id)
        : seed_(seed), id_(id), own_pos_(0), pos_(&own_pos_) {}
    RandomStream(uint64_t seed, uint32_t id, uint64_t* external_pos)
        : seed_(seed), id_(id), own_pos_(0), pos_(external_pos) {}

    uint64_t next_u64();
    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (two uniforms per draw).
    double normal();

    uint64_t position() const { return *pos_; }
    void set_position(uint64_t p) { *pos_ = p; }
    uint32_t id() const { return id_; }

private:
    uint64_t seed_;
    uint32_t id_;
    uint64_t own_pos_;
    uint64_t* pos_;
};

/// Persistent draw positions for every stream of a run. The table is the
/// serializable RNG state; `use()` hands out a stream bound to its slot.
struct StreamTable {
    uint64_t seed = 0;
    std::array<uint64_t, kNumStreams> pos{};

    explicit StreamTable(uint64_t s = 0) : seed(s) {}

    RandomStream use(StreamId id) {
        return RandomStream(seed, static_cast<uint32_t>(id),
                            &pos[static_cast<uint32_t>(id)]);
    }
};

} // namespace wig

#endif
