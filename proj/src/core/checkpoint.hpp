#ifndef WIGSOLVE_CORE_CHECKPOINT_HPP
#define WIGSOLVE_CORE_CHECKPOINT_HPP

#include <optional>
#include <string>

#include "core/pushforward.hpp"
#include "core/testfunc.hpp"

namespace wig {

// Flat, versioned binary container. Layout:
//   magic "WIGCKPT\0" | u32 version | u32 section count
//   sections: u32 tag | u64 payload bytes | payload
// Section 1 holds the model (networks, alpha, decomposition metadata and
// the physical constants needed to rebuild the samplers); section 2 holds
// the optimizer/adversary/RNG state needed to resume training. All arrays
// are row-major 64-bit floats; round trips are bit-exact.

struct TrainerStateBlob {
    uint64_t epoch = 0;
    AdamState opt_plus, opt_minus, opt_alpha, opt_eta;
    TestFunctionSet tfs;
    StreamTable streams;
};

struct Checkpoint {
    SignedPushforward sp;
    PhysicalConstants consts;
    double horizon = 1.0;
    std::string decomp_name;
    std::map<std::string, double> decomp_params;
    std::optional<TrainerStateBlob> trainer;
};

/// Atomic write (temp file + rename).
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

} // namespace wig

#endif
