#ifndef PATCHLINK_SCHEDULER_HPP
#define PATCHLINK_SCHEDULER_HPP

#include <cstdint>
#include <optional>
#include <span>

#include "patchlink/mask.hpp"

namespace patchlink {

// Sender-side selection policy.
enum class Policy { random, dqn };

struct ScheduleConfig {
    double rate = 1.0;       // fraction of cells to transmit, in (0,1]
    int bootstrap_frames = 4; // initial frames sent in full
    Policy policy = Policy::dqn;
    uint64_t seed = 0;
    int k = 8;
};

// ceil(rate * k^2), at least 1. rate must be in (0,1].
int budget(double rate, int k);

// Marks the budget(rate,k) cells with the highest probabilities; ties broken
// by ascending row-major linear index.
Mask select_top(std::span<const double> probs, double rate, int k, uint32_t frame_index = 0);

// budget(rate,k) distinct cells drawn uniformly without replacement;
// deterministic per seed.
Mask random_mask(double rate, int k, uint64_t seed, uint32_t frame_index = 0);

// Bootstrap frames go out in full. Afterwards the dqn policy applies the
// latest feedback mask verbatim, falling back to a full mask when no feedback
// has ever arrived (fail-open); the random policy draws a fresh mask per frame.
Mask schedule(uint32_t frame_index, const ScheduleConfig& cfg,
              const std::optional<Mask>& latest_feedback);

} // namespace patchlink

#endif // PATCHLINK_SCHEDULER_HPP
