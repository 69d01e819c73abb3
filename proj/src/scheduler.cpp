#include "patchlink/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "patchlink/rng.hpp"

namespace patchlink {

int budget(double rate, int k) {
    if (!(rate > 0.0) || rate > 1.0) throw std::invalid_argument("rate must be in (0,1]");
    const double cells = rate * k * k;
    // absorb float noise so e.g. 0.3 * 100 does not ceil to 31
    const double rounded = std::round(cells);
    const int n = std::abs(cells - rounded) < 1e-9 ? static_cast<int>(rounded)
                                                   : static_cast<int>(std::ceil(cells));
    return std::max(1, std::min(n, k * k));
}

Mask select_top(std::span<const double> probs, double rate, int k, uint32_t frame_index) {
    if (static_cast<int>(probs.size()) != k * k) {
        throw std::invalid_argument("probability map size does not match grid");
    }
    std::vector<int> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&probs](int a, int b) {
        const double pa = probs[static_cast<size_t>(a)];
        const double pb = probs[static_cast<size_t>(b)];
        if (pa != pb) return pa > pb;
        return a < b;
    });
    Mask mask(k, frame_index);
    const int n = budget(rate, k);
    for (int i = 0; i < n; ++i) mask.set(order[static_cast<size_t>(i)], true);
    return mask;
}

Mask random_mask(double rate, int k, uint64_t seed, uint32_t frame_index) {
    const int n = budget(rate, k);
    std::vector<int> cells(static_cast<size_t>(k) * k);
    std::iota(cells.begin(), cells.end(), 0);
    std::mt19937_64 gen(seed);
    Mask mask(k, frame_index);
    // partial Fisher-Yates: the first n slots are a uniform sample
    for (int i = 0; i < n; ++i) {
        const size_t j = i + bounded(gen, cells.size() - static_cast<size_t>(i));
        std::swap(cells[static_cast<size_t>(i)], cells[j]);
        mask.set(cells[static_cast<size_t>(i)], true);
    }
    return mask;
}

Mask schedule(uint32_t frame_index, const ScheduleConfig& cfg,
              const std::optional<Mask>& latest_feedback) {
    if (frame_index < static_cast<uint32_t>(cfg.bootstrap_frames)) {
        return Mask::full(cfg.k, frame_index);
    }
    if (cfg.policy == Policy::random) {
        return random_mask(cfg.rate, cfg.k, mix_seed(cfg.seed, frame_index), frame_index);
    }
    if (latest_feedback) {
        Mask mask = *latest_feedback;
        mask.frame_index = frame_index;
        return mask;
    }
    return Mask::full(cfg.k, frame_index); // fail-open
}

} // namespace patchlink
