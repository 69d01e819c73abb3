#include "patchlink/channel.hpp"

#include <stdexcept>

#include "patchlink/rng.hpp"

namespace patchlink {

std::vector<std::vector<uint8_t>> channel_transmit(std::span<const std::vector<uint8_t>> datagrams,
                                                   const ChannelConfig& cfg) {
    if (cfg.loss_probability < 0.0 || cfg.loss_probability > 1.0) {
        throw std::invalid_argument("loss_probability must be in [0,1]");
    }
    std::mt19937_64 gen(cfg.seed);
    std::vector<std::vector<uint8_t>> delivered;
    delivered.reserve(datagrams.size());
    for (const auto& d : datagrams) {
        if (uniform01(gen) < cfg.loss_probability) continue;
        delivered.push_back(d);
    }
    if (cfg.reorder && delivered.size() > 1) {
        for (size_t i = delivered.size() - 1; i > 0; --i) {
            std::swap(delivered[i], delivered[bounded(gen, i + 1)]);
        }
    }
    return delivered;
}

} // namespace patchlink
