#ifndef PATCHLINK_CHANNEL_HPP
#define PATCHLINK_CHANNEL_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace patchlink {

// In-process lossy datagram link: i.i.d. Bernoulli loss per datagram,
// deterministic for a given seed.
struct ChannelConfig {
    double loss_probability = 0.0; // in [0,1]
    uint64_t seed = 0;
    bool reorder = false; // shuffle survivors when set
};

// Drops each datagram independently with cfg.loss_probability. Survivors keep
// emission order unless cfg.reorder. Identical (datagrams, cfg) inputs yield
// identical outputs.
std::vector<std::vector<uint8_t>> channel_transmit(std::span<const std::vector<uint8_t>> datagrams,
                                                   const ChannelConfig& cfg);

} // namespace patchlink

#endif // PATCHLINK_CHANNEL_HPP
