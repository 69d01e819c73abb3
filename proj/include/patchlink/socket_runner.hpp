#ifndef PATCHLINK_SOCKET_RUNNER_HPP
#define PATCHLINK_SOCKET_RUNNER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "patchlink/frame.hpp"
#include "patchlink/mask.hpp"

namespace patchlink {

// UDP sender loop: one datagram per selected patch per frame, then a bounded
// wait for a feedback datagram before the next frame.
struct SenderConfig {
    std::string host = "127.0.0.1";
    uint16_t port = 0;
    int k = 8;
    double feedback_wait_ms = 5.0;
    int pace_fps = 0; // 0 = send as fast as possible
};

struct SenderStats {
    uint64_t datagrams_sent = 0;
    uint64_t feedback_received = 0;
};

// mask_for_frame(frame_index, latest_feedback) decides what to send; compose
// with schedule() for the bootstrap/fail-open policy.
using MaskProvider = std::function<Mask(uint32_t, const std::optional<Mask>&)>;

SenderStats socket_send(const SenderConfig& cfg, std::span<const Frame> frames,
                        const MaskProvider& mask_for_frame);

// UDP receiver: reassembles frames with a per-frame deadline that starts at
// the frame's first packet; cells missing at the deadline are lost. A
// deadline of 0 treats every cell as lost. Frames also finalize early when
// complete or when a later frame's packet arrives.
struct ReceiverConfig {
    uint16_t port = 0; // 0 picks an ephemeral port, see UdpReceiver::port()
    int k = 8;
    int width = 64; // grid-aligned frame dimensions
    int height = 64;
    int frame_count = 0;          // stop after this many finalized frames
    double frame_deadline_ms = 33.0;
    double idle_timeout_ms = 5000.0; // give up when nothing arrives at all
};

// Called once per finalized frame; a returned mask is sent back as feedback.
using FrameSink =
    std::function<std::optional<Mask>(uint32_t, const Frame&, const Mask&)>;

// Binds in the constructor so a sender can safely start once construction
// returns; run() then executes the receive loop.
class UdpReceiver {
public:
    explicit UdpReceiver(const ReceiverConfig& cfg);
    ~UdpReceiver();
    UdpReceiver(const UdpReceiver&) = delete;
    UdpReceiver& operator=(const UdpReceiver&) = delete;

    uint16_t port() const { return port_; }

    // Returns the number of frames finalized.
    int run(const FrameSink& sink);

private:
    ReceiverConfig cfg_;
    GridSpec grid_;
    int fd_ = -1;
    uint16_t port_ = 0;
};

// One-shot convenience: bind and run.
int socket_receive(const ReceiverConfig& cfg, const FrameSink& sink);

} // namespace patchlink

#endif // PATCHLINK_SOCKET_RUNNER_HPP
