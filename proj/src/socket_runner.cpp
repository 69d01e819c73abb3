#include "patchlink/socket_runner.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>
#include <vector>

#include "patchlink/wire.hpp"

namespace patchlink {

namespace {

using Clock = std::chrono::steady_clock;

int open_udp_socket() {
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    // burst-friendly buffers; a frame is a burst of many small datagrams
    const int bytes = 4 * 1024 * 1024;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &bytes, sizeof bytes);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDBUF, &bytes, sizeof bytes);
    return fd;
}

sockaddr_in make_addr(const std::string& host, uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw std::runtime_error("bad address: " + host);
    }
    return addr;
}

// poll for readability; timeout_ms < 0 means wait forever
bool wait_readable(int fd, double timeout_ms) {
    pollfd pfd{fd, POLLIN, 0};
    const int t = timeout_ms < 0 ? -1 : static_cast<int>(std::ceil(timeout_ms));
    const int rc = ::poll(&pfd, 1, t);
    if (rc < 0) throw std::runtime_error(std::string("poll: ") + std::strerror(errno));
    return rc > 0 && (pfd.revents & POLLIN);
}

constexpr size_t kMaxDatagram = 65536;

} // namespace

SenderStats socket_send(const SenderConfig& cfg, std::span<const Frame> frames,
                        const MaskProvider& mask_for_frame) {
    const int fd = open_udp_socket();
    const sockaddr_in dest = make_addr(cfg.host, cfg.port);

    SenderStats stats;
    std::optional<Mask> latest_feedback;
    std::vector<uint8_t> buf(kMaxDatagram);

    try {
        for (uint32_t n = 0; n < frames.size(); ++n) {
            const Frame& frame = frames[n];
            const GridSpec grid = GridSpec::for_frame(frame.width, frame.height, cfg.k);
            const Mask mask = mask_for_frame(n, latest_feedback);
            const auto patches = tile(frame, grid);
            const auto frame_start = Clock::now();

            for (int i = 0; i < grid.cell_count(); ++i) {
                if (!mask.test(i)) continue;
                const auto datagram = encode_packet(patches[static_cast<size_t>(i)], grid);
                const ssize_t sent =
                    ::sendto(fd, datagram.data(), datagram.size(), 0,
                             reinterpret_cast<const sockaddr*>(&dest), sizeof dest);
                if (sent < 0) {
                    throw std::runtime_error(std::string("sendto: ") + std::strerror(errno));
                }
                ++stats.datagrams_sent;
            }

            // await feedback between frames
            if (cfg.feedback_wait_ms > 0 && wait_readable(fd, cfg.feedback_wait_ms)) {
                const ssize_t got = ::recvfrom(fd, buf.data(), buf.size(), 0, nullptr, nullptr);
                if (got > 0) {
                    if (auto fb = decode_feedback({buf.data(), static_cast<size_t>(got)})) {
                        latest_feedback = *fb;
                        ++stats.feedback_received;
                    }
                }
            }

            if (cfg.pace_fps > 0) {
                const auto frame_time = std::chrono::duration<double>(1.0 / cfg.pace_fps);
                std::this_thread::sleep_until(frame_start + frame_time);
            }
        }
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    return stats;
}

UdpReceiver::UdpReceiver(const ReceiverConfig& cfg)
    : cfg_(cfg), grid_(GridSpec::for_frame(cfg.width, cfg.height, cfg.k)) {
    fd_ = open_udp_socket();
    sockaddr_in addr = make_addr("0.0.0.0", cfg.port);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
        const std::string what = std::string("bind: ") + std::strerror(errno);
        ::close(fd_);
        fd_ = -1;
        throw std::runtime_error(what);
    }
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
        port_ = ntohs(addr.sin_port);
    }
}

UdpReceiver::~UdpReceiver() {
    if (fd_ >= 0) ::close(fd_);
}

int UdpReceiver::run(const FrameSink& sink) {
    std::vector<uint8_t> buf(kMaxDatagram);
    sockaddr_in peer{};
    bool have_peer = false;

    // frame under assembly
    bool assembling = false;
    uint32_t current = 0;
    std::vector<Patch> patches;
    Mask rx_mask;
    Clock::time_point deadline;

    int finalized = 0;
    int64_t last_finalized = -1;

    const auto finalize = [&]() {
        const Frame assembled = assemble(patches, grid_, rx_mask, 0);
        if (const auto feedback = sink(current, assembled, rx_mask); feedback && have_peer) {
            const auto datagram = encode_feedback(*feedback);
            if (::sendto(fd_, datagram.data(), datagram.size(), 0,
                         reinterpret_cast<const sockaddr*>(&peer), sizeof peer) < 0) {
                throw std::runtime_error(std::string("sendto: ") + std::strerror(errno));
            }
        }
        last_finalized = current;
        ++finalized;
        assembling = false;
        patches.clear();
    };

    const auto idle_limit = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                               std::chrono::duration<double, std::milli>(
                                                   cfg_.idle_timeout_ms));

    while (finalized < cfg_.frame_count) {
        double wait_ms;
        if (assembling) {
            wait_ms = std::chrono::duration<double, std::milli>(deadline - Clock::now()).count();
            if (wait_ms <= 0) {
                finalize();
                continue;
            }
        } else {
            wait_ms =
                std::chrono::duration<double, std::milli>(idle_limit - Clock::now()).count();
            if (wait_ms <= 0) break; // nothing is coming
        }

        if (!wait_readable(fd_, wait_ms)) continue;

        // drain the whole burst before polling again
        while (finalized < cfg_.frame_count) {
            socklen_t peer_len = sizeof peer;
            const ssize_t got = ::recvfrom(fd_, buf.data(), buf.size(), MSG_DONTWAIT,
                                           reinterpret_cast<sockaddr*>(&peer), &peer_len);
            if (got < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK) break;
                throw std::runtime_error(std::string("recvfrom: ") + std::strerror(errno));
            }
            have_peer = true;

            auto decoded = decode_packet({buf.data(), static_cast<size_t>(got)});
            if (!decoded) continue; // not ours or corrupt
            const Patch& p = *decoded;
            if (static_cast<int64_t>(p.frame_index) <= last_finalized) continue; // stale
            if (p.pixels.size() != static_cast<size_t>(grid_.patch_pixels()) ||
                p.cell.row >= grid_.k || p.cell.col >= grid_.k) {
                continue; // wrong geometry for this session
            }

            if (assembling && p.frame_index != current) {
                if (p.frame_index < current) continue; // late packet for an older frame
                finalize(); // a newer frame started; missing cells are lost
            }
            if (!assembling) {
                assembling = true;
                current = p.frame_index;
                rx_mask = Mask(cfg_.k, current);
                deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                              std::chrono::duration<double, std::milli>(
                                                  cfg_.frame_deadline_ms));
                if (cfg_.frame_deadline_ms <= 0) {
                    finalize(); // degenerate deadline: every cell is lost
                    continue;
                }
            }

            const int linear = grid_.linear(p.cell);
            if (rx_mask.test(linear)) continue; // duplicate datagram
            rx_mask.set(linear, true);
            patches.push_back(std::move(*decoded));

            if (rx_mask.popcount() == grid_.cell_count()) finalize(); // complete
        }
    }

    if (assembling && finalized < cfg_.frame_count) finalize();
    return finalized;
}

int socket_receive(const ReceiverConfig& cfg, const FrameSink& sink) {
    UdpReceiver receiver(cfg);
    return receiver.run(sink);
}

} // namespace patchlink
