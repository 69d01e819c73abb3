#ifndef PATCHLINK_WIRE_HPP
#define PATCHLINK_WIRE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "patchlink/frame.hpp"
#include "patchlink/mask.hpp"

namespace patchlink {

// Why a decode failed. Untrusted input never throws; it comes back here.
enum class DecodeError {
    none,
    not_a_packet, // wrong or missing magic byte
    unsupported,  // unknown version
    corrupt,      // truncated, bad CRC, or inconsistent fields
};

template <typename T>
struct Decoded {
    std::optional<T> value;
    DecodeError error = DecodeError::none;

    explicit operator bool() const { return value.has_value(); }
    T& operator*() { return *value; }
    const T& operator*() const { return *value; }
    T* operator->() { return &*value; }
    const T* operator->() const { return &*value; }

    static Decoded ok(T v) { return Decoded{std::move(v), DecodeError::none}; }
    static Decoded fail(DecodeError e) { return Decoded{std::nullopt, e}; }
};

// CRC-32, IEEE polynomial (reflected 0xEDB88320), init and xorout 0xFFFFFFFF.
uint32_t crc32_ieee(std::span<const uint8_t> data);

inline constexpr uint8_t kPacketMagic = 0xA7;
inline constexpr uint8_t kFeedbackMagic = 0xA8;
inline constexpr uint8_t kWireVersion = 0x01;
inline constexpr uint8_t kPixelFormatGray8 = 0x00;

// Fixed per-datagram overhead: 18 header bytes plus the trailing CRC-32.
inline constexpr int kPacketHeaderBytes = 18;
inline constexpr int kPacketOverheadBytes = 22;

// Patch datagram, big-endian:
//   magic, version, frame_index u32, k u8, row u8, col u8,
//   patch_w u16, patch_h u16, pixel_format u8, payload_len u32,
//   payload, crc32 over everything before it.
struct PatchPacket {
    uint32_t frame_index = 0;
    uint8_t k = 0;
    uint8_t row = 0;
    uint8_t col = 0;
    uint16_t patch_w = 0;
    uint16_t patch_h = 0;
    uint8_t pixel_format = kPixelFormatGray8;
    std::vector<uint8_t> payload;

    std::vector<uint8_t> encode() const;
    static Decoded<PatchPacket> decode(std::span<const uint8_t> bytes);
};

// Feedback datagram (receiver -> sender), big-endian:
//   magic, version, frame_index u32, k u8,
//   mask bits (ceil(k^2/8) bytes, row-major, MSB first), crc32.
size_t feedback_size_bytes(int k);
std::vector<uint8_t> encode_feedback(const Mask& mask);
Decoded<Mask> decode_feedback(std::span<const uint8_t> bytes);

// Patch-level convenience: one patch <-> one datagram.
std::vector<uint8_t> encode_packet(const Patch& patch, const GridSpec& grid);
Decoded<Patch> decode_packet(std::span<const uint8_t> bytes);

} // namespace patchlink

#endif // PATCHLINK_WIRE_HPP
