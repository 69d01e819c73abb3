#include "patchlink/wire.hpp"

#include <array>

namespace patchlink {

namespace {

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int bit = 0; bit < 8; ++bit) {
            c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        }
        table[i] = c;
    }
    return table;
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint16_t get_u16(std::span<const uint8_t> b, size_t at) {
    return static_cast<uint16_t>((b[at] << 8) | b[at + 1]);
}

uint32_t get_u32(std::span<const uint8_t> b, size_t at) {
    return (static_cast<uint32_t>(b[at]) << 24) | (static_cast<uint32_t>(b[at + 1]) << 16) |
           (static_cast<uint32_t>(b[at + 2]) << 8) | static_cast<uint32_t>(b[at + 3]);
}

void append_crc(std::vector<uint8_t>& out) {
    put_u32(out, crc32_ieee(out));
}

// Trailing CRC must match the CRC of everything before it.
bool crc_ok(std::span<const uint8_t> bytes) {
    const size_t n = bytes.size();
    return crc32_ieee(bytes.subspan(0, n - 4)) == get_u32(bytes, n - 4);
}

} // namespace

uint32_t crc32_ieee(std::span<const uint8_t> data) {
    static const std::array<uint32_t, 256> table = make_crc_table();
    uint32_t c = 0xFFFFFFFFu;
    for (uint8_t byte : data) {
        c = table[(c ^ byte) & 0xFFu] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

std::vector<uint8_t> PatchPacket::encode() const {
    std::vector<uint8_t> out;
    out.reserve(kPacketOverheadBytes + payload.size());
    out.push_back(kPacketMagic);
    out.push_back(kWireVersion);
    put_u32(out, frame_index);
    out.push_back(k);
    out.push_back(row);
    out.push_back(col);
    put_u16(out, patch_w);
    put_u16(out, patch_h);
    out.push_back(pixel_format);
    put_u32(out, static_cast<uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    append_crc(out);
    return out;
}

Decoded<PatchPacket> PatchPacket::decode(std::span<const uint8_t> bytes) {
    using D = Decoded<PatchPacket>;
    if (bytes.empty() || bytes[0] != kPacketMagic) return D::fail(DecodeError::not_a_packet);
    if (bytes.size() < 2) return D::fail(DecodeError::corrupt);
    if (bytes[1] != kWireVersion) return D::fail(DecodeError::unsupported);
    if (bytes.size() < kPacketOverheadBytes) return D::fail(DecodeError::corrupt);

    const uint32_t payload_len = get_u32(bytes, 14);
    if (bytes.size() != kPacketOverheadBytes + static_cast<size_t>(payload_len)) {
        return D::fail(DecodeError::corrupt);
    }
    if (!crc_ok(bytes)) return D::fail(DecodeError::corrupt);

    PatchPacket pkt;
    pkt.frame_index = get_u32(bytes, 2);
    pkt.k = bytes[6];
    pkt.row = bytes[7];
    pkt.col = bytes[8];
    pkt.patch_w = get_u16(bytes, 9);
    pkt.patch_h = get_u16(bytes, 11);
    pkt.pixel_format = bytes[13];
    pkt.payload.assign(bytes.begin() + kPacketHeaderBytes, bytes.end() - 4);

    if (pkt.k == 0 || pkt.row >= pkt.k || pkt.col >= pkt.k) return D::fail(DecodeError::corrupt);
    if (pkt.pixel_format == kPixelFormatGray8 &&
        pkt.payload.size() != static_cast<size_t>(pkt.patch_w) * pkt.patch_h) {
        return D::fail(DecodeError::corrupt);
    }
    return D::ok(std::move(pkt));
}

size_t feedback_size_bytes(int k) {
    return 11 + static_cast<size_t>(k * k + 7) / 8;
}

std::vector<uint8_t> encode_feedback(const Mask& mask) {
    std::vector<uint8_t> out;
    out.reserve(feedback_size_bytes(mask.k));
    out.push_back(kFeedbackMagic);
    out.push_back(kWireVersion);
    put_u32(out, mask.frame_index);
    out.push_back(static_cast<uint8_t>(mask.k));
    const int cells = mask.cell_count();
    for (int byte = 0; byte < (cells + 7) / 8; ++byte) {
        uint8_t b = 0;
        for (int bit = 0; bit < 8; ++bit) {
            const int linear = byte * 8 + bit;
            if (linear < cells && mask.test(linear)) b |= static_cast<uint8_t>(0x80 >> bit);
        }
        out.push_back(b);
    }
    append_crc(out);
    return out;
}

Decoded<Mask> decode_feedback(std::span<const uint8_t> bytes) {
    using D = Decoded<Mask>;
    if (bytes.empty() || bytes[0] != kFeedbackMagic) return D::fail(DecodeError::not_a_packet);
    if (bytes.size() < 2) return D::fail(DecodeError::corrupt);
    if (bytes[1] != kWireVersion) return D::fail(DecodeError::unsupported);
    if (bytes.size() < 11) return D::fail(DecodeError::corrupt);

    const int k = bytes[6];
    if (k == 0 || bytes.size() != feedback_size_bytes(k)) return D::fail(DecodeError::corrupt);
    if (!crc_ok(bytes)) return D::fail(DecodeError::corrupt);

    Mask mask(k, get_u32(bytes, 2));
    for (int linear = 0; linear < k * k; ++linear) {
        const uint8_t b = bytes[7 + static_cast<size_t>(linear) / 8];
        mask.set(linear, (b & (0x80 >> (linear % 8))) != 0);
    }
    return D::ok(std::move(mask));
}

std::vector<uint8_t> encode_packet(const Patch& patch, const GridSpec& grid) {
    if (patch.pixels.size() != static_cast<size_t>(grid.patch_pixels())) {
        throw std::invalid_argument("patch payload size does not match grid");
    }
    if (grid.k > 255 || grid.patch_w > 65535 || grid.patch_h > 65535) {
        throw std::invalid_argument("grid does not fit the wire format");
    }
    PatchPacket pkt;
    pkt.frame_index = patch.frame_index;
    pkt.k = static_cast<uint8_t>(grid.k);
    pkt.row = static_cast<uint8_t>(patch.cell.row);
    pkt.col = static_cast<uint8_t>(patch.cell.col);
    pkt.patch_w = static_cast<uint16_t>(grid.patch_w);
    pkt.patch_h = static_cast<uint16_t>(grid.patch_h);
    pkt.payload = patch.pixels;
    return pkt.encode();
}

Decoded<Patch> decode_packet(std::span<const uint8_t> bytes) {
    auto pkt = PatchPacket::decode(bytes);
    if (!pkt) return Decoded<Patch>::fail(pkt.error);
    if (pkt->pixel_format != kPixelFormatGray8) {
        return Decoded<Patch>::fail(DecodeError::unsupported);
    }
    Patch p;
    p.frame_index = pkt->frame_index;
    p.cell = CellId{pkt->row, pkt->col};
    p.pixels = std::move(pkt->payload);
    return Decoded<Patch>::ok(std::move(p));
}

} // namespace patchlink
