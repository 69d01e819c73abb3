#ifndef PATCHLINK_MASK_HPP
#define PATCHLINK_MASK_HPP

#include <cstdint>
#include <vector>

namespace patchlink {

// Per-cell transmit/skip decision for one frame. Cells are indexed row-major
// (linear index = row*k + col), the canonical order used everywhere.
struct Mask {
    int k = 0;
    uint32_t frame_index = 0;
    std::vector<uint8_t> bits; // k*k entries, 0 or 1

    Mask() = default;
    Mask(int k_, uint32_t frame_index_, bool value = false)
        : k(k_), frame_index(frame_index_), bits(static_cast<size_t>(k_) * k_, value ? 1 : 0) {}

    static Mask full(int k, uint32_t frame_index = 0) { return Mask(k, frame_index, true); }
    static Mask none(int k, uint32_t frame_index = 0) { return Mask(k, frame_index, false); }

    int cell_count() const { return k * k; }
    bool test(int linear) const { return bits[static_cast<size_t>(linear)] != 0; }
    void set(int linear, bool value) { bits[static_cast<size_t>(linear)] = value ? 1 : 0; }

    int popcount() const {
        int n = 0;
        for (uint8_t b : bits) n += b != 0;
        return n;
    }

    bool operator==(const Mask& other) const {
        return k == other.k && frame_index == other.frame_index && bits == other.bits;
    }
};

} // namespace patchlink

#endif // PATCHLINK_MASK_HPP
