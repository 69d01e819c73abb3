#ifndef PATCHLINK_FRAME_HPP
#define PATCHLINK_FRAME_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "patchlink/mask.hpp"

namespace patchlink {

// Misuse of the reassembly contract (duplicate cells, patch outside the mask).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One grayscale frame, 8 bits per pixel, row-major.
struct Frame {
    uint32_t index = 0;
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    Frame() = default;
    Frame(uint32_t index_, int width_, int height_, uint8_t fill = 0)
        : index(index_), width(width_), height(height_),
          pixels(static_cast<size_t>(width_) * height_, fill) {}

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    void put(int x, int y, uint8_t v) { pixels[static_cast<size_t>(y) * width + x] = v; }

    bool operator==(const Frame& other) const {
        return index == other.index && width == other.width && height == other.height &&
               pixels == other.pixels;
    }
};

struct CellId {
    int row = 0;
    int col = 0;
    bool operator==(const CellId&) const = default;
};

// k*k tiling of a frame; construction checks divisibility.
struct GridSpec {
    int k = 1;
    int patch_w = 0;
    int patch_h = 0;

    static GridSpec for_frame(int width, int height, int k);

    int frame_width() const { return patch_w * k; }
    int frame_height() const { return patch_h * k; }
    int cell_count() const { return k * k; }
    int patch_pixels() const { return patch_w * patch_h; }

    int linear(CellId cell) const { return cell.row * k + cell.col; }
    CellId cell_at(int linear) const { return CellId{linear / k, linear % k}; }

    bool operator==(const GridSpec&) const = default;
};

// Pixels of one grid cell, detached from its frame.
struct Patch {
    uint32_t frame_index = 0;
    CellId cell;
    std::vector<uint8_t> pixels; // patch_w * patch_h, row-major

    bool operator==(const Patch&) const = default;
};

// Axis-aligned pixel rectangle. Callers clip against frame bounds via clip_box.
struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    bool operator==(const BoundingBox&) const = default;
};

// Intersects `box` with a width*height frame; empty when nothing remains.
std::optional<BoundingBox> clip_box(const BoundingBox& box, int frame_w, int frame_h);

// Splits the frame into k*k patches in row-major cell order.
// The frame must already be grid-aligned (see pad_to_grid).
std::vector<Patch> tile(const Frame& frame, const GridSpec& grid);

// Grows the frame to the smallest dimensions divisible by k, original content
// in the top-left, new pixels set to `fill`. Idempotent.
Frame pad_to_grid(const Frame& frame, int k, uint8_t fill = 0);

// Rebuilds a frame from the supplied patches. Cells absent from `mask` are
// set to `filler`. Every patch must land on a mask-present cell and cells must
// be unique; a mask-present cell with no patch is treated as lost and filled.
Frame assemble(std::span<const Patch> patches, const GridSpec& grid, const Mask& mask,
               uint8_t filler = 0);

// Fraction of the cell's area covered by `box`, in [0,1]. Exact integer
// intersection arithmetic, so overlaps over all cells conserve box area.
double cell_overlap(CellId cell, const GridSpec& grid, const BoundingBox& box);

} // namespace patchlink

#endif // PATCHLINK_FRAME_HPP
