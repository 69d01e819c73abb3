#include "patchlink/frame.hpp"

#include <algorithm>
#include <cstring>
#include <string>

namespace patchlink {

GridSpec GridSpec::for_frame(int width, int height, int k) {
    if (k < 1) throw std::invalid_argument("grid size k must be >= 1");
    if (width < k || height < k || width % k != 0 || height % k != 0) {
        throw std::invalid_argument("frame " + std::to_string(width) + "x" +
                                    std::to_string(height) + " is not divisible into " +
                                    std::to_string(k) + "x" + std::to_string(k) + " cells");
    }
    return GridSpec{k, width / k, height / k};
}

std::optional<BoundingBox> clip_box(const BoundingBox& box, int frame_w, int frame_h) {
    const int x0 = std::max(box.x, 0);
    const int y0 = std::max(box.y, 0);
    const int x1 = std::min(box.x + box.w, frame_w);
    const int y1 = std::min(box.y + box.h, frame_h);
    if (x1 <= x0 || y1 <= y0) return std::nullopt;
    return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

std::vector<Patch> tile(const Frame& frame, const GridSpec& grid) {
    if (frame.width != grid.frame_width() || frame.height != grid.frame_height()) {
        throw std::invalid_argument("frame dimensions do not match grid");
    }
    std::vector<Patch> patches;
    patches.reserve(static_cast<size_t>(grid.cell_count()));
    for (int row = 0; row < grid.k; ++row) {
        for (int col = 0; col < grid.k; ++col) {
            Patch p;
            p.frame_index = frame.index;
            p.cell = CellId{row, col};
            p.pixels.resize(static_cast<size_t>(grid.patch_pixels()));
            const int x0 = col * grid.patch_w;
            const int y0 = row * grid.patch_h;
            for (int y = 0; y < grid.patch_h; ++y) {
                std::memcpy(p.pixels.data() + static_cast<size_t>(y) * grid.patch_w,
                            frame.pixels.data() + static_cast<size_t>(y0 + y) * frame.width + x0,
                            static_cast<size_t>(grid.patch_w));
            }
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

Frame pad_to_grid(const Frame& frame, int k, uint8_t fill) {
    if (k < 1) throw std::invalid_argument("grid size k must be >= 1");
    const auto round_up = [k](int v) { return (v + k - 1) / k * k; };
    const int w = std::max(round_up(frame.width), k);
    const int h = std::max(round_up(frame.height), k);
    if (w == frame.width && h == frame.height) return frame;

    Frame out(frame.index, w, h, fill);
    for (int y = 0; y < frame.height; ++y) {
        std::memcpy(out.pixels.data() + static_cast<size_t>(y) * w,
                    frame.pixels.data() + static_cast<size_t>(y) * frame.width,
                    static_cast<size_t>(frame.width));
    }
    return out;
}

Frame assemble(std::span<const Patch> patches, const GridSpec& grid, const Mask& mask,
               uint8_t filler) {
    if (mask.k != grid.k) throw std::invalid_argument("mask grid size does not match");

    Frame out(mask.frame_index, grid.frame_width(), grid.frame_height(), filler);
    std::vector<uint8_t> placed(static_cast<size_t>(grid.cell_count()), 0);
    for (const Patch& p : patches) {
        if (p.cell.row < 0 || p.cell.row >= grid.k || p.cell.col < 0 || p.cell.col >= grid.k) {
            throw ProtocolError("patch cell out of grid range");
        }
        const int linear = grid.linear(p.cell);
        if (!mask.test(linear)) throw ProtocolError("patch for cell not marked in mask");
        if (placed[static_cast<size_t>(linear)]) throw ProtocolError("duplicate patch cell");
        if (p.pixels.size() != static_cast<size_t>(grid.patch_pixels())) {
            throw ProtocolError("patch payload size does not match grid");
        }
        placed[static_cast<size_t>(linear)] = 1;
        out.index = p.frame_index;

        const int x0 = p.cell.col * grid.patch_w;
        const int y0 = p.cell.row * grid.patch_h;
        for (int y = 0; y < grid.patch_h; ++y) {
            std::memcpy(out.pixels.data() + static_cast<size_t>(y0 + y) * out.width + x0,
                        p.pixels.data() + static_cast<size_t>(y) * grid.patch_w,
                        static_cast<size_t>(grid.patch_w));
        }
    }
    return out;
}

double cell_overlap(CellId cell, const GridSpec& grid, const BoundingBox& box) {
    const int cx0 = cell.col * grid.patch_w;
    const int cy0 = cell.row * grid.patch_h;
    const int ix0 = std::max(box.x, cx0);
    const int iy0 = std::max(box.y, cy0);
    const int ix1 = std::min(box.x + box.w, cx0 + grid.patch_w);
    const int iy1 = std::min(box.y + box.h, cy0 + grid.patch_h);
    const long long iw = std::max(0, ix1 - ix0);
    const long long ih = std::max(0, iy1 - iy0);
    return static_cast<double>(iw * ih) / static_cast<double>(grid.patch_pixels());
}

} // namespace patchlink
