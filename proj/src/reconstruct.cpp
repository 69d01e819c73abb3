#include "patchlink/reconstruct.hpp"

#include <cmath>
#include <cstring>

namespace patchlink {

namespace {

// Nearest mask-present cell strictly before/after `from` along a row or
// column; -1 when none.
int scan(const Mask& mask, int fixed, int from, int step, bool row_scan) {
    for (int i = from + step; i >= 0 && i < mask.k; i += step) {
        const int linear = row_scan ? fixed * mask.k + i : i * mask.k + fixed;
        if (mask.test(linear)) return i;
    }
    return -1;
}

} // namespace

Frame interpolate(const Frame& assembled, const Mask& mask, const Frame* previous) {
    GridSpec grid;
    try {
        grid = GridSpec::for_frame(assembled.width, assembled.height, mask.k);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("mask/frame geometry mismatch");
    }
    if (previous &&
        (previous->width != assembled.width || previous->height != assembled.height)) {
        throw std::invalid_argument("previous frame dimensions mismatch");
    }

    Frame out = assembled;
    for (int row = 0; row < grid.k; ++row) {
        for (int col = 0; col < grid.k; ++col) {
            if (mask.test(row * grid.k + col)) continue;

            const int x0 = col * grid.patch_w;
            const int y0 = row * grid.patch_h;

            if (previous) {
                for (int y = 0; y < grid.patch_h; ++y) {
                    std::memcpy(
                        out.pixels.data() + static_cast<size_t>(y0 + y) * out.width + x0,
                        previous->pixels.data() + static_cast<size_t>(y0 + y) * out.width + x0,
                        static_cast<size_t>(grid.patch_w));
                }
                continue;
            }

            const int left = scan(mask, row, col, -1, true);
            const int right = scan(mask, row, col, +1, true);
            const int up = scan(mask, col, row, -1, false);
            const int down = scan(mask, col, row, +1, false);
            if (left < 0 && right < 0 && up < 0 && down < 0) continue; // stays filler

            // boundary pixel coordinates of the neighbor cells
            const int lx = left >= 0 ? left * grid.patch_w + grid.patch_w - 1 : 0;
            const int rx = right >= 0 ? right * grid.patch_w : 0;
            const int uy = up >= 0 ? up * grid.patch_h + grid.patch_h - 1 : 0;
            const int dy = down >= 0 ? down * grid.patch_h : 0;

            for (int y = y0; y < y0 + grid.patch_h; ++y) {
                for (int x = x0; x < x0 + grid.patch_w; ++x) {
                    double acc = 0.0;
                    int axes = 0;
                    if (left >= 0 || right >= 0) {
                        double h;
                        if (left >= 0 && right >= 0) {
                            const double dl = x - lx;
                            const double dr = rx - x;
                            h = (assembled.at(lx, y) * dr + assembled.at(rx, y) * dl) / (dl + dr);
                        } else {
                            h = left >= 0 ? assembled.at(lx, y) : assembled.at(rx, y);
                        }
                        acc += h;
                        ++axes;
                    }
                    if (up >= 0 || down >= 0) {
                        double v;
                        if (up >= 0 && down >= 0) {
                            const double du = y - uy;
                            const double dd = dy - y;
                            v = (assembled.at(x, uy) * dd + assembled.at(x, dy) * du) / (du + dd);
                        } else {
                            v = up >= 0 ? assembled.at(x, uy) : assembled.at(x, dy);
                        }
                        acc += v;
                        ++axes;
                    }
                    const double value = acc / axes;
                    out.put(x, y, static_cast<uint8_t>(std::lround(std::clamp(value, 0.0, 255.0))));
                }
            }
        }
    }
    return out;
}

double reconstruction_error(const Frame& reconstructed, const Frame& original,
                            const std::optional<BoundingBox>& region) {
    if (reconstructed.width != original.width || reconstructed.height != original.height) {
        throw std::invalid_argument("frame dimensions mismatch");
    }
    BoundingBox r{0, 0, original.width, original.height};
    if (region) {
        const auto clipped = clip_box(*region, original.width, original.height);
        if (!clipped) throw std::invalid_argument("region outside frame");
        r = *clipped;
    }
    long long sum = 0;
    for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) {
            sum += std::abs(static_cast<int>(reconstructed.at(x, y)) -
                            static_cast<int>(original.at(x, y)));
        }
    }
    return static_cast<double>(sum) /
           (255.0 * static_cast<double>(r.w) * static_cast<double>(r.h));
}

} // namespace patchlink
