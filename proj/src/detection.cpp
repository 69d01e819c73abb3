#include "patchlink/detection.hpp"

#include <algorithm>
#include <stdexcept>

#include "patchlink/reconstruct.hpp"
#include "patchlink/rng.hpp"

namespace patchlink {

namespace {

std::vector<uint8_t> texture(int w, int h, uint8_t lo, uint8_t hi, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<uint8_t> px(static_cast<size_t>(w) * h);
    const uint64_t span = static_cast<uint64_t>(hi) - lo + 1;
    for (auto& p : px) p = static_cast<uint8_t>(lo + bounded(gen, span));
    return px;
}

} // namespace

Scene scene_generate(const SceneConfig& cfg) {
    if (cfg.width < 1 || cfg.height < 1 || cfg.frame_count < 1) {
        throw std::invalid_argument("scene dimensions and frame count must be positive");
    }
    if (cfg.object_w < 1 || cfg.object_h < 1 || cfg.object_w > cfg.width ||
        cfg.object_h > cfg.height) {
        throw std::invalid_argument("object must fit inside the frame");
    }
    if (cfg.background_hi < cfg.background_lo || cfg.object_hi < cfg.object_lo) {
        throw std::invalid_argument("texture range is inverted");
    }

    const auto background =
        texture(cfg.width, cfg.height, cfg.background_lo, cfg.background_hi, cfg.background_seed);
    const auto object =
        texture(cfg.object_w, cfg.object_h, cfg.object_lo, cfg.object_hi, cfg.object_seed);
    std::mt19937_64 jitter_gen(cfg.jitter_seed);

    const int max_x = cfg.width - cfg.object_w;
    const int max_y = cfg.height - cfg.object_h;
    int x = std::clamp(cfg.x0, 0, max_x);
    int y = std::clamp(cfg.y0, 0, max_y);
    int dx = cfg.dx;
    int dy = cfg.dy;

    Scene scene;
    scene.frames.reserve(static_cast<size_t>(cfg.frame_count));
    scene.boxes.reserve(static_cast<size_t>(cfg.frame_count));
    for (int n = 0; n < cfg.frame_count; ++n) {
        int px = x;
        int py = y;
        if (cfg.jitter > 0) {
            const int span = 2 * cfg.jitter + 1;
            px += static_cast<int>(bounded(jitter_gen, static_cast<uint64_t>(span))) - cfg.jitter;
            py += static_cast<int>(bounded(jitter_gen, static_cast<uint64_t>(span))) - cfg.jitter;
            px = std::clamp(px, 0, max_x);
            py = std::clamp(py, 0, max_y);
        }

        Frame frame(static_cast<uint32_t>(n), cfg.width, cfg.height);
        frame.pixels = background;
        for (int oy = 0; oy < cfg.object_h; ++oy) {
            for (int ox = 0; ox < cfg.object_w; ++ox) {
                frame.put(px + ox, py + oy,
                          object[static_cast<size_t>(oy) * cfg.object_w + ox]);
            }
        }
        scene.frames.push_back(std::move(frame));
        scene.boxes.push_back(BoundingBox{px, py, cfg.object_w, cfg.object_h});

        // advance, reflecting at the walls
        x += dx;
        y += dy;
        if (x < 0) { x = -x; dx = -dx; }
        if (x > max_x) { x = 2 * max_x - x; dx = -dx; }
        if (y < 0) { y = -y; dy = -dy; }
        if (y > max_y) { y = 2 * max_y - y; dy = -dy; }
        x = std::clamp(x, 0, max_x);
        y = std::clamp(y, 0, max_y);
    }
    return scene;
}

bool detect(const Frame& reconstructed, const Frame& original, const BoundingBox& gt,
            double theta) {
    if (!(theta > 0.0) || theta > 1.0) throw std::invalid_argument("theta must be in (0,1]");
    const double fidelity = 1.0 - reconstruction_error(reconstructed, original, gt);
    return fidelity >= theta;
}

Scores evaluate(std::span<const DetectionOutcome> outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("no detection outcomes");
    long long tp = 0, fp = 0, fn = 0;
    for (const DetectionOutcome& o : outcomes) {
        if (o.gt_present && o.detected) ++tp;
        else if (o.gt_present && !o.detected) ++fn;
        else if (!o.gt_present && o.detected) ++fp;
    }
    Scores s;
    s.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    s.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

int64_t bits_transmitted(std::span<const Mask> masks, const GridSpec& grid, int header_bytes,
                         int feedback_bytes, int feedback_period) {
    if (feedback_period < 1) throw std::invalid_argument("feedback_period must be >= 1");
    int64_t bits = 0;
    for (const Mask& m : masks) {
        if (m.k != grid.k) throw std::invalid_argument("mask grid size does not match");
        bits += static_cast<int64_t>(m.popcount()) * (header_bytes + grid.patch_pixels()) * 8;
    }
    if (feedback_bytes > 0 && !masks.empty()) {
        const int64_t messages =
            (static_cast<int64_t>(masks.size()) + feedback_period - 1) / feedback_period;
        bits += messages * feedback_bytes * 8;
    }
    return bits;
}

} // namespace patchlink
