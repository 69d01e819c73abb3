#ifndef PATCHLINK_DETECTION_HPP
#define PATCHLINK_DETECTION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "patchlink/frame.hpp"
#include "patchlink/mask.hpp"

namespace patchlink {

// Synthetic single-object scene: a textured rectangle moving with constant
// velocity (reflecting at the frame edges) over a static textured background.
struct SceneConfig {
    int width = 64;
    int height = 64;
    int frame_count = 200;
    int object_w = 12;
    int object_h = 12;
    int x0 = 0;
    int y0 = 0;
    int dx = 1; // px/frame
    int dy = 1;
    int jitter = 0; // max per-frame random nudge in px, 0 = off
    uint64_t background_seed = 1;
    uint64_t object_seed = 2;
    uint64_t jitter_seed = 3;
    uint8_t background_lo = 20, background_hi = 96;  // texture value ranges
    uint8_t object_lo = 160, object_hi = 255;
};

struct Scene {
    std::vector<Frame> frames;
    std::vector<BoundingBox> boxes; // ground truth, aligned with frames
};

Scene scene_generate(const SceneConfig& cfg);

// Fidelity-threshold detection proxy: the target counts as detected when the
// ground-truth region is reconstructed with fidelity
// 1 - reconstruction_error(reconstructed, original, gt) >= theta.
bool detect(const Frame& reconstructed, const Frame& original, const BoundingBox& gt,
            double theta = 0.8);

// Stand-in interface for a real detector; the proxy needs the original frame
// and ground-truth box as its reference, a learned model would ignore them.
class Detector {
public:
    virtual ~Detector() = default;
    virtual bool detect(const Frame& reconstructed, const Frame& original,
                        const BoundingBox& gt) const = 0;
};

class FidelityDetector final : public Detector {
public:
    explicit FidelityDetector(double theta = 0.8) : theta_(theta) {}
    bool detect(const Frame& reconstructed, const Frame& original,
                const BoundingBox& gt) const override {
        return patchlink::detect(reconstructed, original, gt, theta_);
    }

private:
    double theta_;
};

struct DetectionOutcome {
    uint32_t frame_index = 0;
    bool detected = false;
    bool gt_present = false;
};

struct Scores {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// Single-object accounting: TP = gt present and detected, FN = gt present and
// missed, FP = detection with no gt. precision defaults to 1 on an empty
// denominator; F1 is 0 when undefined.
Scores evaluate(std::span<const DetectionOutcome> outcomes);

// Total downlink bits for a mask sequence: per frame
// popcount(mask) * (header_bytes + patch_w*patch_h) * 8, plus one
// feedback_bytes message per feedback_period frames when feedback_bytes > 0.
int64_t bits_transmitted(std::span<const Mask> masks, const GridSpec& grid,
                         int header_bytes = 22, int feedback_bytes = 0,
                         int feedback_period = 1);

} // namespace patchlink

#endif // PATCHLINK_DETECTION_HPP
