#ifndef PATCHLINK_RECONSTRUCT_HPP
#define PATCHLINK_RECONSTRUCT_HPP

#include <optional>

#include "patchlink/frame.hpp"
#include "patchlink/mask.hpp"

namespace patchlink {

// Fills the absent cells of an assembled frame. Temporal first: with a
// previous reconstructed frame every missing cell copies its co-located cell.
// Without one, each missing pixel is filled by bilinear interpolation between
// the boundary pixels of the nearest received cells in its row and column;
// cells with no received neighbor in either direction keep the filler.
// Pixels of received cells are never modified.
Frame interpolate(const Frame& assembled, const Mask& mask, const Frame* previous);

// Mean absolute pixel error over `region` (whole frame when absent),
// normalized to [0,1] by 255.
double reconstruction_error(const Frame& reconstructed, const Frame& original,
                            const std::optional<BoundingBox>& region = std::nullopt);

} // namespace patchlink

#endif // PATCHLINK_RECONSTRUCT_HPP
