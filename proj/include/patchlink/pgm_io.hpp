#ifndef PATCHLINK_PGM_IO_HPP
#define PATCHLINK_PGM_IO_HPP

#include <map>
#include <string>

#include "patchlink/frame.hpp"

namespace patchlink {

// Binary PGM (P5, maxval 255) save/load.
void save_pgm(const Frame& frame, const std::string& path);
Frame load_pgm(const std::string& path);

// One annotation CSV per sequence: lines `frame_index,x,y,w,h`, '#' comments
// allowed. One target box per frame (single object tracking).
std::map<uint32_t, BoundingBox> load_annotations(const std::string& path);
void save_annotations(const std::map<uint32_t, BoundingBox>& boxes, const std::string& path);

} // namespace patchlink

#endif // PATCHLINK_PGM_IO_HPP
