#include "patchlink/pgm_io.hpp"

#include <fstream>
#include <sstream>

namespace patchlink {

namespace {

// Next whitespace-separated token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

} // namespace

void save_pgm(const Frame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

Frame load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    if (next_token(in) != "P5") throw std::runtime_error("not a binary PGM: " + path);
    const int w = std::stoi(next_token(in));
    const int h = std::stoi(next_token(in));
    const int maxval = std::stoi(next_token(in));
    if (w <= 0 || h <= 0) throw std::runtime_error("bad PGM dimensions: " + path);
    if (maxval != 255) throw std::runtime_error("unsupported PGM maxval: " + path);
    // the token reader consumed the single whitespace after maxval
    Frame frame(0, w, h);
    in.read(reinterpret_cast<char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(frame.pixels.size())) {
        throw std::runtime_error("truncated PGM: " + path);
    }
    return frame;
}

std::map<uint32_t, BoundingBox> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::map<uint32_t, BoundingBox> boxes;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        long long idx, x, y, w, h;
        char c1, c2, c3, c4;
        if (!(ls >> idx >> c1 >> x >> c2 >> y >> c3 >> w >> c4 >> h) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected frame_index,x,y,w,h");
        }
        boxes[static_cast<uint32_t>(idx)] =
            BoundingBox{static_cast<int>(x), static_cast<int>(y),
                        static_cast<int>(w), static_cast<int>(h)};
    }
    return boxes;
}

void save_annotations(const std::map<uint32_t, BoundingBox>& boxes, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# frame_index,x,y,w,h\n";
    for (const auto& [idx, box] : boxes) {
        out << idx << "," << box.x << "," << box.y << "," << box.w << "," << box.h << "\n";
    }
}

} // namespace patchlink
