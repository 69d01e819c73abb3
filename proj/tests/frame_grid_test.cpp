#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "patchlink/frame.hpp"
#include "patchlink/pgm_io.hpp"
#include "patchlink/rng.hpp"

using namespace patchlink;

namespace {

Frame random_frame(uint32_t index, int w, int h, uint64_t seed, uint8_t lo = 0, uint8_t hi = 255) {
    std::mt19937_64 gen(seed);
    Frame f(index, w, h);
    for (auto& p : f.pixels) p = static_cast<uint8_t>(lo + bounded(gen, hi - lo + 1u));
    return f;
}

} // namespace

TEST_CASE("tile splits a 16x16 frame into 4 patches in row-major order") {
    Frame f(3, 16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) f.put(x, y, static_cast<uint8_t>(y * 16 + x));
    const GridSpec grid = GridSpec::for_frame(16, 16, 2);
    const auto patches = tile(f, grid);
    REQUIRE(patches.size() == 4);
    CHECK(patches[0].cell == CellId{0, 0});
    CHECK(patches[1].cell == CellId{0, 1});
    CHECK(patches[2].cell == CellId{1, 0});
    CHECK(patches[3].cell == CellId{1, 1});
    // top-left patch equals frame rows 0-7, cols 0-7
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            CHECK(patches[0].pixels[static_cast<size_t>(y) * 8 + x] == f.at(x, y));
    CHECK(patches[0].frame_index == 3);
}

TEST_CASE("tile with k=1 yields one patch equal to the whole frame") {
    const Frame f = random_frame(0, 12, 9, 77);
    const GridSpec grid = GridSpec::for_frame(12, 9, 1);
    const auto patches = tile(f, grid);
    REQUIRE(patches.size() == 1);
    CHECK(patches[0].pixels == f.pixels);
}

TEST_CASE("tile rejects non-divisible dimensions") {
    Frame f(0, 30, 30);
    CHECK_THROWS_AS(GridSpec::for_frame(30, 30, 8), std::invalid_argument);
    // a grid built for other dimensions must not accept this frame
    const GridSpec grid = GridSpec::for_frame(32, 32, 8);
    CHECK_THROWS_AS(tile(f, grid), std::invalid_argument);
}

TEST_CASE("assemble(tile(f)) round-trips 100 seeded random frames") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        const Frame f = random_frame(static_cast<uint32_t>(seed), 64, 64, seed);
        const GridSpec grid = GridSpec::for_frame(64, 64, 8);
        const auto patches = tile(f, grid);
        const Frame back = assemble(patches, grid, Mask::full(8, f.index));
        CHECK(back == f);
    }
}

TEST_CASE("tiling partitions the frame: patches are disjoint and cover everything") {
    const Frame f = random_frame(0, 24, 24, 5);
    const GridSpec grid = GridSpec::for_frame(24, 24, 4);
    const auto patches = tile(f, grid);
    std::vector<int> covered(f.pixels.size(), 0);
    for (const Patch& p : patches) {
        const int x0 = p.cell.col * grid.patch_w;
        const int y0 = p.cell.row * grid.patch_h;
        for (int y = 0; y < grid.patch_h; ++y)
            for (int x = 0; x < grid.patch_w; ++x) ++covered[static_cast<size_t>(y0 + y) * 24 + x0 + x];
    }
    for (int c : covered) CHECK(c == 1);
}

TEST_CASE("pad_to_grid arithmetic and idempotence") {
    SUBCASE("30x30 to 32x32 for k=8") {
        const Frame f = random_frame(1, 30, 30, 9);
        const Frame p = pad_to_grid(f, 8, 0);
        CHECK(p.width == 32);
        CHECK(p.height == 32);
        // original content in the top-left, padding zeroed
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 30; ++x) CHECK(p.at(x, y) == f.at(x, y));
        CHECK(p.at(31, 31) == 0);
        CHECK(pad_to_grid(p, 8, 0) == p);
    }
    SUBCASE("already divisible is unchanged") {
        const Frame f = random_frame(2, 64, 64, 10);
        CHECK(pad_to_grid(f, 8) == f);
    }
    SUBCASE("33x17 to 40x24 for k=8") {
        const Frame f = random_frame(3, 33, 17, 11);
        const Frame p = pad_to_grid(f, 8);
        CHECK(p.width == 40);
        CHECK(p.height == 24);
    }
}

TEST_CASE("assemble fills absent cells with filler") {
    // non-zero pixels so filler bytes are countable exactly
    const Frame f = random_frame(0, 16, 16, 21, 1, 255);
    const GridSpec grid = GridSpec::for_frame(16, 16, 2);
    auto patches = tile(f, grid);

    SUBCASE("zero patches -> all filler") {
        const Frame out = assemble({}, grid, Mask::none(2), 7);
        for (uint8_t p : out.pixels) CHECK(p == 7);
    }
    SUBCASE("2 of 4 patches -> exactly 128 filler bytes") {
        Mask mask = Mask::none(2);
        mask.set(0, true);
        mask.set(3, true);
        const std::vector<Patch> two{patches[0], patches[3]};
        const Frame out = assemble(two, grid, mask, 0);
        int fillers = 0;
        for (uint8_t p : out.pixels) fillers += p == 0;
        CHECK(fillers == 128);
        // present cells carry the patch pixels
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) CHECK(out.at(x, y) == f.at(x, y));
    }
    SUBCASE("duplicate cell is a protocol error") {
        const std::vector<Patch> dup{patches[0], patches[0]};
        CHECK_THROWS_AS(assemble(dup, grid, Mask::full(2), 0), ProtocolError);
    }
    SUBCASE("patch for a cell not in the mask is a protocol error") {
        Mask mask = Mask::none(2);
        mask.set(0, true);
        const std::vector<Patch> wrong{patches[1]};
        CHECK_THROWS_AS(assemble(wrong, grid, mask, 0), ProtocolError);
    }
}

TEST_CASE("assemble is insensitive to patch order") {
    const Frame f = random_frame(0, 64, 64, 33);
    const GridSpec grid = GridSpec::for_frame(64, 64, 8);
    auto patches = tile(f, grid);
    std::mt19937_64 gen(8);
    for (size_t i = patches.size() - 1; i > 0; --i) {
        std::swap(patches[i], patches[bounded(gen, i + 1)]);
    }
    CHECK(assemble(patches, grid, Mask::full(8, 0)) == f);
}

TEST_CASE("cell_overlap basics") {
    const GridSpec grid = GridSpec::for_frame(64, 64, 8);
    SUBCASE("box covering exactly one cell") {
        const BoundingBox box{8, 16, 8, 8}; // cell (2,1)
        for (int row = 0; row < 8; ++row) {
            for (int col = 0; col < 8; ++col) {
                const double o = cell_overlap(CellId{row, col}, grid, box);
                if (row == 2 && col == 1) CHECK(o == 1.0);
                else CHECK(o == 0.0);
            }
        }
    }
    SUBCASE("box covering the whole frame") {
        const BoundingBox box{0, 0, 64, 64};
        for (int i = 0; i < 64; ++i) CHECK(cell_overlap(grid.cell_at(i), grid, box) == 1.0);
    }
    SUBCASE("left half of a cell") {
        const BoundingBox box{0, 0, 4, 8};
        CHECK(cell_overlap(CellId{0, 0}, grid, box) == 0.5);
    }
}

TEST_CASE("cell_overlap matches a pixel-count brute force and conserves area") {
    std::mt19937_64 gen(2024);
    const GridSpec grid = GridSpec::for_frame(64, 64, 8);
    for (int trial = 0; trial < 50; ++trial) {
        const int x = static_cast<int>(bounded(gen, 60));
        const int y = static_cast<int>(bounded(gen, 60));
        const int w = 1 + static_cast<int>(bounded(gen, static_cast<uint64_t>(64 - x)));
        const int h = 1 + static_cast<int>(bounded(gen, static_cast<uint64_t>(64 - y)));
        const BoundingBox box{x, y, w, h};

        long long pixel_total = 0;
        for (int i = 0; i < 64; ++i) {
            const CellId cell = grid.cell_at(i);
            // brute force: count pixels of the cell inside the box
            long long inside = 0;
            for (int py = cell.row * 8; py < (cell.row + 1) * 8; ++py)
                for (int px = cell.col * 8; px < (cell.col + 1) * 8; ++px)
                    inside += px >= x && px < x + w && py >= y && py < y + h;
            const double o = cell_overlap(cell, grid, box);
            CHECK(o == doctest::Approx(static_cast<double>(inside) / 64.0).epsilon(1e-12));
            pixel_total += inside;
        }
        CHECK(pixel_total == static_cast<long long>(w) * h); // conservation, exact
    }
}

TEST_CASE("clip_box clips against frame bounds") {
    CHECK(clip_box({-3, -3, 10, 10}, 64, 64) == BoundingBox{0, 0, 7, 7});
    CHECK(clip_box({60, 60, 10, 10}, 64, 64) == BoundingBox{60, 60, 4, 4});
    CHECK(!clip_box({70, 70, 5, 5}, 64, 64).has_value());
}

TEST_CASE("PGM round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "patchlink_pgm_test";
    std::filesystem::create_directories(dir);
    const Frame f = random_frame(0, 33, 17, 99);
    const std::string path = (dir / "frame.pgm").string();
    save_pgm(f, path);
    const Frame back = load_pgm(path);
    CHECK(back.width == f.width);
    CHECK(back.height == f.height);
    CHECK(back.pixels == f.pixels);
    std::filesystem::remove_all(dir);
}

TEST_CASE("annotation CSV round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "patchlink_csv_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "annotations.csv").string();
    std::map<uint32_t, BoundingBox> boxes{{0, {1, 2, 3, 4}}, {7, {10, 20, 12, 12}}};
    save_annotations(boxes, path);
    CHECK(load_annotations(path) == boxes);
    std::filesystem::remove_all(dir);
}
