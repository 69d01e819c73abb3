#include <doctest.h>

#include <vector>

#include "patchlink/detection.hpp"
#include "patchlink/reconstruct.hpp"
#include "patchlink/scheduler.hpp"

using namespace patchlink;

TEST_CASE("scene_generate: static target keeps its box") {
    SceneConfig cfg;
    cfg.frame_count = 10;
    cfg.dx = 0;
    cfg.dy = 0;
    cfg.x0 = 20;
    cfg.y0 = 24;
    const Scene scene = scene_generate(cfg);
    REQUIRE(scene.boxes.size() == 10);
    for (const auto& box : scene.boxes) CHECK(box == BoundingBox{20, 24, 12, 12});
}

TEST_CASE("scene_generate: unit velocity gives an arithmetic x sequence") {
    SceneConfig cfg;
    cfg.frame_count = 10;
    cfg.dx = 1;
    cfg.dy = 0;
    cfg.x0 = 5;
    cfg.y0 = 0;
    const Scene scene = scene_generate(cfg);
    for (int n = 0; n < 10; ++n) {
        CHECK(scene.boxes[static_cast<size_t>(n)].x == 5 + n);
        CHECK(scene.boxes[static_cast<size_t>(n)].y == 0);
    }
}

TEST_CASE("scene_generate: deterministic per config") {
    SceneConfig cfg;
    cfg.frame_count = 20;
    cfg.jitter = 1;
    const Scene a = scene_generate(cfg);
    const Scene b = scene_generate(cfg);
    REQUIRE(a.frames.size() == b.frames.size());
    for (size_t i = 0; i < a.frames.size(); ++i) {
        CHECK(a.frames[i] == b.frames[i]);
        CHECK(a.boxes[i] == b.boxes[i]);
    }
}

TEST_CASE("scene_generate: object stays inside the frame, even bouncing") {
    SceneConfig cfg;
    cfg.frame_count = 400;
    cfg.dx = 3;
    cfg.dy = 2;
    cfg.jitter = 2;
    const Scene scene = scene_generate(cfg);
    for (const auto& box : scene.boxes) {
        CHECK(box.x >= 0);
        CHECK(box.y >= 0);
        CHECK(box.x + box.w <= cfg.width);
        CHECK(box.y + box.h <= cfg.height);
    }
    // the object visibly moves in both directions over a long run
    bool moved_left = false, moved_right = false;
    for (size_t i = 1; i < scene.boxes.size(); ++i) {
        moved_left |= scene.boxes[i].x < scene.boxes[i - 1].x;
        moved_right |= scene.boxes[i].x > scene.boxes[i - 1].x;
    }
    CHECK(moved_left);
    CHECK(moved_right);
}

TEST_CASE("scene_generate: invalid configs are rejected") {
    SceneConfig cfg;
    cfg.object_w = 100; // larger than the frame
    CHECK_THROWS_AS(scene_generate(cfg), std::invalid_argument);
    cfg = SceneConfig{};
    cfg.frame_count = 0;
    CHECK_THROWS_AS(scene_generate(cfg), std::invalid_argument);
}

TEST_CASE("detect: thresholded fidelity over the ground-truth region") {
    SceneConfig cfg;
    cfg.frame_count = 1;
    cfg.x0 = 16;
    cfg.y0 = 16;
    cfg.dx = 0;
    cfg.dy = 0;
    const Scene scene = scene_generate(cfg);
    const Frame& original = scene.frames[0];
    const BoundingBox gt = scene.boxes[0];

    SUBCASE("perfect reconstruction detects at any theta") {
        CHECK(detect(original, original, gt, 1.0));
        CHECK(detect(original, original, gt, 0.5));
    }
    SUBCASE("black filler over a bright target misses at theta 0.8") {
        Frame black = original;
        for (int y = gt.y; y < gt.y + gt.h; ++y)
            for (int x = gt.x; x < gt.x + gt.w; ++x) black.put(x, y, 0);
        // object texture is >= 160, so the fidelity over the box is < 0.8
        CHECK(!detect(black, original, gt, 0.8));
    }
    SUBCASE("monotone in fidelity: improving the region never un-detects") {
        Frame degraded = original;
        for (int y = gt.y; y < gt.y + gt.h; ++y)
            for (int x = gt.x; x < gt.x + gt.w; ++x) degraded.put(x, y, 0);
        Frame improved = degraded;
        for (int y = gt.y; y < gt.y + gt.h / 2; ++y)
            for (int x = gt.x; x < gt.x + gt.w; ++x) improved.put(x, y, original.at(x, y));
        for (double theta : {0.3, 0.5, 0.8, 1.0}) {
            if (detect(degraded, original, gt, theta)) CHECK(detect(improved, original, gt, theta));
        }
    }
    SUBCASE("theta outside (0,1] is rejected") {
        CHECK_THROWS_AS(detect(original, original, gt, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(detect(original, original, gt, 1.1), std::invalid_argument);
    }
}

TEST_CASE("evaluate: precision/recall/F1 accounting") {
    SUBCASE("all detected -> perfect scores") {
        std::vector<DetectionOutcome> outcomes(10, DetectionOutcome{0, true, true});
        const Scores s = evaluate(outcomes);
        CHECK(s.f1 == doctest::Approx(1.0));
        CHECK(s.precision == doctest::Approx(1.0));
        CHECK(s.recall == doctest::Approx(1.0));
    }
    SUBCASE("nothing detected -> F1 = 0, precision defaults to 1") {
        std::vector<DetectionOutcome> outcomes(10, DetectionOutcome{0, false, true});
        const Scores s = evaluate(outcomes);
        CHECK(s.f1 == doctest::Approx(0.0));
        CHECK(s.precision == doctest::Approx(1.0));
    }
    SUBCASE("53 of 100 with no false positives") {
        std::vector<DetectionOutcome> outcomes;
        for (int i = 0; i < 100; ++i) outcomes.push_back({0, i < 53, true});
        const Scores s = evaluate(outcomes);
        CHECK(s.precision == doctest::Approx(1.0));
        CHECK(s.recall == doctest::Approx(0.53));
        CHECK(s.f1 == doctest::Approx(2.0 * 0.53 / 1.53)); // about 0.693
    }
    SUBCASE("false positives lower precision") {
        std::vector<DetectionOutcome> outcomes;
        outcomes.push_back({0, true, true});
        outcomes.push_back({1, true, false}); // detection with no target
        const Scores s = evaluate(outcomes);
        CHECK(s.precision == doctest::Approx(0.5));
        CHECK(s.recall == doctest::Approx(1.0));
    }
    SUBCASE("permutation-invariant") {
        std::vector<DetectionOutcome> a{{0, true, true}, {1, false, true}, {2, true, false}};
        std::vector<DetectionOutcome> b{a[2], a[0], a[1]};
        const Scores sa = evaluate(a);
        const Scores sb = evaluate(b);
        CHECK(sa.f1 == sb.f1);
        CHECK(sa.precision == sb.precision);
        CHECK(sa.recall == sb.recall);
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(evaluate({}), std::invalid_argument);
    }
}

TEST_CASE("bits_transmitted accounting") {
    const GridSpec grid = GridSpec::for_frame(64, 64, 8);

    SUBCASE("full mask on a 64x64/k=8 frame is 44032 bits") {
        const std::vector<Mask> masks{Mask::full(8)};
        CHECK(bits_transmitted(masks, grid) == 44032);
    }
    SUBCASE("half-rate mask sends exactly half the patch bits") {
        Mask half = Mask::none(8);
        for (int i = 0; i < 32; ++i) half.set(i, true);
        const std::vector<Mask> halves(10, half);
        const std::vector<Mask> fulls(10, Mask::full(8));
        CHECK(bits_transmitted(halves, grid) * 2 == bits_transmitted(fulls, grid));
    }
    SUBCASE("linear in frame count") {
        const std::vector<Mask> one(1, Mask::full(8));
        const std::vector<Mask> five(5, Mask::full(8));
        CHECK(bits_transmitted(five, grid) == 5 * bits_transmitted(one, grid));
    }
    SUBCASE("strictly increasing across the rate ladder") {
        int64_t prev = 0;
        for (double rate : {0.05, 0.10, 0.25, 0.50, 0.75, 0.85, 1.0}) {
            Mask m = Mask::none(8);
            for (int i = 0; i < budget(rate, 8); ++i) m.set(i, true);
            const std::vector<Mask> masks(3, m);
            const int64_t bits = bits_transmitted(masks, grid);
            CHECK(bits > prev);
            prev = bits;
        }
    }
    SUBCASE("feedback bits are charged once per period") {
        const std::vector<Mask> masks(10, Mask::full(8));
        const int64_t base = bits_transmitted(masks, grid, 22, 0, 1);
        CHECK(bits_transmitted(masks, grid, 22, 19, 1) == base + 10 * 19 * 8);
        CHECK(bits_transmitted(masks, grid, 22, 19, 5) == base + 2 * 19 * 8);
    }
}
