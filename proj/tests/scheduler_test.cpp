#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "patchlink/rng.hpp"
#include "patchlink/scheduler.hpp"

using namespace patchlink;

TEST_CASE("budget arithmetic") {
    CHECK(budget(0.5, 8) == 32);
    CHECK(budget(0.05, 8) == 4); // ceil(3.2)
    CHECK(budget(1.0, 8) == 64);
    CHECK(budget(0.25, 8) == 16);
    CHECK(budget(0.85, 8) == 55); // ceil(54.4)
    CHECK(budget(0.001, 8) == 1); // floor at one cell
    CHECK(budget(0.3, 10) == 30); // float noise must not ceil to 31
    CHECK_THROWS_AS(budget(0.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(budget(1.5, 8), std::invalid_argument);
    CHECK_THROWS_AS(budget(-0.1, 8), std::invalid_argument);
}

TEST_CASE("select_top picks the hot cell and breaks ties by linear index") {
    SUBCASE("one-hot map always keeps the hot cell") {
        std::vector<double> probs(64, 0.0);
        probs[37] = 1.0;
        for (double rate : {0.05, 0.25, 0.5, 1.0}) {
            const Mask m = select_top(probs, rate, 8);
            CHECK(m.test(37));
            CHECK(m.popcount() == budget(rate, 8));
        }
    }
    SUBCASE("uniform map at rate 0.5 and k=2 selects indices 0 and 1") {
        const std::vector<double> probs(4, 0.25);
        const Mask m = select_top(probs, 0.5, 2);
        CHECK(m.test(0));
        CHECK(m.test(1));
        CHECK(!m.test(2));
        CHECK(!m.test(3));
    }
}

TEST_CASE("select_top equals the prefix of a stable sort by (-prob, index)") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 gen(seed);
        std::vector<double> probs(64);
        for (auto& p : probs) p = uniform01(gen);
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        for (auto& p : probs) p /= total;

        std::vector<int> order(64);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (probs[static_cast<size_t>(a)] != probs[static_cast<size_t>(b)])
                return probs[static_cast<size_t>(a)] > probs[static_cast<size_t>(b)];
            return a < b;
        });
        const double rate = 0.25;
        const Mask m = select_top(probs, rate, 8);
        for (int i = 0; i < budget(rate, 8); ++i) CHECK(m.test(order[static_cast<size_t>(i)]));
    }
}

TEST_CASE("select_top is invariant under positive rescaling") {
    std::mt19937_64 gen(11);
    std::vector<double> probs(64);
    for (auto& p : probs) p = uniform01(gen);
    const Mask a = select_top(probs, 0.25, 8);
    std::vector<double> scaled = probs;
    for (auto& p : scaled) p *= 1234.5;
    CHECK(select_top(scaled, 0.25, 8) == a);
}

TEST_CASE("random_mask: saturation, determinism, uniformity") {
    SUBCASE("rate 1.0 selects everything") {
        for (uint64_t seed : {1ull, 2ull, 99ull}) {
            CHECK(random_mask(1.0, 8, seed).popcount() == 64);
        }
    }
    SUBCASE("same seed gives the same mask, different seed differs") {
        const Mask a = random_mask(0.25, 8, 7);
        const Mask b = random_mask(0.25, 8, 7);
        CHECK(a == b);
        CHECK(a.popcount() == 16);
    }
    SUBCASE("per-cell selection frequency over 10000 draws is 0.25 +-0.02") {
        std::vector<int> hits(64, 0);
        for (uint64_t seed = 0; seed < 10000; ++seed) {
            const Mask m = random_mask(0.25, 8, seed);
            for (int i = 0; i < 64; ++i) hits[static_cast<size_t>(i)] += m.test(i);
        }
        for (int h : hits) {
            const double freq = h / 10000.0;
            CHECK(freq > 0.23);
            CHECK(freq < 0.27);
        }
    }
}

TEST_CASE("schedule: bootstrap, fail-open, and feedback pass-through") {
    ScheduleConfig cfg;
    cfg.rate = 0.5;
    cfg.bootstrap_frames = 4;
    cfg.policy = Policy::dqn;
    cfg.seed = 3;
    cfg.k = 8;

    SUBCASE("bootstrap frames are full") {
        for (uint32_t n = 0; n < 4; ++n) {
            CHECK(schedule(n, cfg, std::nullopt).popcount() == 64);
        }
    }
    SUBCASE("no feedback ever -> full mask (fail-open)") {
        CHECK(schedule(10, cfg, std::nullopt).popcount() == 64);
    }
    SUBCASE("feedback present -> applied verbatim") {
        Mask fb = Mask::none(8, 6);
        for (int i : {1, 9, 17, 25}) fb.set(i, true);
        const Mask m = schedule(10, cfg, fb);
        CHECK(m.frame_index == 10);
        for (int i = 0; i < 64; ++i) CHECK(m.test(i) == fb.test(i));
    }
    SUBCASE("random policy draws per-frame masks at the budget") {
        cfg.policy = Policy::random;
        const Mask a = schedule(5, cfg, std::nullopt);
        const Mask b = schedule(6, cfg, std::nullopt);
        CHECK(a.popcount() == 32);
        CHECK(b.popcount() == 32);
        CHECK(a.bits != b.bits); // overwhelmingly likely with distinct sub-seeds
        CHECK(schedule(5, cfg, std::nullopt) == a);
    }
}
