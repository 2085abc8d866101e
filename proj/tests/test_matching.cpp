#include <doctest.h>

#include <cmath>
#include <random>

#include "sf/matching.h"

using namespace sf;

namespace {

GrayImage noise_image(int w, int h, uint32_t seed) {
    GrayImage img(w, h);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img(x, y) = u(rng);
    return img;
}

// Direct-formula NCC of two pixel-aligned 5x5 patches.
double ncc_oracle(const GrayImage& a, int ax, int ay, const GrayImage& b, int bx, int by) {
    double ma = 0, mb = 0;
    for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
            ma += a(ax + dx, ay + dy);
            mb += b(bx + dx, by + dy);
        }
    ma /= 25;
    mb /= 25;
    double num = 0, va = 0, vb = 0;
    for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
            const double da = a(ax + dx, ay + dy) - ma;
            const double db = b(bx + dx, by + dy) - mb;
            num += da * db;
            va += da * da;
            vb += db * db;
        }
    return num / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("ncc scores identical, negated and fixed patches") {
    const GrayImage img = noise_image(32, 32, 5);
    const Vec2d p(10, 12);
    CHECK(*ncc(img, p, img, p) == doctest::Approx(1.0).epsilon(1e-12));

    // Negation about the mean flips the score to -1.
    GrayImage neg(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) neg(x, y) = 1.0f - img(x, y);
    CHECK(*ncc(img, p, neg, p) == doctest::Approx(-1.0).epsilon(1e-9));

    // Two fixed patterns vs the direct formula.
    const GrayImage other = noise_image(32, 32, 9);
    for (int i = 0; i < 20; ++i) {
        const int ax = 3 + i, ay = 5 + (i % 11), bx = 20 - (i % 7), by = 8 + (i % 9);
        const double got = *ncc(img, Vec2d(ax, ay), other, Vec2d(bx, by));
        CHECK(got == doctest::Approx(ncc_oracle(img, ax, ay, other, bx, by)).epsilon(1e-9));
        // Symmetry under swapping the patches.
        CHECK(got == doctest::Approx(*ncc(other, Vec2d(bx, by), img, Vec2d(ax, ay))).epsilon(1e-9));
    }
}

TEST_CASE("ncc degenerate and out-of-bounds handling") {
    const GrayImage flat(16, 16, 0.5f);
    const GrayImage tex = noise_image(16, 16, 3);
    CHECK(*ncc(tex, Vec2d(8, 8), flat, Vec2d(8, 8)) == 0.0);
    CHECK(*ncc(flat, Vec2d(8, 8), flat, Vec2d(8, 8)) == 0.0);
    CHECK_FALSE(ncc(tex, Vec2d(8, 8), tex, Vec2d(-3, 8)).has_value());
    CHECK_FALSE(ncc(tex, Vec2d(8, 8), tex, Vec2d(8, 40)).has_value());
}

TEST_CASE("ncc is invariant to affine intensity changes") {
    const GrayImage img = noise_image(24, 24, 7);
    GrayImage affine(24, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) affine(x, y) = 0.4f * img(x, y) + 0.17f;
    for (int i = 0; i < 10; ++i) {
        const Vec2d p(4 + i, 6 + i);
        CHECK(*ncc(img, p, affine, p) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("tncc truncation and invalid-patch cost") {
    const GrayImage img = noise_image(32, 32, 5);
    GrayImage neg(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) neg(x, y) = 1.0f - img(x, y);
    const Vec2d p(10, 12);
    CHECK(tncc(img, p, img, p, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(tncc(img, p, neg, p, 1.0) == doctest::Approx(1.0));  // capped from 2
    CHECK(tncc(img, p, img, Vec2d(-5, 2), 0.25) == 0.25);      // invalid -> cap

    // NCC = 0.9 with cap 0.25 gives 0.1: blend a patch towards a flat one so
    // that the analytic NCC is controllable, then check against the oracle.
    const GrayImage other = noise_image(32, 32, 9);
    const double n = *ncc(img, p, other, Vec2d(15, 15));
    CHECK(tncc(img, p, other, Vec2d(15, 15), 0.25) ==
          doctest::Approx(std::min(1.0 - n, 0.25)).epsilon(1e-12));
}

TEST_CASE("tncc 0.9 -> 0.1 under the quarter cap") {
    // Direct arithmetic check of min(1 - 0.9, 0.25).
    CHECK(std::min(1.0 - 0.9, 0.25) == doctest::Approx(0.1));
}

TEST_CASE("stereo cost volume finds a pure shift") {
    const int w = 64, h = 24, shift = 7;
    const GrayImage left = noise_image(w, h, 21);
    GrayImage right(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) right(x, y) = left.at_clamped(x + shift, y);
    const CostVolume vol = stereo_cost_volume(left, right, 15, 1.0f);
    REQUIRE(vol.labels() == 16);
    for (int y = 3; y < h - 3; ++y)
        for (int x = shift + 3; x < w - 3; ++x) {
            int best = 0;
            for (int d = 1; d < vol.labels(); ++d)
                if (vol.at(x, y, d) < vol.at(x, y, best)) best = d;
            CHECK(best == shift);
            CHECK(vol.at(x, y, shift) == doctest::Approx(0.0).epsilon(1e-6));
        }
    // d beyond the left border costs the cap.
    CHECK(vol.at(4, 10, 10) == 1.0f);
    // All costs within [0, cap].
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int d = 0; d < vol.labels(); ++d) {
                CHECK(vol.at(x, y, d) >= 0.0f);
                CHECK(vol.at(x, y, d) <= 1.0f);
            }
}

TEST_CASE("stereo cost volume on constant images is all cap") {
    const GrayImage flat(32, 16, 0.3f);
    const CostVolume vol = stereo_cost_volume(flat, flat, 8, 1.0f);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 32; ++x)
            for (int d = 0; d <= 8; ++d) CHECK(vol.at(x, y, d) == 1.0f);
}

TEST_CASE("pose cost volume reduces to stereo under the rig pose") {
    StereoRig rig;
    rig.intrinsics = {100.0, 32.0, 12.0};
    rig.baseline = 0.5;
    rig.width = 64;
    rig.height = 24;
    const GrayImage left = noise_image(64, 24, 21);
    GrayImage right(64, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 64; ++x) right(x, y) = left.at_clamped(x + 7, y);
    const CostVolume a = stereo_cost_volume(left, right, 12, 1.0f);
    const CostVolume b = pose_cost_volume(left, right, 12, rig, rig.left_to_right(), 1.0f);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 64; ++x)
            for (int d = 1; d <= 12; ++d)  // d=0 is rotational in the pose variant
                CHECK(b.at(x, y, d) == doctest::Approx(a.at(x, y, d)).epsilon(1e-6));
}

TEST_CASE("pose cost volume under the identity pose is flat zero on texture") {
    StereoRig rig;
    rig.intrinsics = {100.0, 24.0, 12.0};
    rig.baseline = 0.5;
    rig.width = 48;
    rig.height = 24;
    const GrayImage img = noise_image(48, 24, 31);
    const CostVolume vol = pose_cost_volume(img, img, 6, rig, Pose::identity(), 1.0f);
    for (int y = 3; y < 21; ++y)
        for (int x = 3; x < 45; ++x)
            for (int d = 0; d <= 6; ++d)
                CHECK(vol.at(x, y, d) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("flow cost volume finds a 2D shift and respects the mask") {
    const int w = 48, h = 32;
    const GrayImage ref = noise_image(w, h, 41);
    GrayImage target(w, h);
    const int su = 3, sv = -2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) target(x, y) = ref.at_clamped(x - su, y - sv);
    FlowRange range;
    range.u = {-4, 4};
    range.v = {-4, 4};
    MaskMap mask(w, h, 1);
    for (int y = 0; y < h; ++y) mask(0, y) = 0;  // exclude first column
    const CostVolume vol = flow_cost_volume(ref, target, range, 1.0f, &mask);
    const int label = (sv - range.v.min) * range.u.count() + (su - range.u.min);
    for (int y = 7; y < h - 7; ++y)
        for (int x = 8; x < w - 8; ++x) {
            int best = 0;
            for (int l = 1; l < vol.labels(); ++l)
                if (vol.at(x, y, l) < vol.at(x, y, best)) best = l;
            CHECK(best == label);
        }
    for (int y = 0; y < h; ++y)
        for (int l = 0; l < vol.labels(); ++l) CHECK(vol.at(0, y, l) == 1.0f);
}

TEST_CASE("patch stddev weight saturates and scales") {
    // Constant image -> 0 everywhere.
    const GrayImage flat(16, 16, 0.7f);
    const ScalarMap wf = patch_stddev_weight(flat, 0.005f);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) CHECK(wf(x, y) == 0.0f);

    // High-contrast checker saturates at 1.
    GrayImage checker(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) checker(x, y) = ((x + y) & 1) ? 1.0f : 0.0f;
    const ScalarMap wc = patch_stddev_weight(checker, 0.005f);
    CHECK(wc(8, 8) == 1.0f);

    // Patch with stddev exactly half the cap -> 0.5. Build a 5x5 patch whose
    // population stddev is 0.0025 by construction: one pixel offset by delta
    // in a flat patch has stddev delta*sqrt(24)/25.
    GrayImage one(16, 16, 0.5f);
    const double delta = 0.0025 * 25.0 / std::sqrt(24.0);
    one(8, 8) = static_cast<float>(0.5 + delta);
    const ScalarMap wo = patch_stddev_weight(one, 0.005f);
    CHECK(wo(8, 8) == doctest::Approx(0.5).epsilon(1e-4));
}
