#include <doctest.h>

#include <cstdio>
#include <random>
#include <stdexcept>

#include "sf/io.h"

using namespace sf;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const char* name) : path(name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("disparity PNG round trip is exact on the 1/256 grid") {
    TempFile f("io_test_disp.png");
    ScalarMap d(33, 17);
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> q(0, 64 * 256);
    for (int y = 0; y < 17; ++y)
        for (int x = 0; x < 33; ++x) d(x, y) = q(rng) / 256.0f;
    d(0, 0) = 0.0f;  // invalid marker survives
    write_disparity_png(f.path, d);
    const ScalarMap back = read_disparity_png(f.path);
    REQUIRE(back.width() == 33);
    REQUIRE(back.height() == 17);
    for (int y = 0; y < 17; ++y)
        for (int x = 0; x < 33; ++x) CHECK(back(x, y) == d(x, y));
}

TEST_CASE("flow PNG round trip is exact on the 1/64 grid with validity") {
    TempFile f("io_test_flow.png");
    VectorMap flow(21, 13);
    MaskMap valid(21, 13, 0);
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> q(-300 * 64, 300 * 64);
    std::bernoulli_distribution coin(0.7);
    for (int y = 0; y < 13; ++y)
        for (int x = 0; x < 21; ++x) {
            flow(x, y) = Vec2f(q(rng) / 64.0f, q(rng) / 64.0f);
            valid(x, y) = coin(rng) ? 1 : 0;
        }
    write_flow_png(f.path, flow, valid);
    VectorMap flow2;
    MaskMap valid2;
    read_flow_png(f.path, &flow2, &valid2);
    for (int y = 0; y < 13; ++y)
        for (int x = 0; x < 21; ++x) {
            CHECK(flow2(x, y) == flow(x, y));
            CHECK(valid2(x, y) == valid(x, y));
        }
}

TEST_CASE("mask and intensity PNG round trips") {
    TempFile fm("io_test_mask.png");
    MaskMap mask(19, 11, 0);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 19; ++x) mask(x, y) = (x + y) % 3 == 0 ? 1 : 0;
    write_mask_png(fm.path, mask);
    const MaskMap mask2 = read_mask_png(fm.path);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 19; ++x) CHECK(mask2(x, y) == mask(x, y));

    // 8-bit gray quantized to k/255 survives exactly through the color reader.
    TempFile fg("io_test_gray.png");
    GrayImage gray(9, 7);
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> q(0, 255);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x) gray(x, y) = q(rng) / 255.0f;
    write_gray_png(fg.path, gray);
    const ColorImage gback = read_image_png(fg.path);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x) {
            CHECK(gback(x, y).x() == doctest::Approx(gray(x, y)).epsilon(1e-6));
            CHECK(gback(x, y).x() == gback(x, y).y());
            CHECK(gback(x, y).x() == gback(x, y).z());
        }

    TempFile fc("io_test_color.png");
    ColorImage color(9, 7);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x)
            color(x, y) = Vec3f(q(rng) / 255.0f, q(rng) / 255.0f, q(rng) / 255.0f);
    write_color_png(fc.path, color);
    const ColorImage cback = read_image_png(fc.path);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x)
            CHECK((cback(x, y) - color(x, y)).norm() < 1e-6f);
}

TEST_CASE("pose and calibration text files round trip") {
    TempFile fp("io_test_poses.txt");
    std::vector<Pose> poses;
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 4; ++i) {
        Pose p;
        p.r = Eigen::AngleAxisd(uni(rng), Vec3d(uni(rng), uni(rng), uni(rng)).normalized())
                  .toRotationMatrix();
        p.t = Vec3d(uni(rng), uni(rng), uni(rng));
        poses.push_back(p);
    }
    write_poses(fp.path, poses);
    const std::vector<Pose> back = read_poses(fp.path);
    REQUIRE(back.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK((back[i].r - poses[i].r).norm() < 1e-12);
        CHECK((back[i].t - poses[i].t).norm() < 1e-12);
    }

    TempFile fc("io_test_calib.txt");
    StereoRig rig;
    rig.intrinsics.f = 721.5377;
    rig.intrinsics.cx = 609.5593;
    rig.intrinsics.cy = 172.854;
    rig.baseline = 0.5371657;
    rig.width = 1242;
    rig.height = 375;
    write_calib(fc.path, rig);
    const StereoRig rig2 = read_calib(fc.path);
    CHECK(rig2.intrinsics.f == rig.intrinsics.f);
    CHECK(rig2.intrinsics.cx == rig.intrinsics.cx);
    CHECK(rig2.intrinsics.cy == rig.intrinsics.cy);
    CHECK(rig2.baseline == rig.baseline);
    CHECK(rig2.width == rig.width);
    CHECK(rig2.height == rig.height);
}

TEST_CASE("flow visualization is deterministic, white at rest, in range") {
    VectorMap flow(16, 16, Vec2f::Zero());
    flow(5, 5) = Vec2f(3.0f, 0.0f);
    flow(10, 10) = Vec2f(0.0f, -2.0f);
    const ColorImage a = flow_to_color(flow);
    const ColorImage b = flow_to_color(flow);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(a(x, y) == b(x, y));
            for (int c = 0; c < 3; ++c) {
                CHECK(a(x, y)(c) >= 0.0f);
                CHECK(a(x, y)(c) <= 1.0f);
            }
        }
    CHECK((a(0, 0) - Vec3f::Ones()).norm() == 0.0f);  // zero motion is white
    CHECK((a(5, 5) - Vec3f::Ones()).norm() > 0.1f);
}

TEST_CASE("io reports unusable files") {
    CHECK_THROWS_AS(read_disparity_png("io_test_missing.png"), std::runtime_error);
    CHECK_THROWS_AS(read_poses("io_test_missing.txt"), std::runtime_error);
    CHECK_THROWS_AS(read_calib("io_test_missing.txt"), std::runtime_error);

    // An 8-bit mask PNG is not a valid 16-bit disparity or flow file.
    TempFile fm("io_test_wrongtype.png");
    write_mask_png(fm.path, MaskMap(4, 4, 1));
    CHECK_THROWS_AS(read_disparity_png(fm.path), std::runtime_error);
    VectorMap flow;
    MaskMap valid;
    CHECK_THROWS_AS(read_flow_png(fm.path, &flow, &valid), std::runtime_error);
}
