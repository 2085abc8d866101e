#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "sf/synthetic.h"
#include "scenes.h"

using namespace sf;

TEST_CASE("single fronto-parallel plane renders its closed-form disparity") {
    const StereoRig rig = scenes::small_rig();
    SceneSpec spec;
    spec.rig = rig;
    spec.noise = 0.0;
    TexturedPlane plane;
    plane.origin = Vec3d(0, 0, 20);
    plane.texture_seed = 7;
    plane.texture_scale = 1.5;
    spec.planes.push_back(plane);
    spec.camera.push_back(Pose::identity());
    const std::vector<FrameTruth> frames = render(spec);
    REQUIRE(frames.size() == 1);
    const float d = static_cast<float>(rig.depth_to_disparity(20.0));
    for (int y = 0; y < rig.height; ++y)
        for (int x = 0; x < rig.width; ++x) {
            CHECK(frames[0].gt_disparity(x, y) == doctest::Approx(d).epsilon(1e-9));
            CHECK(frames[0].gt_mask(x, y) == 0);
            CHECK(frames[0].gt_flow(x, y).norm() == 0.0f);  // last frame
        }
}

TEST_CASE("rendered stereo pair satisfies the epipolar identity") {
    const StereoRig rig = scenes::small_rig();
    // Fronto-parallel plane at depth f*B/3 = 20: disparity is exactly 3 px, so
    // the right view at (x - 3, y) sees the identical surface sample.
    SceneSpec spec;
    spec.rig = rig;
    spec.noise = 0.0;
    TexturedPlane plane;
    plane.origin = Vec3d(0, 0, rig.disparity_to_depth(3.0));
    plane.texture_seed = 7;
    plane.texture_scale = 1.5;
    spec.planes.push_back(plane);
    spec.camera.push_back(Pose::identity());
    const FrameTruth f = render(spec)[0];
    for (int y = 0; y < rig.height; ++y)
        for (int x = 3; x < rig.width; ++x)
            CHECK(f.left(x, y) == doctest::Approx(f.right(x - 3, y)).epsilon(1e-6));

    // On the multi-plane scene the identity holds up to bilinear sampling of
    // the smooth texture, away from depth discontinuities.
    SceneSpec multi = scenes::static_scene(rig, 1);
    multi.noise = 0.0;
    const FrameTruth g = render(multi)[0];
    int checked = 0;
    for (int y = 4; y < rig.height - 4; y += 3)
        for (int x = 30; x < rig.width - 4; x += 3) {
            const double d = g.gt_disparity(x, y);
            if (x - d < 2) continue;
            bool edge = false;
            for (int k = -2; k <= 2; ++k)
                if (std::abs(g.gt_disparity.at_clamped(x + k, y) - d) > 0.5) edge = true;
            if (edge) continue;
            CHECK(std::abs(g.left(x, y) - sample_bilinear(g.right, x - d, y)) < 0.08f);
            ++checked;
        }
    CHECK(checked > 300);
}

TEST_CASE("ground-truth pose and flow are mutually consistent") {
    const StereoRig rig = scenes::small_rig();
    SceneSpec spec = scenes::static_scene(rig, 3, Vec3d(0.05, 0.0, 0.3), 0.004);
    const std::vector<FrameTruth> frames = render(spec);
    // gt_pose composes the camera trajectory.
    for (int t = 0; t + 1 < 3; ++t) {
        const Pose expected = compose(spec.camera[t + 1], invert(spec.camera[t]));
        CHECK(frames[t].gt_pose.r.isApprox(expected.r, 1e-12));
        CHECK((frames[t].gt_pose.t - expected.t).norm() < 1e-12);
    }
    // On a static scene the ground-truth flow is exactly the rigid flow of the
    // ground-truth disparity under the ground-truth pose.
    const FrameTruth& f = frames[0];
    const VectorMap rig_flow = rigid_flow(f.gt_disparity, rig, f.gt_pose);
    for (int y = 0; y < rig.height; y += 5)
        for (int x = 0; x < rig.width; x += 5) {
            CHECK((f.gt_flow(x, y) - rig_flow(x, y)).norm() < 1e-4f);
            // gt_disparity2 matches the warp-reported target disparity.
            double td = 0;
            rigid_warp(Vec2d(x, y), f.gt_disparity(x, y), rig, f.gt_pose, &td);
            CHECK(f.gt_disparity2(x, y) == doctest::Approx(td).epsilon(1e-5));
        }
}

TEST_CASE("movers are masked and deviate from the rigid flow") {
    const StereoRig rig = scenes::small_rig();
    SceneSpec spec = scenes::static_scene(rig, 2);
    scenes::add_mover(&spec, 10.0, 1.2, Vec3d(1.0, 0.0, 0.0), Vec3d(-0.4, 0.0, 0.0));
    const std::vector<FrameTruth> frames = render(spec);
    const FrameTruth& f = frames[0];
    int fg = 0;
    const VectorMap rig_flow = rigid_flow(f.gt_disparity, rig, f.gt_pose);  // identity pose
    for (int y = 0; y < rig.height; ++y)
        for (int x = 0; x < rig.width; ++x)
            if (f.gt_mask(x, y)) {
                ++fg;
                // Static camera: rigid flow is zero, the mover moves left.
                CHECK(rig_flow(x, y).norm() == 0.0f);
                CHECK(f.gt_flow(x, y).x() < -1.0f);
            }
    CHECK(fg > 200);
    // The mover sits at depth 10 => disparity f*B/10 inside the mask. Pixel
    // (100, 40) sees the mover unobstructed by the static foreground planes.
    const float d_mover = static_cast<float>(rig.depth_to_disparity(10.0));
    CHECK(f.gt_mask(100, 40) == 1);
    CHECK(f.gt_disparity(100, 40) == doctest::Approx(d_mover).epsilon(1e-6));
}

TEST_CASE("render rejects malformed scenes") {
    SceneSpec empty;
    empty.rig = scenes::small_rig();
    CHECK_THROWS_AS(render(empty), std::invalid_argument);  // no cameras

    SceneSpec uncovered;
    uncovered.rig = scenes::small_rig();
    TexturedPlane small;
    small.origin = Vec3d(0, 0, 10);
    small.half_u = 0.5;
    small.half_v = 0.5;
    uncovered.planes.push_back(small);
    uncovered.camera.push_back(Pose::identity());
    CHECK_THROWS_AS(render(uncovered), std::invalid_argument);  // uncovered pixels

    SceneSpec mismatched = scenes::static_scene(scenes::small_rig(), 3);
    Mover m;
    m.shape.half_u = 1;
    m.shape.half_v = 1;
    m.body_to_world.push_back(Pose::translation(Vec3d(0, 0, 8)));  // 1 pose, 3 frames
    mismatched.movers.push_back(m);
    CHECK_THROWS_AS(render(mismatched), std::invalid_argument);
}

TEST_CASE("scene specs load from json") {
    const char* path = "scene_spec_test.json";
    {
        std::ofstream out(path);
        out << R"({
            "rig": {"f": 120, "cx": 80, "cy": 48, "baseline": 0.5, "width": 160, "height": 96},
            "noise": 0.0,
            "planes": [
                {"origin": [0, 0, 30], "axis_u": [1, 0, 0], "axis_v": [0, 1, 0], "seed": 11,
                 "texture_scale": 2.0}
            ],
            "movers": [
                {"plane": {"origin": [0, 0, 0], "axis_u": [1, 0, 0], "axis_v": [0, 1, 0],
                           "half_u": 1.0, "half_v": 1.0, "seed": 44},
                 "poses": [{"t": [0, 0, 10]}, {"t": [0.2, 0, 10]}]}
            ],
            "camera": [{"t": [0, 0, 0]}, {"r_axis_angle": [0, 0.01, 0], "t": [0, 0, 0.2]}]
        })";
    }
    const SceneSpec spec = load_scene_spec(path);
    std::remove(path);
    CHECK(spec.rig.intrinsics.f == 120.0);
    CHECK(spec.rig.baseline == 0.5);
    CHECK(spec.planes.size() == 1);
    CHECK(spec.movers.size() == 1);
    CHECK(spec.movers[0].body_to_world.size() == 2);
    CHECK(spec.camera.size() == 2);
    CHECK(spec.camera[1].t.z() == 0.2);
    CHECK(spec.noise == 0.0);
    const std::vector<FrameTruth> frames = render(spec);
    CHECK(frames.size() == 2);
}
