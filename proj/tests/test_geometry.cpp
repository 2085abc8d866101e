#include <doctest.h>

#include <random>

#include "sf/geometry.h"
#include "sf/synthetic.h"
#include "scenes.h"

using namespace sf;

TEST_CASE("pose compose and invert are consistent") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i) {
        Eigen::Matrix<double, 6, 1> xa, xb;
        for (int k = 0; k < 6; ++k) {
            xa(k) = u(rng);
            xb(k) = u(rng);
        }
        const Pose a = pose_exp(xa), b = pose_exp(xb);
        const Vec3d x(u(rng), u(rng), u(rng) + 3);
        CHECK((compose(a, b).apply(x) - a.apply(b.apply(x))).norm() < 1e-12);
        CHECK((compose(a, invert(a)).apply(x) - x).norm() < 1e-12);
    }
}

TEST_CASE("pose_exp matches the axis-angle rotation and exp identities") {
    Eigen::Matrix<double, 6, 1> xi = Eigen::Matrix<double, 6, 1>::Zero();
    CHECK(pose_exp(xi).r.isApprox(Eigen::Matrix3d::Identity()));
    CHECK(pose_exp(xi).t.norm() == 0.0);

    xi << 0, 0, 0, 0.2, -0.1, 0.3;
    const Vec3d w = xi.tail<3>();
    const Eigen::Matrix3d expected =
        Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
    CHECK(pose_exp(xi).r.isApprox(expected, 1e-12));

    // Pure translation is exact.
    xi << 1.5, -0.25, 2.0, 0, 0, 0;
    CHECK((pose_exp(xi).t - Vec3d(1.5, -0.25, 2.0)).norm() < 1e-15);

    // exp(xi) exp(-xi) = identity.
    xi << 0.4, 0.1, -0.3, 0.2, -0.1, 0.15;
    const Pose p = compose(pose_exp(xi), pose_exp(-xi));
    CHECK(p.r.isApprox(Eigen::Matrix3d::Identity(), 1e-12));
    CHECK(p.t.norm() < 1e-12);

    // Same-axis twists commute and add.
    Eigen::Matrix<double, 6, 1> half = xi / 2;
    const Pose q = compose(pose_exp(half), pose_exp(half));
    const Pose full = pose_exp(xi);
    CHECK(q.r.isApprox(full.r, 1e-12));
    CHECK((q.t - full.t).norm() < 1e-12);
}

TEST_CASE("epipolar identity and identity-pose fixpoint over random samples") {
    const StereoRig rig = scenes::small_rig(640, 480, 700.0, 0.54);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ux(0, 639), uy(0, 479), ud(0, 100);
    for (int i = 0; i < 10000; ++i) {
        const Vec2d p(ux(rng), uy(rng));
        const double d = ud(rng);
        // Warping into the right camera is exactly the disparity shift.
        const Vec2d q = rigid_warp(p, d, rig, rig.left_to_right());
        CHECK(std::abs(q.x() - (p.x() - d)) < 1e-9);
        CHECK(std::abs(q.y() - p.y()) < 1e-9);
        // Identity pose leaves every pixel fixed.
        double td = -1;
        const Vec2d r = rigid_warp(p, d, rig, Pose::identity(), &td);
        CHECK((r - p).norm() < 1e-9);
        CHECK(std::abs(td - d) < 1e-9);
    }
}

TEST_CASE("zero disparity degenerates to the rotational warp") {
    const StereoRig rig = scenes::small_rig();
    Pose pose = scenes::yaw_pose(0.05, Vec3d(3, 2, 1));  // translation must not matter
    Pose rot_only{pose.r, Vec3d::Zero()};
    const Vec2d p(40.5, 20.25);
    CHECK((rigid_warp(p, 0.0, rig, pose) - rigid_warp(p, 0.0, rig, rot_only)).norm() < 1e-12);
}

TEST_CASE("round-trip warp through a rigid pose") {
    const StereoRig rig = scenes::small_rig();
    Eigen::Matrix<double, 6, 1> xi;
    xi << 0.05, -0.02, 0.1, 0.01, 0.03, -0.02;
    const Pose pose = pose_exp(xi);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(0, 159), uy(0, 95), ud(1, 40);
    for (int i = 0; i < 1000; ++i) {
        const Vec2d p(ux(rng), uy(rng));
        const double d = ud(rng);
        double td = 0;
        const Vec2d q = rigid_warp(p, d, rig, pose, &td);
        if (!std::isfinite(td) || td <= 0) continue;
        const Vec2d back = rigid_warp(q, td, rig, invert(pose));
        CHECK((back - p).norm() < 1e-6);
    }
}

TEST_CASE("forward translation over a fronto-parallel plane expands radially") {
    const StereoRig rig = scenes::small_rig();
    const double depth = 10.0, dz = 0.5;
    const ScalarMap disp(rig.width, rig.height,
                         static_cast<float>(rig.depth_to_disparity(depth)));
    // Camera advances by dz: world points move by -dz in camera z.
    const VectorMap flow = rigid_flow(disp, rig, Pose::translation({0, 0, -dz}));
    for (int y = 0; y < rig.height; y += 7)
        for (int x = 0; x < rig.width; x += 7) {
            // Per-pixel oracle: u' = f*X/(z-dz) + cx with X = (x-cx) z / f.
            const double xc = (x - rig.intrinsics.cx) * depth / rig.intrinsics.f;
            const double yc = (y - rig.intrinsics.cy) * depth / rig.intrinsics.f;
            const double ex = rig.intrinsics.f * xc / (depth - dz) + rig.intrinsics.cx - x;
            const double ey = rig.intrinsics.f * yc / (depth - dz) + rig.intrinsics.cy - y;
            CHECK(std::abs(flow(x, y).x() - ex) < 1e-4);
            CHECK(std::abs(flow(x, y).y() - ey) < 1e-4);
            // Radial: flow points away from the principal point.
            const Vec2d r(x - rig.intrinsics.cx, y - rig.intrinsics.cy);
            if (r.norm() > 5) CHECK(r.dot(flow(x, y).cast<double>()) > 0);
        }
}

TEST_CASE("visibility map flags pixels occluded in the target view") {
    const StereoRig rig = scenes::small_rig();
    // Near strip in front of a far background; moving right camera occludes
    // background pixels to the left of the strip.
    ScalarMap disp(rig.width, rig.height, 4.0f);
    for (int y = 0; y < rig.height; ++y)
        for (int x = 60; x < 100; ++x) disp(x, y) = 20.0f;
    const MaskMap vis = visibility_map(disp, rig, rig.left_to_right());
    CHECK(vis(80, 48));   // near surface always visible
    CHECK(vis(130, 48));  // background far from the strip visible
    // Background just left of the strip maps behind it in the target.
    int occluded = 0;
    for (int x = 40; x < 60; ++x) occluded += vis(x, 48) ? 0 : 1;
    CHECK(occluded > 5);
    // Pixels warping out of the image are invisible.
    CHECK_FALSE(vis(0, 48));  // x - d = -4
}
