#pragma once

#include <Eigen/Dense>

#include "sf/image.h"

namespace sf {

/// Pinhole intrinsics of a rectified camera (square pixels, shared focal length).
struct Intrinsics {
    double f = 1.0;   // focal length [px]
    double cx = 0.0;  // principal point [px]
    double cy = 0.0;

    Vec3d backproject(double u, double v) const { return {(u - cx) / f, (v - cy) / f, 1.0}; }
    Vec2d project(const Vec3d& x) const { return {f * x.x() / x.z() + cx, f * x.y() / x.z() + cy}; }
};

/// Rigid camera motion [R|t]: maps source-camera points x to target-camera
/// points R*x + t.
struct Pose {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    Vec3d t = Vec3d::Zero();

    static Pose identity() { return {}; }
    static Pose translation(const Vec3d& t) { return {Eigen::Matrix3d::Identity(), t}; }

    Vec3d apply(const Vec3d& x) const { return r * x + t; }
};

Pose compose(const Pose& a, const Pose& b);  // a after b: x -> a(b(x))
Pose invert(const Pose& a);

/// exp of a twist (v, w): translation v, rotation w (axis-angle).
Pose pose_exp(const Eigen::Matrix<double, 6, 1>& xi);

/// Rectified stereo rig: left camera is the reference.
struct StereoRig {
    Intrinsics intrinsics;
    double baseline = 1.0;  // scene units, > 0
    int width = 0, height = 0;

    /// Left-to-right camera pose [I | -B e_x].
    Pose left_to_right() const { return Pose::translation({-baseline, 0.0, 0.0}); }

    double disparity_to_depth(double d) const { return intrinsics.f * baseline / d; }
    double depth_to_disparity(double z) const { return intrinsics.f * baseline / z; }
};

/// Warps pixel p with disparity d into the target frame of `pose`.
/// d == 0 degenerates to the purely rotational warp (point at infinity).
Vec2d rigid_warp(const Vec2d& p, double d, const StereoRig& rig, const Pose& pose);

/// Same, also reporting the disparity of the warped point in the target frame.
Vec2d rigid_warp(const Vec2d& p, double d, const StereoRig& rig, const Pose& pose,
                 double* target_disparity);

/// Z-buffered visibility of each source pixel in the target frame. A pixel is
/// invisible if its warp leaves the image or another source pixel lands on the
/// same rounded target pixel with target disparity larger by more than
/// `z_tolerance`.
MaskMap visibility_map(const ScalarMap& disparity, const StereoRig& rig, const Pose& pose,
                       double z_tolerance = 1.0);

/// Per-pixel 2D flow induced by camera motion over a static scene:
/// F(p) = warp(p) - p.
VectorMap rigid_flow(const ScalarMap& disparity, const StereoRig& rig, const Pose& pose);

}  // namespace sf
