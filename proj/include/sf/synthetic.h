#pragma once

#include <string>
#include <vector>

#include "sf/geometry.h"

namespace sf {

/// Finite or unbounded textured plane. The texture is a deterministic smooth
/// value-noise function of the plane coordinates, so any camera samples the
/// same surface signal analytically (no resampling error between views).
struct TexturedPlane {
    Vec3d origin = Vec3d::Zero();
    Vec3d axis_u = Vec3d::UnitX();  // plane coordinate axes (unit, orthogonal)
    Vec3d axis_v = Vec3d::UnitY();
    double half_u = -1.0;  // extent half-sizes; <= 0 means unbounded
    double half_v = -1.0;
    uint32_t texture_seed = 1;
    double texture_scale = 1.0;  // lattice spacing of the coarsest noise octave
    double texture_gain = 1.0;   // intensity = clamp(gain * texture + bias)
    double texture_bias = 0.0;

    Vec3d normal() const { return axis_u.cross(axis_v).normalized(); }
};

/// Rigid body with a per-frame body-to-world pose.
struct Mover {
    TexturedPlane shape;                // in body coordinates
    std::vector<Pose> body_to_world;    // one per frame
};

struct SceneSpec {
    StereoRig rig;
    std::vector<TexturedPlane> planes;   // static, world coordinates
    std::vector<Mover> movers;
    std::vector<Pose> camera;            // world-to-left-camera, one per frame
    double noise = 0.01;                 // additive uniform amplitude
    uint32_t noise_seed = 1234;
};

/// Per-frame rendered data with closed-form ground truth.
struct FrameTruth {
    GrayImage left, right;
    ScalarMap gt_disparity;    // left view, frame t
    ScalarMap gt_disparity2;   // disparity at t+1 of the surface point seen at p
    VectorMap gt_flow;         // image motion of the surface point p, t -> t+1
    MaskMap gt_mask;           // 1 where a mover is visible
    Pose gt_pose;              // camera motion t -> t+1 (identity on last frame)
};

/// Analytic ray-plane rendering of the whole sequence. Throws
/// std::invalid_argument when a surface lies behind the camera or a pixel is
/// not covered by any surface.
std::vector<FrameTruth> render(const SceneSpec& spec);

/// Deterministic smooth texture in [0,1] (exposed for tests).
double plane_texture(uint32_t seed, double u, double v, double scale);

SceneSpec load_scene_spec(const std::string& json_path);

}  // namespace sf
