#pragma once

#include <string>

#include "sf/flow.h"
#include "sf/fusion.h"
#include "sf/metrics.h"
#include "sf/odometry.h"
#include "sf/segmentation.h"
#include "sf/stereo.h"

namespace sf {

/// Named parameter set. `general` holds the published defaults; `road` enables
/// the ground prior and forward-translation pose candidates; `sintel` retunes
/// (lambda_col, tau_ncc) to (1.5, 0.25).
struct Profile {
    std::string name = "general";
    StereoParams stereo;
    SegParams seg;
    FlowParams flow;
    VoParams vo;
    double working_scale = 0.65;  // stereo / odometry / segmentation / fusion
    double flow_scale = 0.4;      // optical flow
    bool forward_candidates = false;
    int num_forward_candidates = 16;

    static Profile general();
    static Profile road();
    static Profile sintel();
    static Profile by_name(const std::string& name);  // throws on unknown name
};

/// Cross-frame state carried at working scale.
struct FrameState {
    int frame_index = 0;
    Pose prev_pose;           // camera motion t-1 -> t
    bool has_prev = false;    // previous frame processed
    MaskMap prev_mask;        // S_{t-1}
    VectorMap prev_flow;      // F_{t-1}
    GrayImage prev_left, prev_right;
    ColorModel prior_model;   // running average of past per-frame models
};

struct FrameOutput {
    ScalarMap disparity;  // input resolution
    VectorMap flow;
    MaskMap mask;
    Pose pose;            // camera motion t -> t+1
    bool rigid_fallback = false;
    std::string diagnostic;
    // Fusion-move energies (equal when no foreground candidate survived).
    double fusion_energy = 0.0;
    double fusion_energy_rigid = 0.0;
    double fusion_energy_nonrigid = 0.0;
};

/// One frame of the sequential pipeline: binocular stereo, ego-motion,
/// epipolar refinement, motion segmentation, non-rigid flow, fusion. `state`
/// is updated in place. An optional externally supplied prior flow (input
/// resolution) replaces the built-in block matcher.
FrameOutput process_frame(const ColorImage& left, const ColorImage& right,
                          const ColorImage& next_left, const ColorImage& next_right,
                          const StereoRig& rig, const Profile& profile, FrameState* state,
                          const VectorMap* external_prior_flow = nullptr,
                          const MaskMap* external_prior_valid = nullptr);

/// Rescales a rig's intrinsics and grid to a resized image.
StereoRig scale_rig(const StereoRig& rig, int new_width, int new_height);

}  // namespace sf
