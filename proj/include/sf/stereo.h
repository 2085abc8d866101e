#pragma once

#include "sf/geometry.h"
#include "sf/sgm.h"

namespace sf {

struct StereoParams {
    int max_disparity = 128;        // configured global maximum
    float tau = 1.0f;               // TNCC cap, binocular stage
    float tau_epi = 0.25f;          // TNCC cap for temporal matches and occluded pixels
    float lr_tolerance = 1.0f;      // left-right consistency threshold [px]
    float tau_uncertainty = 2.0f;   // tau_u in this implementation's cost units
    float tau_confidence = 0.1f;    // tau_c
    SgmParams sgm;
};

struct StereoOutput {
    ScalarMap disparity;      // subpixel refined
    Image<int16_t> labels;    // integer SGM labels
    MaskMap occlusion;        // 1 = occluded (failed left-right check)
    ScalarMap uncertainty;
    int d_max = 0;            // active label range [0, d_max]
    CostVolume cost;          // binocular cost volume (input to epipolar refinement)
};

/// SGM stereo on a rectified pair with left-right occlusion check and
/// uncertainty from the scan-line minimizer disagreement.
StereoOutput binocular(const GrayImage& left, const GrayImage& right, const StereoParams& params,
                       const SgmEdgeWeights& weights = {});

/// 1 where |D_left(p) - D_right(p - D_left(p))| > tol or the match leaves the image.
MaskMap lr_consistency(const ScalarMap& d_left, const ScalarMap& d_right, float tol);

/// Largest disparity whose histogram bin holds >= 0.5% of the non-occluded
/// pixels (inclusive); never exceeds global_max.
int reduce_range(const ScalarMap& disparity, const MaskMap& occlusion, int global_max);

/// Temporal neighbors of the current stereo pair. Null images are skipped
/// (first frame has no previous pair).
struct TemporalFrames {
    const GrayImage* prev_left = nullptr;
    const GrayImage* prev_right = nullptr;
    const GrayImage* next_left = nullptr;
    const GrayImage* next_right = nullptr;
    Pose pose_prev;  // camera motion t-1 -> t
    Pose pose_cur;   // camera motion t -> t+1
};

/// Blends the binocular cost volume with averaged temporal matching costs at
/// uncertain pixels and re-runs SGM over the reduced disparity range.
StereoOutput epipolar_refine(const GrayImage& left, const GrayImage& right,
                             const StereoOutput& bino, const TemporalFrames& frames,
                             const StereoRig& rig, const StereoParams& params,
                             const SgmEdgeWeights& weights = {});

}  // namespace sf
