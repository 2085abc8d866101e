#pragma once

#include "sf/geometry.h"
#include "sf/image.h"

namespace sf {

/// A disparity or flow estimate is correct when its end-point error is below
/// 3 px or below 5% of the ground-truth magnitude.
bool is_outlier(double epe, double gt_magnitude);

struct RateSplit {
    double bg = 0, fg = 0, all = 0;  // outlier percentages in [0, 100]
};

struct SceneFlowMetrics {
    RateSplit d1, d2, fl, sf;
    double epe_disparity = 0;  // mean absolute disparity error (valid GT pixels)
    double epe_flow = 0;       // mean flow end-point error
    size_t evaluated = 0;      // pixels with any valid ground truth
};

struct EvalMaps {
    // Estimates.
    ScalarMap est_d1;
    ScalarMap est_d2;      // optional; derive_d2 fills it when empty
    VectorMap est_flow;
    // Ground truth; zero disparity / validity 0 marks missing pixels.
    ScalarMap gt_d1;
    ScalarMap gt_d2;
    VectorMap gt_flow;
    MaskMap gt_flow_valid;  // empty = all valid
    MaskMap gt_mask;        // foreground split; empty = all background
};

/// Estimated next-frame disparity: pose-transformed depth for pixels labeled
/// rigid; the ground-truth association for labeled movers (evaluator-only
/// convention for synthetic data).
ScalarMap derive_d2(const ScalarMap& est_d1, const MaskMap& est_mask, const Pose& est_pose,
                    const StereoRig& rig, const ScalarMap& gt_d2);

/// D1/D2/Fl/SF outlier rates under the 3 px / 5% rule; scene flow is correct
/// only where D1, D2 and Fl all are. Throws on grid-size mismatch.
SceneFlowMetrics evaluate(const EvalMaps& maps);

}  // namespace sf
