#pragma once

#include <vector>

#include "sf/geometry.h"
#include "sf/image.h"

namespace sf {

struct VoParams {
    int pyramid_levels = 3;
    int max_iterations = 50;
    double step_tolerance = 1e-6;
    int max_step_halvings = 8;
    float min_disparity = 1e-3f;  // pixels with smaller disparity are skipped
};

/// Tukey bi-weight loss with tuning constant k = 4.685 * sigma. Saturates at
/// k^2/6 for |r| >= k; 0 at r = 0.
double tukey_rho(double r, double sigma);

/// Tukey weight psi(r)/r in [0,1].
double tukey_weight(double r, double sigma);

struct AlignResult {
    Pose pose;
    bool ok = false;       // false: rank-deficient normal equations (textureless)
    double energy = 0.0;   // robust residual energy at the solution
};

/// Direct 6-DOF alignment of `cur` to `next` by inverse-compositional IRLS
/// over a 3-level pyramid. base_weights: 0 at occluded pixels, 1 elsewhere,
/// 1/8 at predicted moving-object pixels.
AlignResult irls_align(const GrayImage& cur, const GrayImage& next, const ScalarMap& disparity,
                       const ScalarMap& base_weights, const StereoRig& rig, const Pose& init,
                       const VoParams& params = {});

enum class PoseSource { kIdentity = 0, kPrevious = 1, kFeature = 2, kForwardTranslation = 3 };

struct PoseHypothesis {
    Pose pose;
    PoseSource source = PoseSource::kIdentity;
    double score = 0.0;  // weighted TNCC residual after refinement
};

/// Refines every hypothesis with irls_align and returns the one minimizing the
/// weighted TNCC residual; ties break by provenance order.
Pose select_pose(std::vector<PoseHypothesis> hypotheses, const GrayImage& cur,
                 const GrayImage& next, const ScalarMap& disparity,
                 const ScalarMap& base_weights, const StereoRig& rig,
                 const VoParams& params = {});

/// Weighted TNCC residual of a pose over the whole image.
double pose_residual(const Pose& pose, const GrayImage& cur, const GrayImage& next,
                     const ScalarMap& disparity, const ScalarMap& base_weights,
                     const StereoRig& rig);

struct FeatureMatch {
    Vec2f p, q;  // corner in cur, match in next
};

struct FeatureInitResult {
    Pose pose;
    bool ok = false;
    std::vector<FeatureMatch> matches;  // all accepted matches (also used for flow ranges)
};

/// Sparse corner matching + P3P RANSAC (2 px reprojection threshold, 200
/// iterations) with least-squares polish on the inliers.
FeatureInitResult feature_init(const GrayImage& cur, const GrayImage& next,
                               const ScalarMap& disparity, const StereoRig& rig,
                               const MaskMap* occlusion = nullptr);

/// n pure forward z-translations, geometrically spaced magnitudes anchored to
/// the median scene depth.
std::vector<Pose> forward_translation_candidates(int n, double median_depth);

/// Median depth of pixels with disparity above min_disparity.
double median_depth(const ScalarMap& disparity, const StereoRig& rig, float min_disparity = 1e-3f);

}  // namespace sf
