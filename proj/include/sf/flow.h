#pragma once

#include <vector>

#include "sf/odometry.h"
#include "sf/sgm.h"

namespace sf {

struct FlowParams {
    int histogram_bin = 2;       // 2D flow-histogram bin width [px]
    int range_pad = 2;           // padding of the united search range [px]
    int max_range_side = 241;    // per-axis label cap (area budget 241x241)
    int fallback_range = 16;     // used when every range source is empty
    float tau = 0.25f;           // TNCC cap for temporal matching
    float bidir_tol = 1.0f;      // bi-directional consistency tolerance [px]
    int median_radius = 15;      // geodesic weighted median window 31x31
    float kappa_geo = 2.0f;
    SgmParams sgm;
};

/// 8-connected components of the foreground; label 0 = background,
/// components numbered from 1. Returns the number of components.
int connected_components(const MaskMap& mask, Image<int32_t>* labels);

/// Search range covering sparse feature displacements, prior flow, and rigid
/// flow over one component: per-source boxes (flow fields via pruned 2D
/// histograms) united and padded.
FlowRange estimate_range(const MaskMap& component, const std::vector<FeatureMatch>& features,
                         const VectorMap& prior, const MaskMap& prior_valid,
                         const VectorMap& rigid, const FlowParams& params);

/// Geodesic weights exp(-d/kappa) around `center` over a (2r+1)^2 window;
/// distances from a two-pass chamfer pass over the disparity map with the
/// adjacent-pixel metric |dD| + ||dp||/100.
ScalarMap geodesic_kernel(const ScalarMap& disparity, int cx, int cy, int radius, float kappa);

struct FlowResult {
    VectorMap flow;   // F_non on the mask, F_rig elsewhere
    MaskMap valid;    // 1 where the bi-directional check passed (mask pixels)
};

/// Masked non-rigid flow: per component, 2D-label SGM forward and backward
/// with the bi-directional check, rigid background filling, geodesic weighted
/// median over holes and a final 5x5 plain median over the foreground.
FlowResult nonrigid_flow(const GrayImage& cur, const GrayImage& next, const MaskMap& mask,
                         const VectorMap& rigid, const ScalarMap& disparity,
                         const std::vector<FeatureMatch>& features, const VectorMap& prior,
                         const MaskMap& prior_valid, const FlowParams& params,
                         const SgmEdgeWeights& weights = {});

}  // namespace sf
