#pragma once

#include <utility>

#include "sf/matching.h"

namespace sf {

/// Penalty configuration for semi-global matching. Costs are processed in
/// 16-bit fixed point scaled by kSgmCostScale (saturating adds); penalties are
/// quantized the same way.
struct SgmParams {
    float lambda = 200.0f / 255.0f;  // smoothness scale
    float beta = 2.0f;               // P2 = P1 * (beta + gamma * w_col)
    float gamma = 2.0f;
    int directions = 8;  // 8 (full) or 2 (single horizontal pair, chain-exact)
};

constexpr int kSgmCostScale = 1024;

/// (P1, P2) for a scan direction. P1 = lambda / |p - q|, P2 = P1 (beta + gamma w).
std::pair<float, float> sgm_penalties(bool diagonal, float color_edge_weight, const SgmParams& p);

/// Color edge weights between p and p+offset for the four canonical offsets
/// E=(1,0), S=(0,1), SE=(1,1), SW=(-1,1). Empty maps mean weight 0.
struct SgmEdgeWeights {
    ScalarMap e, s, se, sw;
    bool empty() const { return e.empty(); }
};

/// Edge weights w_pq = exp(-||I_p - I_q||^2 / kappa1), kappa1 estimated as the
/// mean of 2 ||I_p - I_q||^2 over all 8-neighbor pairs.
SgmEdgeWeights color_edge_weights(const ColorImage& img);

struct Sgm1dResult {
    Image<int16_t> labels;   // per-pixel argmin (lowest index on ties)
    ScalarMap refined;       // labels with quadratic subpixel offset
    ScalarMap uncertainty;   // scan-line minimizer disagreement, >= 0, in cost units
};

/// 1D-label SGM. Aggregates normalized scan-line costs over the configured
/// directions; the retrieved labeling removes the data-term overcounting
/// (argmin of S - (n_dirs - 1) C), which makes the single-direction-pair case
/// exact on chain graphs.
Sgm1dResult sgm_1d(const CostVolume& vol, const SgmParams& params, const SgmEdgeWeights& weights);

struct Sgm2dResult {
    Image<Eigen::Vector2i> labels;  // absolute integer shifts (du, dv)
    VectorMap refined;
    ScalarMap uncertainty;
};

/// 2D-label SGM with P1 for the 8 label-grid neighbors and P2 otherwise.
Sgm2dResult sgm_2d(const CostVolume& vol, const FlowRange& range, const SgmParams& params,
                   const SgmEdgeWeights& weights);

/// Quadratic fit through (d-1, d, d+1) aggregated costs; returns the offset in
/// [-0.5, 0.5] (0 for zero curvature).
double subpixel_offset(double s_minus, double s_center, double s_plus);

}  // namespace sf
