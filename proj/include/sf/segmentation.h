#pragma once

#include <vector>

#include "sf/geometry.h"
#include "sf/image.h"
#include "sf/maxflow.h"

namespace sf {

struct SegParams {
    float lambda_ncc = 4.0f;
    float tau_ncc = 0.5f;
    float tau_w = 0.005f;  // patch-stddev cap for w_var
    float lambda_flo = 4.0f;
    float tau_flo = 0.75f;
    float gamma_flo = 0.3f;
    float lambda_col = 0.5f;
    float lambda_potts = 10.0f;
    float kappa3 = 0.2f;
    float lambda_mask = 2.0f;
    float lambda_gro = 10.0f;
    int grabcut_iterations = 5;
    int superpixel_count = 850;
    bool ground_prior = false;
};

/// Foreground/background color likelihoods: 64x64x64 RGB histograms with
/// Laplace smoothing (+1 per bin), stored as log-probabilities.
class ColorModel {
public:
    static constexpr int kBins = 64;

    ColorModel();

    /// Accumulates pixels of `img` where mask matches `fg_value` into the
    /// foreground histogram and the rest into the background one.
    static ColorModel fit(const ColorImage& img, const MaskMap& mask);

    /// Running average of per-frame models (histogram-space mean).
    void accumulate(const ColorModel& frame_model);

    double log_ratio(const Vec3f& rgb) const;  // log th1 - log th0
    bool empty() const { return frames_ == 0; }

    static int bin_index(const Vec3f& rgb);

private:
    std::vector<double> hist_fg_, hist_bg_;  // normalized, all bins > 0
    int frames_ = 0;

    friend ColorModel average_models(const std::vector<ColorModel>&);
};

/// One aligned temporal target for the appearance term.
struct AppearanceTarget {
    const GrayImage* image = nullptr;
    Pose pose;  // reference frame -> target frame
};

/// C^ncc: lambda_ncc * w_var * average over valid targets of (TNCC - tau_ncc),
/// truncated at 0 for targets where the pixel is predicted occluded.
ScalarMap appearance_term(const GrayImage& cur, const std::vector<AppearanceTarget>& targets,
                          const ScalarMap& disparity, const ScalarMap& w_var,
                          const StereoRig& rig, const SegParams& params);

/// C^flo from the residual between rigid and prior flow; 0 where the prior
/// flow is invalid.
ScalarMap flow_term(const VectorMap& rigid, const VectorMap& prior, const MaskMap& prior_valid,
                    const ScalarMap& w_var, const SegParams& params);

/// C^col = lambda_col * (log th1 - log th0).
ScalarMap color_term(const ColorImage& img, const ColorModel& model, float lambda_col);

struct SegPriors {
    ScalarMap mask;     // C^mask in [-0.1, 1]; empty on the first frame
    ScalarMap ground;   // C^gro <= 0; empty unless road profile
    const ColorModel* prior_model = nullptr;  // averaged past models
};

/// C^pri = lambda_mask * C^mask + C^pcol + C^gro; absent pieces contribute 0.
ScalarMap prior_term(const ColorImage& img, const SegPriors& priors, const SegParams& params);

/// Warps the previous mask forward by the previous flow (nearest-neighbor
/// scatter), dilates by 2 px; foreground 1, elsewhere -0.1.
ScalarMap make_mask_prior(const MaskMap& prev_mask, const VectorMap& prev_flow);

/// RANSAC disparity-plane ground prior (<= 0 everywhere). Returns a zero map
/// when no admissible plane has >= 20% support.
ScalarMap ground_prior(const ScalarMap& disparity, int d_max, const SegParams& params);

/// Per-pixel canonical edges (east, south, south-east, south-west) holding the
/// total Potts weight lambda_potts * (w_col + w_dep + w_str).
struct PottsWeights {
    ScalarMap e, s, se, sw;
    double kappa1 = 0, kappa2 = 0;
};

/// Sobel gradient magnitude normalized to [0,1] by its 99th percentile.
ScalarMap sobel_edge_map(const GrayImage& img);

PottsWeights potts_weights(const ColorImage& img, const ScalarMap& disparity,
                           const ScalarMap& edge_map, const SegParams& params);

/// SLIC-style superpixels in color+position space.
Image<int32_t> slic_superpixels(const ColorImage& img, int target_segments, int iterations = 10);

/// Replaces each pixel by the mean of its superpixel.
ScalarMap smooth_costs(const ScalarMap& cost, const Image<int32_t>& segments);

/// Coarse dense flow by pyramidal block matching with a 1 px bi-directional
/// validity check. Stand-in for an external prior-flow field.
void prior_flow(const GrayImage& cur, const GrayImage& next, VectorMap* flow, MaskMap* valid);

struct SegmentResult {
    MaskMap mask;                 // 1 = moving foreground
    ColorModel model;             // final online color model
    std::vector<double> energies; // E_seg after each accepted iteration
};

/// GrabCut-style alternation between the graph cut and color-model
/// re-estimation; `static_unary` is C^ncc + C^flo + C^pri (already smoothed),
/// charged to the background label.
SegmentResult segment(const ColorImage& img, const ScalarMap& static_unary,
                      const PottsWeights& potts, const SegParams& params,
                      const MaskMap* seed = nullptr);

/// E_seg of a labeling: sum of background-charged unaries plus Potts.
double segmentation_energy(const MaskMap& labels, const ScalarMap& unary,
                           const PottsWeights& potts);

/// Builds the binary MRF shared by segmentation and fusion. `unary` is charged
/// to label 0 (background); `constraints` may be empty.
BinaryMrf build_seg_mrf(const ScalarMap& unary, const PottsWeights& potts,
                        const std::vector<BinaryMrf::Constraint>& constraints = {});

}  // namespace sf
