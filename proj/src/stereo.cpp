#include "sf/stereo.h"

#include <cmath>

#include "sf/parallel.h"

namespace sf {

namespace {

GrayImage flip_horizontal(const GrayImage& img) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out(x, y) = img(img.width() - 1 - x, y);
    return out;
}

SgmEdgeWeights flip_weights(const SgmEdgeWeights& w, int width, int height) {
    if (w.empty()) return {};
    SgmEdgeWeights out{ScalarMap(width, height, 0.0f), ScalarMap(width, height, 0.0f),
                       ScalarMap(width, height, 0.0f), ScalarMap(width, height, 0.0f)};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            // e(x,y) joins (x,y)-(x+1,y): mirrored edge joins (w-2-x, y)-(w-1-x, y).
            if (x + 1 < width) out.e(x, y) = w.e(width - 2 - x, y);
            out.s(x, y) = w.s(width - 1 - x, y);
            if (x + 1 < width && y + 1 < height) out.se(x, y) = w.sw(width - 1 - x, y);
            if (x > 0 && y + 1 < height) out.sw(x, y) = w.se(width - 1 - x, y);
        }
    return out;
}

// Disparity of the right image via SGM with swapped roles (mirrored pair).
ScalarMap right_disparity(const GrayImage& left, const GrayImage& right, int d_max, float tau,
                          const SgmParams& sgm, const SgmEdgeWeights& weights) {
    const GrayImage lf = flip_horizontal(right);
    const GrayImage rf = flip_horizontal(left);
    const CostVolume vol = stereo_cost_volume(lf, rf, d_max, tau);
    const Sgm1dResult res = sgm_1d(vol, sgm, flip_weights(weights, left.width(), left.height()));
    ScalarMap out(left.width(), left.height());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out(x, y) = res.refined(out.width() - 1 - x, y);
    return out;
}

}  // namespace

StereoOutput binocular(const GrayImage& left, const GrayImage& right, const StereoParams& params,
                       const SgmEdgeWeights& weights) {
    StereoOutput out;
    out.d_max = params.max_disparity;
    out.cost = stereo_cost_volume(left, right, params.max_disparity, params.tau);
    Sgm1dResult res = sgm_1d(out.cost, params.sgm, weights);
    const ScalarMap d_right =
        right_disparity(left, right, params.max_disparity, params.tau, params.sgm, weights);
    out.occlusion = lr_consistency(res.refined, d_right, params.lr_tolerance);
    out.disparity = std::move(res.refined);
    out.labels = std::move(res.labels);
    out.uncertainty = std::move(res.uncertainty);
    // Pixels whose whole data slice sits at the cap (flat patches, no in-range
    // correspondence) carry no matching information: force them uncertain even
    // though all SGM minimizers trivially agree there.
    parallel_rows(left.height(), [&](int y) {
        for (int x = 0; x < left.width(); ++x) {
            float mn = params.tau;
            for (int d = 0; d <= params.max_disparity; ++d)
                mn = std::min(mn, out.cost.at(x, y, d));
            if (mn >= params.tau - 1e-6f)
                out.uncertainty(x, y) = std::max(out.uncertainty(x, y), params.tau_uncertainty);
        }
    });
    return out;
}

MaskMap lr_consistency(const ScalarMap& d_left, const ScalarMap& d_right, float tol) {
    const int w = d_left.width(), h = d_left.height();
    MaskMap occ(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float d = d_left(x, y);
            const int tx = static_cast<int>(std::lround(x - d));
            if (tx < 0 || tx >= w) {
                occ(x, y) = 1;
                continue;
            }
            if (std::abs(d - d_right(tx, y)) > tol) occ(x, y) = 1;
        }
    return occ;
}

int reduce_range(const ScalarMap& disparity, const MaskMap& occlusion, int global_max) {
    std::vector<size_t> hist(global_max + 1, 0);
    size_t total = 0;
    for (int y = 0; y < disparity.height(); ++y)
        for (int x = 0; x < disparity.width(); ++x) {
            if (!occlusion.empty() && occlusion(x, y)) continue;
            const int bin = std::clamp(static_cast<int>(std::lround(disparity(x, y))), 0, global_max);
            ++hist[bin];
            ++total;
        }
    if (total == 0) return global_max;
    int d_max = 0;
    for (int d = 0; d <= global_max; ++d) {
        // Inclusive 0.5% rule: bin frequency >= total / 200.
        if (200 * hist[d] >= total && hist[d] > 0) d_max = d;
    }
    return std::max(d_max, 1);
}

StereoOutput epipolar_refine(const GrayImage& left, const GrayImage& right,
                             const StereoOutput& bino, const TemporalFrames& frames,
                             const StereoRig& rig, const StereoParams& params,
                             const SgmEdgeWeights& weights) {
    const int w = left.width(), h = left.height();
    const int d_max = reduce_range(bino.disparity, bino.occlusion, bino.d_max);

    // Normalized uncertainty and blending weights.
    ScalarMap alpha(w, h, 0.0f);
    MaskMap uncertain(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float u = std::min(bino.uncertainty(x, y) / params.tau_uncertainty, 1.0f);
            if (u > params.tau_confidence) {
                uncertain(x, y) = 1;
                alpha(x, y) = (u - params.tau_confidence) / (1.0f - params.tau_confidence);
            }
        }

    // Temporal targets and their poses from the reference image I0_t.
    struct Target {
        const GrayImage* img;
        Pose pose;
    };
    std::vector<Target> targets;
    const Pose lr = rig.left_to_right();
    if (frames.prev_left && frames.prev_right) {
        const Pose to_prev = invert(frames.pose_prev);
        targets.push_back({frames.prev_left, to_prev});
        targets.push_back({frames.prev_right, compose(lr, to_prev)});
    }
    if (frames.next_left && frames.next_right) {
        targets.push_back({frames.next_left, frames.pose_cur});
        targets.push_back({frames.next_right, compose(lr, frames.pose_cur)});
    }

    CostVolume avr(w, h, d_max + 1, params.tau_epi);
    if (!targets.empty()) {
        std::vector<CostVolume> vols;
        vols.reserve(targets.size());
        for (const Target& t : targets)
            vols.push_back(pose_cost_volume(left, *t.img, d_max, rig, t.pose, params.tau_epi,
                                            &uncertain));
        parallel_rows(h, [&](int y) {
            for (int x = 0; x < w; ++x) {
                if (!uncertain(x, y)) continue;
                for (int d = 0; d <= d_max; ++d) {
                    float sum = 0;
                    for (const auto& v : vols) sum += v.at(x, y, d);
                    avr.at(x, y, d) = sum / static_cast<float>(vols.size());
                }
            }
        });
    }

    // Blend; left-right costs are truncated at tau_epi at occluded pixels first.
    CostVolume epi(w, h, d_max + 1, params.tau);
    parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const bool occluded = bino.occlusion(x, y) != 0;
            const float a = targets.empty() ? 0.0f : alpha(x, y);
            for (int d = 0; d <= d_max; ++d) {
                float c = bino.cost.at(x, y, d);
                if (occluded) c = std::min(c, params.tau_epi);
                epi.at(x, y, d) = (1.0f - a) * c + a * avr.at(x, y, d);
            }
        }
    });

    Sgm1dResult res = sgm_1d(epi, params.sgm, weights);
    StereoOutput out;
    out.d_max = d_max;
    out.occlusion = bino.occlusion;
    out.disparity = std::move(res.refined);
    out.labels = std::move(res.labels);
    out.uncertainty = std::move(res.uncertainty);
    out.cost = std::move(epi);
    return out;
}

}  // namespace sf
