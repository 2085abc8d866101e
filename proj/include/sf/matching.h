#pragma once

#include <optional>
#include <vector>

#include "sf/geometry.h"
#include "sf/image.h"

namespace sf {

constexpr int kPatchRadius = 2;  // 5x5 patches throughout

/// 1D label range [d_min, d_max] (disparities) or one axis of a 2D flow range.
struct LabelRange {
    int min = 0, max = 0;
    int count() const { return max - min + 1; }
};

/// 2D integer search range for flow labels.
struct FlowRange {
    LabelRange u, v;
    int count() const { return u.count() * v.count(); }
    bool contains(int du, int dv) const {
        return du >= u.min && du <= u.max && dv >= v.min && dv <= v.max;
    }
};

/// Per-pixel, per-label matching cost grid. Costs live in [0, cap].
class CostVolume {
public:
    CostVolume() = default;
    CostVolume(int w, int h, int labels, float cap)
        : w_(w), h_(h), labels_(labels), cap_(cap),
          data_(static_cast<size_t>(w) * h * labels, cap) {}

    int width() const { return w_; }
    int height() const { return h_; }
    int labels() const { return labels_; }
    float cap() const { return cap_; }

    float& at(int x, int y, int l) { return data_[(static_cast<size_t>(y) * w_ + x) * labels_ + l]; }
    float at(int x, int y, int l) const { return data_[(static_cast<size_t>(y) * w_ + x) * labels_ + l]; }
    const float* slice(int x, int y) const { return &data_[(static_cast<size_t>(y) * w_ + x) * labels_]; }
    float* slice(int x, int y) { return &data_[(static_cast<size_t>(y) * w_ + x) * labels_]; }

private:
    int w_ = 0, h_ = 0, labels_ = 0;
    float cap_ = 1.0f;
    std::vector<float> data_;
};

/// Zero-mean NCC of the 5x5 patches at integer p in img_a and continuous q in
/// img_b (bilinear taps, edge-clamped). Returns nullopt when q is outside the
/// image; 0 when either patch is degenerate (variance < 1e-8).
std::optional<double> ncc(const GrayImage& img_a, const Vec2d& p, const GrayImage& img_b,
                          const Vec2d& q);

/// Truncated NCC cost min{1 - NCC, cap}; invalid patches cost `cap`.
double tncc(const GrayImage& img_a, const Vec2d& p, const GrayImage& img_b, const Vec2d& q,
            double cap);

/// Rectified-stereo cost volume: cost(p, d) = tncc(p, p - (d, 0)).
CostVolume stereo_cost_volume(const GrayImage& left, const GrayImage& right, int d_max, float cap);

/// Cost volume against a target view under a known pose:
/// cost(p, d) = tncc(p, rigid_warp(p, d, rig, pose)). When `where` is non-null,
/// only pixels with *where != 0 are filled (the rest keep cost `cap`).
CostVolume pose_cost_volume(const GrayImage& ref, const GrayImage& target, int d_max,
                            const StereoRig& rig, const Pose& pose, float cap,
                            const MaskMap* where = nullptr);

/// 2D-shift cost volume over `range`; labels enumerate (du, dv) row-major in v
/// then u (index = (dv - v.min) * u.count() + (du - u.min)). Pixels outside
/// `mask` (if given) keep cost `cap`.
CostVolume flow_cost_volume(const GrayImage& ref, const GrayImage& target, const FlowRange& range,
                            float cap, const MaskMap* mask = nullptr);

/// Truncated 5x5 patch standard deviation, normalized: min(stddev, cap_w)/cap_w.
ScalarMap patch_stddev_weight(const GrayImage& img, float cap_w);

}  // namespace sf
