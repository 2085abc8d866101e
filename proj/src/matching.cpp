#include "sf/matching.h"

#include <cmath>

#include "sf/parallel.h"

namespace sf {

namespace {

constexpr int kP = kPatchRadius;
constexpr int kTaps = (2 * kP + 1) * (2 * kP + 1);
constexpr double kVarEps = 1e-8;

// Edge-replicated padding by kP on every side.
Image<double> pad_replicate(const GrayImage& img) {
    const int w = img.width(), h = img.height();
    Image<double> out(w + 2 * kP, h + 2 * kP);
    for (int y = 0; y < h + 2 * kP; ++y)
        for (int x = 0; x < w + 2 * kP; ++x)
            out(x, y) = img.at_clamped(x - kP, y - kP);
    return out;
}

// 5x5 box sum of a padded image, evaluated at every unpadded pixel.
Image<double> box_sum(const Image<double>& padded, int w, int h) {
    const int pw = padded.width();
    Image<double> horiz(pw, h + 2 * kP);
    for (int y = 0; y < h + 2 * kP; ++y) {
        const double* src = padded.row(y);
        double s = 0;
        for (int x = 0; x < 2 * kP; ++x) s += src[x];
        for (int x = 0; x < w; ++x) {
            s += src[x + 2 * kP];
            horiz(x, y) = s;
            s -= src[x];
        }
    }
    Image<double> out(w, h);
    for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int y = 0; y < 2 * kP; ++y) s += horiz(x, y);
        for (int y = 0; y < h; ++y) {
            s += horiz(x, y + 2 * kP);
            out(x, y) = s;
            s -= horiz(x, y);
        }
    }
    return out;
}

struct PatchStats {
    Image<double> mean, var;
};

PatchStats patch_stats(const GrayImage& img) {
    const int w = img.width(), h = img.height();
    Image<double> padded = pad_replicate(img);
    Image<double> sq(padded.width(), padded.height());
    for (int y = 0; y < padded.height(); ++y)
        for (int x = 0; x < padded.width(); ++x) sq(x, y) = padded(x, y) * padded(x, y);
    Image<double> s1 = box_sum(padded, w, h);
    Image<double> s2 = box_sum(sq, w, h);
    PatchStats st{Image<double>(w, h), Image<double>(w, h)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double m = s1(x, y) / kTaps;
            st.mean(x, y) = m;
            st.var(x, y) = std::max(0.0, s2(x, y) / kTaps - m * m);
        }
    return st;
}

// 25 taps of the 5x5 patch at continuous center, edge-clamped.
void gather_patch(const GrayImage& img, const Vec2d& c, double* out) {
    int i = 0;
    for (int dy = -kP; dy <= kP; ++dy)
        for (int dx = -kP; dx <= kP; ++dx) out[i++] = sample_bilinear(img, c.x() + dx, c.y() + dy);
}

double ncc_from_patches(const double* a, const double* b) {
    double ma = 0, mb = 0;
    for (int i = 0; i < kTaps; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= kTaps;
    mb /= kTaps;
    double va = 0, vb = 0, cov = 0;
    for (int i = 0; i < kTaps; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        va += da * da;
        vb += db * db;
        cov += da * db;
    }
    va /= kTaps;
    vb /= kTaps;
    cov /= kTaps;
    if (va < kVarEps || vb < kVarEps) return 0.0;
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

}  // namespace

std::optional<double> ncc(const GrayImage& img_a, const Vec2d& p, const GrayImage& img_b,
                          const Vec2d& q) {
    if (!img_b.inside(q.x(), q.y())) return std::nullopt;
    double pa[kTaps], pb[kTaps];
    gather_patch(img_a, p, pa);
    gather_patch(img_b, q, pb);
    return ncc_from_patches(pa, pb);
}

double tncc(const GrayImage& img_a, const Vec2d& p, const GrayImage& img_b, const Vec2d& q,
            double cap) {
    const auto score = ncc(img_a, p, img_b, q);
    if (!score) return cap;
    return std::min(1.0 - *score, cap);
}

CostVolume stereo_cost_volume(const GrayImage& left, const GrayImage& right, int d_max, float cap) {
    const int w = left.width(), h = left.height();
    CostVolume vol(w, h, d_max + 1, cap);
    const Image<double> lp = pad_replicate(left);
    const Image<double> rp = pad_replicate(right);
    const PatchStats ls = patch_stats(left);
    const PatchStats rs = patch_stats(right);
    const int pw = lp.width(), ph = lp.height();

    for (int d = 0; d <= d_max; ++d) {
        Image<double> prod(pw, ph, 0.0);
        parallel_rows(ph, [&](int y) {
            const double* l = lp.row(y);
            const double* r = rp.row(y);
            for (int x = d; x < pw; ++x) prod(x, y) = l[x] * r[x - d];
        });
        Image<double> sp = box_sum(prod, w, h);
        parallel_rows(h, [&](int y) {
            for (int x = d; x < w; ++x) {
                const double va = ls.var(x, y), vb = rs.var(x - d, y);
                double cost;
                if (va < kVarEps || vb < kVarEps) {
                    cost = std::min(1.0, static_cast<double>(cap));
                } else {
                    const double cov = sp(x, y) / kTaps - ls.mean(x, y) * rs.mean(x - d, y);
                    const double score = std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
                    cost = std::min(1.0 - score, static_cast<double>(cap));
                }
                vol.at(x, y, d) = static_cast<float>(cost);
            }
        });
    }
    return vol;
}

CostVolume pose_cost_volume(const GrayImage& ref, const GrayImage& target, int d_max,
                            const StereoRig& rig, const Pose& pose, float cap,
                            const MaskMap* where) {
    const int w = ref.width(), h = ref.height();
    CostVolume vol(w, h, d_max + 1, cap);
    parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            if (where && !(*where)(x, y)) continue;
            const Vec2d p(x, y);
            for (int d = 0; d <= d_max; ++d) {
                const Vec2d q = rigid_warp(p, d, rig, pose);
                vol.at(x, y, d) = static_cast<float>(tncc(ref, p, target, q, cap));
            }
        }
    });
    return vol;
}

CostVolume flow_cost_volume(const GrayImage& ref, const GrayImage& target, const FlowRange& range,
                            float cap, const MaskMap* mask) {
    const int w = ref.width(), h = ref.height();
    CostVolume vol(w, h, range.count(), cap);
    const Image<double> lp = pad_replicate(ref);
    const Image<double> rp = pad_replicate(target);
    const PatchStats ls = patch_stats(ref);
    const PatchStats rs = patch_stats(target);
    const int pw = lp.width(), ph = lp.height();
    const int nu = range.u.count();

    for (int dv = range.v.min; dv <= range.v.max; ++dv) {
        for (int du = range.u.min; du <= range.u.max; ++du) {
            const int label = (dv - range.v.min) * nu + (du - range.u.min);
            Image<double> prod(pw, ph, 0.0);
            parallel_rows(ph, [&](int y) {
                const int ty = y + dv;
                if (ty < 0 || ty >= ph) return;
                const double* l = lp.row(y);
                const double* r = rp.row(ty);
                const int x0 = std::max(0, -du), x1 = std::min(pw, pw - du);
                for (int x = x0; x < x1; ++x) prod(x, y) = l[x] * r[x + du];
            });
            Image<double> sp = box_sum(prod, w, h);
            parallel_rows(h, [&](int y) {
                const int ty = y + dv;
                if (ty < 0 || ty >= h) return;
                for (int x = 0; x < w; ++x) {
                    if (mask && !(*mask)(x, y)) continue;
                    const int tx = x + du;
                    if (tx < 0 || tx >= w) continue;
                    const double va = ls.var(x, y), vb = rs.var(tx, ty);
                    double cost;
                    if (va < kVarEps || vb < kVarEps) {
                        cost = std::min(1.0, static_cast<double>(cap));
                    } else {
                        const double cov = sp(x, y) / kTaps - ls.mean(x, y) * rs.mean(tx, ty);
                        const double score = std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
                        cost = std::min(1.0 - score, static_cast<double>(cap));
                    }
                    vol.at(x, y, label) = static_cast<float>(cost);
                }
            });
        }
    }
    return vol;
}

ScalarMap patch_stddev_weight(const GrayImage& img, float cap_w) {
    const PatchStats st = patch_stats(img);
    ScalarMap out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double sd = std::sqrt(st.var(x, y));
            out(x, y) = static_cast<float>(std::min(sd, static_cast<double>(cap_w)) / cap_w);
        }
    return out;
}

}  // namespace sf
