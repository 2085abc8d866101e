#include "sf/odometry.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sf/matching.h"
#include "sf/parallel.h"

namespace sf {

double tukey_rho(double r, double sigma) {
    const double k = 4.685 * sigma;
    const double a = std::abs(r);
    if (a >= k) return k * k / 6.0;
    const double q = 1.0 - (a / k) * (a / k);
    return k * k / 6.0 * (1.0 - q * q * q);
}

double tukey_weight(double r, double sigma) {
    const double k = 4.685 * sigma;
    const double a = std::abs(r);
    if (a >= k) return 0.0;
    const double q = 1.0 - (a / k) * (a / k);
    return q * q;
}

namespace {

struct PyramidLevel {
    GrayImage cur, next;
    ScalarMap disparity;
    ScalarMap weights;
    StereoRig rig;
};

GrayImage downsample(const GrayImage& img) {
    GrayImage out(img.width() / 2, img.height() / 2);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            out(x, y) = 0.25f * (img(2 * x, 2 * y) + img(2 * x + 1, 2 * y) +
                                 img(2 * x, 2 * y + 1) + img(2 * x + 1, 2 * y + 1));
    return out;
}

std::vector<PyramidLevel> build_pyramid(const GrayImage& cur, const GrayImage& next,
                                        const ScalarMap& disparity, const ScalarMap& weights,
                                        const StereoRig& rig, int levels) {
    std::vector<PyramidLevel> pyr(1);
    pyr[0] = {cur, next, disparity, weights, rig};
    for (int l = 1; l < levels; ++l) {
        const PyramidLevel& p = pyr.back();
        if (p.cur.width() < 16 || p.cur.height() < 16) break;
        PyramidLevel q;
        q.cur = downsample(p.cur);
        q.next = downsample(p.next);
        q.rig = p.rig;
        q.rig.width = q.cur.width();
        q.rig.height = q.cur.height();
        q.rig.intrinsics.f = p.rig.intrinsics.f / 2;
        q.rig.intrinsics.cx = p.rig.intrinsics.cx / 2;
        q.rig.intrinsics.cy = p.rig.intrinsics.cy / 2;
        q.disparity = ScalarMap(q.cur.width(), q.cur.height(), 0.0f);
        q.weights = ScalarMap(q.cur.width(), q.cur.height(), 0.0f);
        // Weighted 2x2 pooling; occluded (zero-weight) pixels do not pollute
        // the coarse disparity.
        for (int y = 0; y < q.cur.height(); ++y)
            for (int x = 0; x < q.cur.width(); ++x) {
                float wsum = 0, dsum = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const float w = p.weights(2 * x + dx, 2 * y + dy);
                        wsum += w;
                        dsum += w * p.disparity(2 * x + dx, 2 * y + dy);
                    }
                if (wsum > 0) {
                    q.weights(x, y) = wsum / 4.0f;
                    q.disparity(x, y) = dsum / wsum * 0.5f;  // disparity halves with resolution
                }
            }
        pyr.push_back(std::move(q));
    }
    return pyr;
}

struct TargetPixel {
    Vec2d p;
    double d;          // disparity
    double base_w;     // omega: 0 occluded, 1/8 predicted moving, 1
    double intensity;  // template value I_t(p)
    Eigen::Matrix<double, 6, 1> jac;
};

// Steepest-descent rows of the inverse-compositional warp at identity.
Eigen::Matrix<double, 6, 1> warp_jacobian(const Vec2d& p, double z, double gx, double gy,
                                          const Intrinsics& k) {
    const Vec3d xc = k.backproject(p.x(), p.y()) * z;
    const double x = xc.x(), y = xc.y(), f = k.f;
    Eigen::Matrix<double, 2, 6> a;
    a << f / z, 0, -f * x / (z * z), -f * x * y / (z * z), f * (1 + x * x / (z * z)), -f * y / z,
        0, f / z, -f * y / (z * z), -f * (1 + y * y / (z * z)), f * x * y / (z * z), f * x / z;
    return a.transpose() * Vec2d(gx, gy);
}

std::vector<TargetPixel> select_targets(const PyramidLevel& lv, float min_disparity) {
    struct Cand {
        TargetPixel t;
        double grad_mag;
    };
    std::vector<Cand> cands;
    const GrayImage& img = lv.cur;
    for (int y = 1; y < img.height() - 1; y += 2)
        for (int x = 1; x < img.width() - 1; x += 2) {
            const float w = lv.weights(x, y);
            const float d = lv.disparity(x, y);
            if (w <= 0 || d <= min_disparity) continue;
            const double gx = 0.5 * (img(x + 1, y) - img(x - 1, y));
            const double gy = 0.5 * (img(x, y + 1) - img(x, y - 1));
            Cand c;
            c.grad_mag = std::hypot(gx, gy);
            c.t.p = Vec2d(x, y);
            c.t.d = d;
            c.t.base_w = w;
            c.t.intensity = img(x, y);
            c.t.jac = warp_jacobian(c.t.p, lv.rig.disparity_to_depth(d), gx, gy, lv.rig.intrinsics);
            cands.push_back(c);
        }
    if (cands.empty()) return {};
    // Keep the upper half by gradient magnitude (50th percentile threshold).
    std::vector<double> mags(cands.size());
    for (size_t i = 0; i < cands.size(); ++i) mags[i] = cands[i].grad_mag;
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    const double thr = mags[mags.size() / 2];
    std::vector<TargetPixel> out;
    for (const Cand& c : cands)
        if (c.grad_mag >= thr) out.push_back(c.t);
    return out;
}

double robust_scale(std::vector<double> abs_res) {
    if (abs_res.empty()) return 1e-6;
    std::nth_element(abs_res.begin(), abs_res.begin() + abs_res.size() / 2, abs_res.end());
    // Floor at intensity-resolution scale so interpolation noise on clean
    // inputs cannot collapse the Tukey plateau onto the whole residual set.
    return std::max(1.4826 * abs_res[abs_res.size() / 2], 1e-3);
}

// Catmull-Rom bicubic sample (edge-clamped). Bilinear bias is the accuracy
// floor of direct alignment; cubic interpolation pushes it well below the
// sub-millipixel regime the pose solver needs.
double sample_cubic(const GrayImage& img, double x, double y) {
    auto weights = [](double t, double w[4]) {
        const double t2 = t * t, t3 = t2 * t;
        w[0] = 0.5 * (-t3 + 2 * t2 - t);
        w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
        w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
        w[3] = 0.5 * (t3 - t2);
    };
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    double wx[4], wy[4];
    weights(x - x0, wx);
    weights(y - y0, wy);
    double v = 0;
    for (int j = 0; j < 4; ++j) {
        double row = 0;
        for (int i = 0; i < 4; ++i) row += wx[i] * img.at_clamped(x0 - 1 + i, y0 - 1 + j);
        v += wy[j] * row;
    }
    return v;
}

// Residuals I_t(p) - I_{t+1}(w(p; P)); pixels warping outside get weight 0.
void compute_residuals(const std::vector<TargetPixel>& targets, const PyramidLevel& lv,
                       const Pose& pose, std::vector<double>* res, std::vector<uint8_t>* valid) {
    res->resize(targets.size());
    valid->resize(targets.size());
    for (size_t i = 0; i < targets.size(); ++i) {
        const Vec2d q = rigid_warp(targets[i].p, targets[i].d, lv.rig, pose);
        if (!lv.next.inside(q.x(), q.y())) {
            (*valid)[i] = 0;
            (*res)[i] = 0;
            continue;
        }
        (*valid)[i] = 1;
        (*res)[i] = targets[i].intensity - sample_cubic(lv.next, q.x(), q.y());
    }
}

double robust_energy(const std::vector<TargetPixel>& targets, const std::vector<double>& res,
                     const std::vector<uint8_t>& valid, double sigma) {
    double e = 0;
    for (size_t i = 0; i < targets.size(); ++i)
        if (valid[i]) e += targets[i].base_w * tukey_rho(res[i], sigma);
    return e;
}

}  // namespace

AlignResult irls_align(const GrayImage& cur, const GrayImage& next, const ScalarMap& disparity,
                       const ScalarMap& base_weights, const StereoRig& rig, const Pose& init,
                       const VoParams& params) {
    const auto pyr = build_pyramid(cur, next, disparity, base_weights, rig, params.pyramid_levels);
    AlignResult out;
    out.pose = init;
    out.ok = true;

    std::vector<double> res;
    std::vector<uint8_t> valid;
    for (int l = static_cast<int>(pyr.size()) - 1; l >= 0; --l) {
        const PyramidLevel& lv = pyr[l];
        const auto targets = select_targets(lv, params.min_disparity);
        if (targets.size() < 12) {
            out.ok = false;
            continue;
        }
        for (int iter = 0; iter < params.max_iterations; ++iter) {
            compute_residuals(targets, lv, out.pose, &res, &valid);
            std::vector<double> abs_res;
            abs_res.reserve(res.size());
            for (size_t i = 0; i < res.size(); ++i)
                if (valid[i]) abs_res.push_back(std::abs(res[i]));
            if (abs_res.size() < 12) {
                out.ok = false;
                break;
            }
            const double sigma = robust_scale(std::move(abs_res));
            const double e0 = robust_energy(targets, res, valid, sigma);

            Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
            Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
            for (size_t i = 0; i < targets.size(); ++i) {
                if (!valid[i]) continue;
                const double w = targets[i].base_w * tukey_weight(res[i], sigma);
                if (w <= 0) continue;
                h += w * targets[i].jac * targets[i].jac.transpose();
                b += w * targets[i].jac * res[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(h);
            if (eig.eigenvalues()(0) < 1e-12 * std::max(1.0, eig.eigenvalues()(5))) {
                out.ok = false;
                break;
            }
            const Eigen::Matrix<double, 6, 1> delta = -h.ldlt().solve(b);
            if (!delta.allFinite()) {
                out.ok = false;
                break;
            }

            // Step halving keeps E_vo non-increasing.
            double scale = 1.0;
            bool accepted = false;
            Pose best_pose;
            for (int half = 0; half <= params.max_step_halvings; ++half, scale *= 0.5) {
                const Pose cand = compose(out.pose, invert(pose_exp(scale * delta)));
                compute_residuals(targets, lv, cand, &res, &valid);
                if (robust_energy(targets, res, valid, sigma) <= e0) {
                    accepted = true;
                    best_pose = cand;
                    break;
                }
            }
            if (!accepted) break;
            out.pose = best_pose;
            if ((scale * delta).norm() < params.step_tolerance) break;
        }
    }

    // Final robust energy at full resolution.
    const auto targets = select_targets(pyr[0], params.min_disparity);
    if (!targets.empty()) {
        compute_residuals(targets, pyr[0], out.pose, &res, &valid);
        std::vector<double> abs_res;
        for (size_t i = 0; i < res.size(); ++i)
            if (valid[i]) abs_res.push_back(std::abs(res[i]));
        out.energy = robust_energy(targets, res, valid, robust_scale(std::move(abs_res)));
    }
    return out;
}

double pose_residual(const Pose& pose, const GrayImage& cur, const GrayImage& next,
                     const ScalarMap& disparity, const ScalarMap& base_weights,
                     const StereoRig& rig) {
    const int w = cur.width(), h = cur.height();
    std::vector<double> row_sum(h, 0.0), row_wsum(h, 0.0);
    parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const double bw = base_weights(x, y);
            if (bw <= 0) continue;
            const Vec2d q = rigid_warp(Vec2d(x, y), disparity(x, y), rig, pose);
            row_sum[y] += bw * tncc(cur, Vec2d(x, y), next, q, 1.0);
            row_wsum[y] += bw;
        }
    });
    const double num = std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
    const double den = std::accumulate(row_wsum.begin(), row_wsum.end(), 0.0);
    return den > 0 ? num / den : 1.0;
}

Pose select_pose(std::vector<PoseHypothesis> hypotheses, const GrayImage& cur,
                 const GrayImage& next, const ScalarMap& disparity,
                 const ScalarMap& base_weights, const StereoRig& rig, const VoParams& params) {
    for (PoseHypothesis& hyp : hypotheses) {
        hyp.pose = irls_align(cur, next, disparity, base_weights, rig, hyp.pose, params).pose;
        hyp.score = pose_residual(hyp.pose, cur, next, disparity, base_weights, rig);
    }
    const PoseHypothesis* best = &hypotheses.front();
    for (const PoseHypothesis& hyp : hypotheses) {
        if (hyp.score < best->score ||
            (hyp.score == best->score && static_cast<int>(hyp.source) < static_cast<int>(best->source)))
            best = &hyp;
    }
    return best->pose;
}

namespace {

struct Corner {
    int x, y;
    float response;
};

// Shi-Tomasi corners: min eigenvalue of the 5x5-summed structure tensor,
// 5x5 non-maximum suppression.
std::vector<Corner> detect_corners(const GrayImage& img, int max_corners) {
    const int w = img.width(), h = img.height();
    ScalarMap gxx(w, h, 0.0f), gyy(w, h, 0.0f), gxy(w, h, 0.0f);
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            const float gx = 0.5f * (img(x + 1, y) - img(x - 1, y));
            const float gy = 0.5f * (img(x, y + 1) - img(x, y - 1));
            gxx(x, y) = gx * gx;
            gyy(x, y) = gy * gy;
            gxy(x, y) = gx * gy;
        }
    ScalarMap resp(w, h, 0.0f);
    float max_resp = 0;
    for (int y = 3; y < h - 3; ++y)
        for (int x = 3; x < w - 3; ++x) {
            float sxx = 0, syy = 0, sxy = 0;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    sxx += gxx(x + dx, y + dy);
                    syy += gyy(x + dx, y + dy);
                    sxy += gxy(x + dx, y + dy);
                }
            const float tr = sxx + syy;
            const float det_part = std::sqrt((sxx - syy) * (sxx - syy) + 4 * sxy * sxy);
            resp(x, y) = 0.5f * (tr - det_part);
            max_resp = std::max(max_resp, resp(x, y));
        }
    std::vector<Corner> corners;
    const float thr = 0.01f * max_resp;
    if (thr <= 0) return corners;
    for (int y = 3; y < h - 3; ++y)
        for (int x = 3; x < w - 3; ++x) {
            const float r = resp(x, y);
            if (r < thr) continue;
            bool is_max = true;
            for (int dy = -2; dy <= 2 && is_max; ++dy)
                for (int dx = -2; dx <= 2; ++dx)
                    if ((dx || dy) && resp(x + dx, y + dy) > r) {
                        is_max = false;
                        break;
                    }
            if (is_max) corners.push_back({x, y, r});
        }
    std::sort(corners.begin(), corners.end(), [](const Corner& a, const Corner& b) {
        if (a.response != b.response) return a.response > b.response;
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    if (static_cast<int>(corners.size()) > max_corners) corners.resize(max_corners);
    return corners;
}

// Best integer-offset 5x5 patch NCC match inside a search window.
bool match_corner(const GrayImage& cur, const GrayImage& next, int cx, int cy, int radius,
                  Vec2f* out) {
    double best = -2.0;
    int bx = 0, by = 0;
    for (int qy = std::max(kPatchRadius, cy - radius);
         qy <= std::min(next.height() - 1 - kPatchRadius, cy + radius); ++qy)
        for (int qx = std::max(kPatchRadius, cx - radius);
             qx <= std::min(next.width() - 1 - kPatchRadius, cx + radius); ++qx) {
            const auto score = ncc(cur, Vec2d(cx, cy), next, Vec2d(qx, qy));
            if (score && *score > best) {
                best = *score;
                bx = qx;
                by = qy;
            }
        }
    if (best < 0.8) return false;
    *out = Vec2f(bx, by);
    return true;
}

// Grunert's P3P: camera-frame points from three 3D points and their bearing
// directions in the target camera.
std::vector<Pose> solve_p3p(const Vec3d x3d[3], const Vec3d bearing[3]) {
    std::vector<Pose> poses;
    const double a = (x3d[1] - x3d[2]).norm();
    const double b = (x3d[0] - x3d[2]).norm();
    const double c = (x3d[0] - x3d[1]).norm();
    if (a < 1e-9 || b < 1e-9 || c < 1e-9) return poses;
    const double cos_a = bearing[1].dot(bearing[2]);
    const double cos_b = bearing[0].dot(bearing[2]);
    const double cos_g = bearing[0].dot(bearing[1]);
    const double m = (c * c) / (b * b);
    const double n = (a * a) / (b * b);

    // With s2 = u*s1, s3 = v*s1: P(v) = N^2 - 2*cos_g*N*D - (m*w - 1)*D^2 = 0,
    // where w = 1 + v^2 - 2v*cos_b, N = 1 - v^2 - (m-n)*w, D = 2(cos_g - v*cos_a).
    auto mul = [](const std::vector<double>& p, const std::vector<double>& q) {
        std::vector<double> r(p.size() + q.size() - 1, 0.0);
        for (size_t i = 0; i < p.size(); ++i)
            for (size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
        return r;
    };
    auto add = [](std::vector<double> p, const std::vector<double>& q, double s) {
        if (q.size() > p.size()) p.resize(q.size(), 0.0);
        for (size_t j = 0; j < q.size(); ++j) p[j] += s * q[j];
        return p;
    };
    const std::vector<double> wp = {1.0, -2.0 * cos_b, 1.0};
    std::vector<double> np = {1.0, 0.0, -1.0};
    np = add(np, wp, -(m - n));
    const std::vector<double> dp = {2.0 * cos_g, -2.0 * cos_a};
    std::vector<double> poly = mul(np, np);
    poly = add(poly, mul(np, dp), -2.0 * cos_g);
    std::vector<double> mw1 = add({-1.0}, wp, m);
    poly = add(poly, mul(mw1, mul(dp, dp)), -1.0);

    // Real roots via the companion matrix of the (deflated) polynomial.
    double max_c = 0;
    for (double cf : poly) max_c = std::max(max_c, std::abs(cf));
    if (max_c <= 0) return poses;
    int deg = static_cast<int>(poly.size()) - 1;
    while (deg > 0 && std::abs(poly[deg]) < 1e-12 * max_c) --deg;
    if (deg < 1) return poses;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -poly[i] / poly[deg];
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(comp).eigenvalues();

    for (int i = 0; i < roots.size(); ++i) {
        if (std::abs(roots(i).imag()) > 1e-6 * (1.0 + std::abs(roots(i).real()))) continue;
        const double v = roots(i).real();
        if (v <= 0) continue;
        const double wv = 1.0 + v * v - 2.0 * v * cos_b;
        if (wv <= 1e-12) continue;
        const double s1 = b / std::sqrt(wv);
        const double dv = 2.0 * (cos_g - v * cos_a);
        if (std::abs(dv) < 1e-12) continue;
        const double u = (1.0 - v * v - (m - n) * wv) / dv;
        if (u <= 0) continue;
        const Vec3d y[3] = {s1 * bearing[0], u * s1 * bearing[1], v * s1 * bearing[2]};

        // Rigid fit x3d -> y (Kabsch).
        const Vec3d xc = (x3d[0] + x3d[1] + x3d[2]) / 3.0;
        const Vec3d yc = (y[0] + y[1] + y[2]) / 3.0;
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (int j = 0; j < 3; ++j) cov += (x3d[j] - xc) * (y[j] - yc).transpose();
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
        d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant();
        Pose pose;
        pose.r = svd.matrixV() * d * svd.matrixU().transpose();
        pose.t = yc - pose.r * xc;
        poses.push_back(pose);
    }
    return poses;
}

// Gauss-Newton reprojection polish over the inlier set.
Pose polish_pose(Pose pose, const std::vector<Vec3d>& pts, const std::vector<Vec2d>& obs,
                 const std::vector<int>& inliers, const Intrinsics& k) {
    for (int iter = 0; iter < 10; ++iter) {
        Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
        for (int idx : inliers) {
            const Vec3d y = pose.apply(pts[idx]);
            if (y.z() <= 1e-9) continue;
            const Vec2d e = k.project(y) - obs[idx];
            Eigen::Matrix<double, 2, 3> dpdy;
            dpdy << k.f / y.z(), 0, -k.f * y.x() / (y.z() * y.z()),
                0, k.f / y.z(), -k.f * y.y() / (y.z() * y.z());
            Eigen::Matrix<double, 3, 6> dydx;
            dydx.leftCols<3>() = Eigen::Matrix3d::Identity();
            dydx.rightCols<3>() << 0, y.z(), -y.y(), -y.z(), 0, y.x(), y.y(), -y.x(), 0;
            const Eigen::Matrix<double, 2, 6> jac = dpdy * dydx;
            h += jac.transpose() * jac;
            g += jac.transpose() * e;
        }
        const Eigen::Matrix<double, 6, 1> delta = -h.ldlt().solve(g);
        if (!delta.allFinite() || delta.norm() < 1e-10) break;
        pose = compose(pose_exp(delta), pose);
    }
    return pose;
}

}  // namespace

FeatureInitResult feature_init(const GrayImage& cur, const GrayImage& next,
                               const ScalarMap& disparity, const StereoRig& rig,
                               const MaskMap* occlusion) {
    FeatureInitResult out;
    const auto corners = detect_corners(cur, 300);
    std::vector<Vec3d> pts;
    std::vector<Vec2d> obs;
    for (const Corner& c : corners) {
        const float d = disparity(c.x, c.y);
        if (d <= 1e-3f) continue;
        if (occlusion && (*occlusion)(c.x, c.y)) continue;
        Vec2f q;
        if (!match_corner(cur, next, c.x, c.y, 24, &q)) continue;
        out.matches.push_back({Vec2f(c.x, c.y), q});
        pts.push_back(rig.intrinsics.backproject(c.x, c.y) * rig.disparity_to_depth(d));
        obs.emplace_back(q.x(), q.y());
    }
    if (pts.size() < 6) return out;

    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(pts.size()) - 1);
    std::vector<int> best_inliers;
    Pose best_pose;
    for (int iter = 0; iter < 200; ++iter) {
        int i0 = pick(rng), i1 = pick(rng), i2 = pick(rng);
        if (i0 == i1 || i0 == i2 || i1 == i2) continue;
        const Vec3d x3d[3] = {pts[i0], pts[i1], pts[i2]};
        const Vec3d bearing[3] = {rig.intrinsics.backproject(obs[i0].x(), obs[i0].y()).normalized(),
                                  rig.intrinsics.backproject(obs[i1].x(), obs[i1].y()).normalized(),
                                  rig.intrinsics.backproject(obs[i2].x(), obs[i2].y()).normalized()};
        for (const Pose& cand : solve_p3p(x3d, bearing)) {
            std::vector<int> inliers;
            for (size_t j = 0; j < pts.size(); ++j) {
                const Vec3d y = cand.apply(pts[j]);
                if (y.z() <= 1e-9) continue;
                if ((rig.intrinsics.project(y) - obs[j]).norm() < 2.0)
                    inliers.push_back(static_cast<int>(j));
            }
            if (inliers.size() > best_inliers.size()) {
                best_inliers = std::move(inliers);
                best_pose = cand;
            }
        }
    }
    if (best_inliers.size() < 10) return out;
    out.pose = polish_pose(best_pose, pts, obs, best_inliers, rig.intrinsics);
    out.ok = true;
    return out;
}

std::vector<Pose> forward_translation_candidates(int n, double depth) {
    std::vector<Pose> out;
    if (n <= 0 || depth <= 0) return out;
    const double lo = 0.1 * depth, hi = 4.0 * depth;
    const double ratio = n > 1 ? std::pow(hi / lo, 1.0 / (n - 1)) : 1.0;
    double mag = lo;
    for (int i = 0; i < n; ++i, mag *= ratio)
        out.push_back(Pose::translation({0.0, 0.0, -mag}));  // camera moving forward
    return out;
}

double median_depth(const ScalarMap& disparity, const StereoRig& rig, float min_disparity) {
    std::vector<float> d;
    d.reserve(static_cast<size_t>(disparity.width()) * disparity.height());
    for (int y = 0; y < disparity.height(); ++y)
        for (int x = 0; x < disparity.width(); ++x)
            if (disparity(x, y) > min_disparity) d.push_back(disparity(x, y));
    if (d.empty()) return 0.0;
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    return rig.disparity_to_depth(d[d.size() / 2]);
}

}  // namespace sf
