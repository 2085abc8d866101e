#include "sf/segmentation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "sf/matching.h"
#include "sf/parallel.h"

namespace sf {

ColorModel::ColorModel()
    : hist_fg_(kBins * kBins * kBins, 1.0 / (kBins * kBins * kBins)),
      hist_bg_(kBins * kBins * kBins, 1.0 / (kBins * kBins * kBins)) {}

int ColorModel::bin_index(const Vec3f& rgb) {
    auto bin = [](float v) {
        return std::clamp(static_cast<int>(v * kBins), 0, kBins - 1);
    };
    return (bin(rgb.x()) * kBins + bin(rgb.y())) * kBins + bin(rgb.z());
}

ColorModel ColorModel::fit(const ColorImage& img, const MaskMap& mask) {
    const int n = kBins * kBins * kBins;
    std::vector<double> fg(n, 1.0), bg(n, 1.0);  // Laplace smoothing: +1 per bin
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            (mask(x, y) ? fg : bg)[bin_index(img(x, y))] += 1.0;
    ColorModel m;
    double fg_sum = 0, bg_sum = 0;
    for (int i = 0; i < n; ++i) {
        fg_sum += fg[i];
        bg_sum += bg[i];
    }
    for (int i = 0; i < n; ++i) {
        m.hist_fg_[i] = fg[i] / fg_sum;
        m.hist_bg_[i] = bg[i] / bg_sum;
    }
    m.frames_ = 1;
    return m;
}

void ColorModel::accumulate(const ColorModel& frame_model) {
    if (frames_ == 0) {
        *this = frame_model;
        return;
    }
    const double n = frames_;
    for (size_t i = 0; i < hist_fg_.size(); ++i) {
        hist_fg_[i] = (hist_fg_[i] * n + frame_model.hist_fg_[i]) / (n + 1);
        hist_bg_[i] = (hist_bg_[i] * n + frame_model.hist_bg_[i]) / (n + 1);
    }
    ++frames_;
}

double ColorModel::log_ratio(const Vec3f& rgb) const {
    if (frames_ == 0) return 0.0;
    const int i = bin_index(rgb);
    return std::log(hist_fg_[i]) - std::log(hist_bg_[i]);
}

ScalarMap appearance_term(const GrayImage& cur, const std::vector<AppearanceTarget>& targets,
                          const ScalarMap& disparity, const ScalarMap& w_var,
                          const StereoRig& rig, const SegParams& params) {
    const int w = cur.width(), h = cur.height();
    std::vector<MaskMap> visible;
    visible.reserve(targets.size());
    for (const auto& t : targets) visible.push_back(visibility_map(disparity, rig, t.pose));

    ScalarMap out(w, h, 0.0f);
    parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0;
            int count = 0;
            for (size_t i = 0; i < targets.size(); ++i) {
                const Vec2d q = rigid_warp(Vec2d(x, y), disparity(x, y), rig, targets[i].pose);
                if (!targets[i].image->inside(q.x(), q.y())) continue;
                double v = tncc(cur, Vec2d(x, y), *targets[i].image, q, 1.0) - params.tau_ncc;
                // Predicted occlusions cannot vote for "moving".
                if (!visible[i](x, y)) v = std::min(v, 0.0);
                sum += v;
                ++count;
            }
            if (count > 0)
                out(x, y) = params.lambda_ncc * w_var(x, y) *
                            static_cast<float>(sum / count);
        }
    });
    return out;
}

ScalarMap flow_term(const VectorMap& rigid, const VectorMap& prior, const MaskMap& prior_valid,
                    const ScalarMap& w_var, const SegParams& params) {
    const int w = rigid.width(), h = rigid.height();
    ScalarMap out(w, h, 0.0f);
    parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            if (!prior_valid(x, y)) continue;
            const float r = (rigid(x, y) - prior(x, y)).norm();
            const float tau_p = std::max(params.tau_flo, params.gamma_flo * rigid(x, y).norm());
            out(x, y) = params.lambda_flo * w_var(x, y) *
                        (std::min(r, 2 * tau_p) - tau_p) / tau_p;
        }
    });
    return out;
}

ScalarMap color_term(const ColorImage& img, const ColorModel& model, float lambda_col) {
    ScalarMap out(img.width(), img.height(), 0.0f);
    parallel_rows(img.height(), [&](int y) {
        for (int x = 0; x < img.width(); ++x)
            out(x, y) = lambda_col * static_cast<float>(model.log_ratio(img(x, y)));
    });
    return out;
}

ScalarMap prior_term(const ColorImage& img, const SegPriors& priors, const SegParams& params) {
    ScalarMap out(img.width(), img.height(), 0.0f);
    if (!priors.mask.empty())
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x)
                out(x, y) += params.lambda_mask * priors.mask(x, y);
    if (priors.prior_model && !priors.prior_model->empty()) {
        const ScalarMap pcol = color_term(img, *priors.prior_model, params.lambda_col);
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x) out(x, y) += pcol(x, y);
    }
    if (!priors.ground.empty())
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x) out(x, y) += priors.ground(x, y);
    return out;
}

ScalarMap make_mask_prior(const MaskMap& prev_mask, const VectorMap& prev_flow) {
    const int w = prev_mask.width(), h = prev_mask.height();
    MaskMap warped(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!prev_mask(x, y)) continue;
            const int tx = static_cast<int>(std::lround(x + prev_flow(x, y).x()));
            const int ty = static_cast<int>(std::lround(y + prev_flow(x, y).y()));
            if (tx >= 0 && tx < w && ty >= 0 && ty < h) warped(tx, ty) = 1;
        }
    ScalarMap out(w, h, -0.1f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool fg = false;
            for (int dy = -2; dy <= 2 && !fg; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx >= 0 && nx < w && ny >= 0 && ny < h && warped(nx, ny)) {
                        fg = true;
                        break;
                    }
                }
            if (fg) out(x, y) = 1.0f;
        }
    return out;
}

ScalarMap ground_prior(const ScalarMap& disparity, int d_max, const SegParams& params) {
    const int w = disparity.width(), h = disparity.height();
    ScalarMap zero(w, h, 0.0f);
    std::vector<Vec3d> samples;  // (u, v, d)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (disparity(x, y) > 0) samples.emplace_back(x, y, disparity(x, y));
    if (samples.size() < 3) return zero;

    std::mt19937 rng(777);
    std::uniform_int_distribution<size_t> pick(0, samples.size() - 1);
    double best_a = 0, best_b = 0, best_c = 0;
    size_t best_inliers = 0;
    for (int iter = 0; iter < 200; ++iter) {
        const Vec3d s0 = samples[pick(rng)], s1 = samples[pick(rng)], s2 = samples[pick(rng)];
        Eigen::Matrix3d m;
        m << s0.x(), s0.y(), 1, s1.x(), s1.y(), 1, s2.x(), s2.y(), 1;
        if (std::abs(m.determinant()) < 1e-9) continue;
        const Vec3d abc = m.inverse() * Vec3d(s0.z(), s1.z(), s2.z());
        // Road plane: disparity grows downward, near-zero lateral slope.
        if (abc.y() <= 0 || std::abs(abc.x()) >= 0.1 * abc.y()) continue;
        size_t inliers = 0;
        for (const Vec3d& s : samples)
            if (std::abs(s.z() - (abc.x() * s.x() + abc.y() * s.y() + abc.z())) < 1.0) ++inliers;
        if (inliers > best_inliers) {
            best_inliers = inliers;
            best_a = abc.x();
            best_b = abc.y();
            best_c = abc.z();
        }
    }
    if (best_inliers * 5 < samples.size()) return zero;  // < 20% support

    // Least-squares refit on inliers, kept only if still admissible.
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Vec3d atb = Vec3d::Zero();
    for (const Vec3d& s : samples) {
        if (std::abs(s.z() - (best_a * s.x() + best_b * s.y() + best_c)) >= 1.0) continue;
        const Vec3d row(s.x(), s.y(), 1.0);
        ata += row * row.transpose();
        atb += row * s.z();
    }
    const Vec3d refit = ata.ldlt().solve(atb);
    if (refit.allFinite() && refit.y() > 0 && std::abs(refit.x()) < 0.1 * refit.y()) {
        best_a = refit.x();
        best_b = refit.y();
        best_c = refit.z();
    }

    const float tau = 0.01f * static_cast<float>(std::max(d_max, 1));
    ScalarMap out(w, h, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float r =
                std::abs(disparity(x, y) - static_cast<float>(best_a * x + best_b * y + best_c));
            out(x, y) = params.lambda_gro * (std::min(r, tau) / tau - 1.0f);
        }
    return out;
}

ScalarMap sobel_edge_map(const GrayImage& img) {
    const int w = img.width(), h = img.height();
    ScalarMap mag(w, h, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto v = [&](int dx, int dy) { return img.at_clamped(x + dx, y + dy); };
            const float gx = (v(1, -1) + 2 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2 * v(-1, 0) + v(-1, 1));
            const float gy = (v(-1, 1) + 2 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2 * v(0, -1) + v(1, -1));
            mag(x, y) = std::hypot(gx, gy);
        }
    std::vector<float> vals(mag.data(), mag.data() + static_cast<size_t>(w) * h);
    const size_t k = static_cast<size_t>(0.99 * (vals.size() - 1));
    std::nth_element(vals.begin(), vals.begin() + k, vals.end());
    const float norm = std::max(vals[k], 1e-6f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mag(x, y) = std::min(mag(x, y) / norm, 1.0f);
    return mag;
}

PottsWeights potts_weights(const ColorImage& img, const ScalarMap& disparity,
                           const ScalarMap& edge_map, const SegParams& params) {
    const int w = img.width(), h = img.height();

    // Absolute disparity Laplacian (4-neighbor, clamped at borders).
    ScalarMap lap(w, h, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            lap(x, y) = std::abs(disparity.at_clamped(x + 1, y) + disparity.at_clamped(x - 1, y) +
                                 disparity.at_clamped(x, y + 1) + disparity.at_clamped(x, y - 1) -
                                 4 * disparity(x, y));

    struct Dir {
        int dx, dy;
    };
    const Dir dirs[4] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};

    // Scale constants from the data: kappa = mean of 2 * (quantity).
    double col_sum = 0, dep_sum = 0;
    size_t count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (const Dir& d : dirs) {
                const int nx = x + d.dx, ny = y + d.dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                col_sum += 2.0 * (img(x, y) - img(nx, ny)).squaredNorm();
                dep_sum += 2.0 * std::abs(lap(x, y) + lap(nx, ny));
                ++count;
            }
    PottsWeights out;
    out.kappa1 = std::max(col_sum / std::max<size_t>(count, 1), 1e-6);
    out.kappa2 = std::max(dep_sum / std::max<size_t>(count, 1), 1e-6);

    auto weight = [&](int x, int y, int nx, int ny) {
        const double w_col = std::exp(-(img(x, y) - img(nx, ny)).squaredNorm() / out.kappa1);
        const double w_dep = std::exp(-std::abs(lap(x, y) + lap(nx, ny)) / out.kappa2);
        const double w_str = std::exp(-std::abs(edge_map(x, y) + edge_map(nx, ny)) / params.kappa3);
        return static_cast<float>(params.lambda_potts * (w_col + w_dep + w_str));
    };
    out.e = ScalarMap(w, h, 0.0f);
    out.s = ScalarMap(w, h, 0.0f);
    out.se = ScalarMap(w, h, 0.0f);
    out.sw = ScalarMap(w, h, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w) out.e(x, y) = weight(x, y, x + 1, y);
            if (y + 1 < h) out.s(x, y) = weight(x, y, x, y + 1);
            if (x + 1 < w && y + 1 < h) out.se(x, y) = weight(x, y, x + 1, y + 1);
            if (x > 0 && y + 1 < h) out.sw(x, y) = weight(x, y, x - 1, y + 1);
        }
    return out;
}

Image<int32_t> slic_superpixels(const ColorImage& img, int target_segments, int iterations) {
    const int w = img.width(), h = img.height();
    const double step = std::sqrt(static_cast<double>(w) * h / std::max(target_segments, 1));
    const int gx = std::max(1, static_cast<int>(std::lround(w / step)));
    const int gy = std::max(1, static_cast<int>(std::lround(h / step)));

    struct Center {
        Vec3f color;
        double x, y;
    };
    std::vector<Center> centers;
    for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i) {
            const int cx = std::min(w - 1, static_cast<int>((i + 0.5) * w / gx));
            const int cy = std::min(h - 1, static_cast<int>((j + 0.5) * h / gy));
            centers.push_back({img(cx, cy), static_cast<double>(cx), static_cast<double>(cy)});
        }

    // Initial grid assignment guarantees full coverage.
    Image<int32_t> labels(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int i = std::min(gx - 1, x * gx / w);
            const int j = std::min(gy - 1, y * gy / h);
            labels(x, y) = j * gx + i;
        }

    const double spatial = 0.1 / step;  // compactness: color units per pixel of offset
    for (int iter = 0; iter < iterations; ++iter) {
        std::vector<double> best(static_cast<size_t>(w) * h,
                                 std::numeric_limits<double>::infinity());
        for (size_t c = 0; c < centers.size(); ++c) {
            const int x0 = std::max(0, static_cast<int>(centers[c].x - step));
            const int x1 = std::min(w - 1, static_cast<int>(centers[c].x + step));
            const int y0 = std::max(0, static_cast<int>(centers[c].y - step));
            const int y1 = std::min(h - 1, static_cast<int>(centers[c].y + step));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dc = (img(x, y) - centers[c].color).squaredNorm();
                    const double dx = x - centers[c].x, dy = y - centers[c].y;
                    const double d = dc + spatial * spatial * (dx * dx + dy * dy);
                    if (d < best[static_cast<size_t>(y) * w + x]) {
                        best[static_cast<size_t>(y) * w + x] = d;
                        labels(x, y) = static_cast<int32_t>(c);
                    }
                }
        }
        std::vector<Vec3f> csum(centers.size(), Vec3f::Zero());
        std::vector<double> xsum(centers.size(), 0), ysum(centers.size(), 0);
        std::vector<int> cnt(centers.size(), 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int c = labels(x, y);
                csum[c] += img(x, y);
                xsum[c] += x;
                ysum[c] += y;
                ++cnt[c];
            }
        for (size_t c = 0; c < centers.size(); ++c)
            if (cnt[c] > 0) {
                centers[c].color = csum[c] / static_cast<float>(cnt[c]);
                centers[c].x = xsum[c] / cnt[c];
                centers[c].y = ysum[c] / cnt[c];
            }
    }
    return labels;
}

ScalarMap smooth_costs(const ScalarMap& cost, const Image<int32_t>& segments) {
    int32_t max_label = 0;
    for (int y = 0; y < cost.height(); ++y)
        for (int x = 0; x < cost.width(); ++x) max_label = std::max(max_label, segments(x, y));
    std::vector<double> sum(max_label + 1, 0.0);
    std::vector<int> cnt(max_label + 1, 0);
    for (int y = 0; y < cost.height(); ++y)
        for (int x = 0; x < cost.width(); ++x) {
            sum[segments(x, y)] += cost(x, y);
            ++cnt[segments(x, y)];
        }
    ScalarMap out(cost.width(), cost.height());
    for (int y = 0; y < cost.height(); ++y)
        for (int x = 0; x < cost.width(); ++x)
            out(x, y) = static_cast<float>(sum[segments(x, y)] / cnt[segments(x, y)]);
    return out;
}

namespace {

GrayImage half(const GrayImage& img) {
    GrayImage out(std::max(1, img.width() / 2), std::max(1, img.height() / 2));
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            out(x, y) = 0.25f * (img.at_clamped(2 * x, 2 * y) + img.at_clamped(2 * x + 1, 2 * y) +
                                 img.at_clamped(2 * x, 2 * y + 1) +
                                 img.at_clamped(2 * x + 1, 2 * y + 1));
    return out;
}

// One block-matching pass: 9x9 SSD, +-4 px search around `init`, parabola
// subpixel at the integer optimum.
VectorMap block_match(const GrayImage& a, const GrayImage& b, const VectorMap& init) {
    const int w = a.width(), h = a.height();
    constexpr int kR = 4;       // patch radius (9x9)
    constexpr int kSearch = 4;  // search radius per level
    VectorMap out(w, h, Vec2f::Zero());
    parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const int iu = static_cast<int>(std::lround(init(x, y).x()));
            const int iv = static_cast<int>(std::lround(init(x, y).y()));
            float best = std::numeric_limits<float>::infinity();
            int bu = iu, bv = iv;
            // SSD at every candidate; kept for the subpixel fit.
            float ssd[2 * kSearch + 1][2 * kSearch + 1];
            for (int dv = -kSearch; dv <= kSearch; ++dv)
                for (int du = -kSearch; du <= kSearch; ++du) {
                    float s = 0;
                    for (int py = -kR; py <= kR; ++py)
                        for (int px = -kR; px <= kR; ++px) {
                            const float diff = a.at_clamped(x + px, y + py) -
                                               b.at_clamped(x + iu + du + px, y + iv + dv + py);
                            s += diff * diff;
                        }
                    ssd[dv + kSearch][du + kSearch] = s;
                    if (s < best) {
                        best = s;
                        bu = iu + du;
                        bv = iv + dv;
                    }
                }
            float su = 0, sv = 0;
            const int cu = bu - iu + kSearch, cv = bv - iv + kSearch;
            // A perfect match needs no subpixel fit; the parabola vertex would
            // drift off zero whenever the neighboring SSDs are asymmetric.
            if (best <= 1e-12f) {
                out(x, y) = Vec2f(bu, bv);
                continue;
            }
            if (cu > 0 && cu < 2 * kSearch) {
                const float l = ssd[cv][cu - 1], m = ssd[cv][cu], r = ssd[cv][cu + 1];
                const float den = l - 2 * m + r;
                if (den > 1e-12f) su = std::clamp(0.5f * (l - r) / den, -0.5f, 0.5f);
            }
            if (cv > 0 && cv < 2 * kSearch) {
                const float l = ssd[cv - 1][cu], m = ssd[cv][cu], r = ssd[cv + 1][cu];
                const float den = l - 2 * m + r;
                if (den > 1e-12f) sv = std::clamp(0.5f * (l - r) / den, -0.5f, 0.5f);
            }
            out(x, y) = Vec2f(bu + su, bv + sv);
        }
    });
    return out;
}

VectorMap pyramid_flow(const GrayImage& a, const GrayImage& b) {
    std::vector<GrayImage> pa{a}, pb{b};
    for (int l = 1; l < 3 && pa.back().width() >= 18 && pa.back().height() >= 18; ++l) {
        pa.push_back(half(pa.back()));
        pb.push_back(half(pb.back()));
    }
    VectorMap flow(pa.back().width(), pa.back().height(), Vec2f::Zero());
    for (int l = static_cast<int>(pa.size()) - 1; l >= 0; --l) {
        if (flow.width() != pa[l].width()) {
            VectorMap up = resize_bilinear(flow, pa[l].width(), pa[l].height());
            for (int y = 0; y < up.height(); ++y)
                for (int x = 0; x < up.width(); ++x) up(x, y) *= 2.0f;
            flow = std::move(up);
        }
        flow = block_match(pa[l], pb[l], flow);
    }
    return flow;
}

}  // namespace

void prior_flow(const GrayImage& cur, const GrayImage& next, VectorMap* flow, MaskMap* valid) {
    *flow = pyramid_flow(cur, next);
    const VectorMap backward = pyramid_flow(next, cur);
    *valid = MaskMap(cur.width(), cur.height(), 0);
    for (int y = 0; y < cur.height(); ++y)
        for (int x = 0; x < cur.width(); ++x) {
            const Vec2f f = (*flow)(x, y);
            const double qx = x + f.x(), qy = y + f.y();
            if (!cur.inside(qx, qy)) continue;
            const Vec2f b = sample_bilinear(backward, qx, qy);
            if ((f + b).norm() <= 1.0f) (*valid)(x, y) = 1;
        }
}

BinaryMrf build_seg_mrf(const ScalarMap& unary, const PottsWeights& potts,
                        const std::vector<BinaryMrf::Constraint>& constraints) {
    const int w = unary.width(), h = unary.height();
    BinaryMrf mrf(w * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int idx = y * w + x;
            mrf.set_unary(idx, unary(x, y), 0.0);  // costs charge the background label
            if (!constraints.empty()) mrf.set_constraint(idx, constraints[idx]);
            if (x + 1 < w && potts.e(x, y) > 0) mrf.add_edge(idx, idx + 1, potts.e(x, y));
            if (y + 1 < h && potts.s(x, y) > 0) mrf.add_edge(idx, idx + w, potts.s(x, y));
            if (x + 1 < w && y + 1 < h && potts.se(x, y) > 0)
                mrf.add_edge(idx, idx + w + 1, potts.se(x, y));
            if (x > 0 && y + 1 < h && potts.sw(x, y) > 0)
                mrf.add_edge(idx, idx + w - 1, potts.sw(x, y));
        }
    return mrf;
}

double segmentation_energy(const MaskMap& labels, const ScalarMap& unary,
                           const PottsWeights& potts) {
    const int w = labels.width(), h = labels.height();
    double e = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!labels(x, y)) e += unary(x, y);
            if (x + 1 < w && labels(x, y) != labels(x + 1, y)) e += potts.e(x, y);
            if (y + 1 < h && labels(x, y) != labels(x, y + 1)) e += potts.s(x, y);
            if (x + 1 < w && y + 1 < h && labels(x, y) != labels(x + 1, y + 1)) e += potts.se(x, y);
            if (x > 0 && y + 1 < h && labels(x, y) != labels(x - 1, y + 1)) e += potts.sw(x, y);
        }
    return e;
}

SegmentResult segment(const ColorImage& img, const ScalarMap& static_unary,
                      const PottsWeights& potts, const SegParams& params, const MaskMap* seed) {
    const int w = img.width(), h = img.height();
    SegmentResult out;
    out.mask = MaskMap(w, h, 0);
    if (seed) {
        out.mask = *seed;
    } else {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.mask(x, y) = static_unary(x, y) > 0 ? 1 : 0;
    }

    std::unique_ptr<GraphCutSolver> solver;
    double prev_energy = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < params.grabcut_iterations; ++iter) {
        const ColorModel model = ColorModel::fit(img, out.mask);
        const ScalarMap col = color_term(img, model, params.lambda_col);
        ScalarMap unary(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) unary(x, y) = static_unary(x, y) + col(x, y);

        const BinaryMrf mrf = build_seg_mrf(unary, potts);
        MinCutResult cut;
        if (!solver) {
            solver = std::make_unique<GraphCutSolver>(mrf);
            cut = solver->solve();
        } else {
            cut = solver->resolve(mrf);
        }

        MaskMap labels(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) labels(x, y) = cut.labels[y * w + x];
        const double energy = segmentation_energy(labels, unary, potts);
        if (energy > prev_energy) break;  // alternation guard: never accept an increase
        const bool unchanged = labels == out.mask;
        out.mask = std::move(labels);
        out.model = model;
        out.energies.push_back(energy);
        prev_energy = energy;
        if (unchanged) break;
    }
    return out;
}

}  // namespace sf
