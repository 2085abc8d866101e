#include "sf/sgm.h"

#include <cmath>
#include <cstring>
#include <limits>

namespace sf {

namespace {

constexpr uint16_t kMaxCost16 = std::numeric_limits<uint16_t>::max();

uint16_t quantize(float c) {
    const long v = std::lround(static_cast<double>(c) * kSgmCostScale);
    return static_cast<uint16_t>(std::clamp(v, 0L, static_cast<long>(kMaxCost16)));
}

struct Direction {
    int dx, dy;
    bool diagonal() const { return dx != 0 && dy != 0; }
};

const Direction kDirs8[8] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};

// Color edge weight of the edge between p and its predecessor p - r.
float edge_weight(const SgmEdgeWeights& w, int x, int y, const Direction& r) {
    if (w.empty()) return 0.0f;
    if (r.dy == 0) return r.dx > 0 ? w.e(x - 1, y) : w.e(x, y);
    if (r.dx == 0) return r.dy > 0 ? w.s(x, y - 1) : w.s(x, y);
    if (r.dx == r.dy) return r.dx > 0 ? w.se(x - 1, y - 1) : w.se(x, y);
    // r = (1,-1): predecessor is (x-1, y+1); r = (-1,1): predecessor is (x+1, y-1).
    return r.dx > 0 ? w.sw(x, y) : w.sw(x + 1, y - 1);
}

}  // namespace

std::pair<float, float> sgm_penalties(bool diagonal, float color_edge_weight, const SgmParams& p) {
    const float p1 = p.lambda / (diagonal ? std::sqrt(2.0f) : 1.0f);
    return {p1, p1 * (p.beta + p.gamma * color_edge_weight)};
}

SgmEdgeWeights color_edge_weights(const ColorImage& img) {
    const int w = img.width(), h = img.height();
    SgmEdgeWeights out{ScalarMap(w, h, 0.0f), ScalarMap(w, h, 0.0f), ScalarMap(w, h, 0.0f),
                       ScalarMap(w, h, 0.0f)};
    double sum = 0;
    size_t n = 0;
    auto sqdist = [&](int x0, int y0, int x1, int y1) {
        return static_cast<double>((img(x0, y0) - img(x1, y1)).squaredNorm());
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w) { sum += sqdist(x, y, x + 1, y); ++n; }
            if (y + 1 < h) { sum += sqdist(x, y, x, y + 1); ++n; }
            if (x + 1 < w && y + 1 < h) { sum += sqdist(x, y, x + 1, y + 1); ++n; }
            if (x > 0 && y + 1 < h) { sum += sqdist(x, y, x - 1, y + 1); ++n; }
        }
    const double kappa = std::max(2.0 * sum / std::max<size_t>(n, 1), 1e-6);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w) out.e(x, y) = static_cast<float>(std::exp(-sqdist(x, y, x + 1, y) / kappa));
            if (y + 1 < h) out.s(x, y) = static_cast<float>(std::exp(-sqdist(x, y, x, y + 1) / kappa));
            if (x + 1 < w && y + 1 < h)
                out.se(x, y) = static_cast<float>(std::exp(-sqdist(x, y, x + 1, y + 1) / kappa));
            if (x > 0 && y + 1 < h)
                out.sw(x, y) = static_cast<float>(std::exp(-sqdist(x, y, x - 1, y + 1) / kappa));
        }
    return out;
}

double subpixel_offset(double s_minus, double s_center, double s_plus) {
    const double denom = 2.0 * (s_minus - 2.0 * s_center + s_plus);
    if (denom <= 0.0) return 0.0;
    return std::clamp((s_minus - s_plus) / denom, -0.5, 0.5);
}

namespace {

// Shared scan-line aggregation. labels = total label count; neighbor_min
// computes min over the P1 neighborhood of the previous pixel's normalized
// costs. agg accumulates normalized costs over all directions.
template <typename NeighborMin>
void aggregate_direction(const std::vector<uint16_t>& cost16, int w, int h, int labels,
                         const Direction& r, uint16_t p1_16, const SgmParams& params,
                         const SgmEdgeWeights& weights, std::vector<uint32_t>& agg,
                         const NeighborMin& neighbor_min) {
    const float p1f = params.lambda / (r.diagonal() ? std::sqrt(2.0f) : 1.0f);
    std::vector<uint16_t> prev_row(static_cast<size_t>(w) * labels, 0);
    std::vector<uint16_t> cur_row(static_cast<size_t>(w) * labels, 0);
    std::vector<uint16_t> tmp(labels);
    std::vector<uint8_t> prev_valid(w, 0), cur_valid(w, 0);

    const int y0 = r.dy >= 0 ? 0 : h - 1;
    const int y_step = r.dy >= 0 ? 1 : -1;
    const int x0 = r.dx >= 0 ? 0 : w - 1;
    const int x_step = r.dx >= 0 ? 1 : -1;

    for (int yi = 0; yi < h; ++yi) {
        const int y = y0 + yi * y_step;
        std::fill(cur_valid.begin(), cur_valid.end(), 0);
        for (int xi = 0; xi < w; ++xi) {
            const int x = x0 + xi * x_step;
            const uint16_t* c = &cost16[(static_cast<size_t>(y) * w + x) * labels];
            uint16_t* out = &cur_row[static_cast<size_t>(x) * labels];
            const int qx = x - r.dx, qy = y - r.dy;
            const bool has_prev = qx >= 0 && qx < w && qy >= 0 && qy < h &&
                                  (r.dy == 0 ? cur_valid[qx] : prev_valid[qx]);
            uint32_t row_min = kMaxCost16;
            if (!has_prev) {
                for (int d = 0; d < labels; ++d) {
                    out[d] = c[d];
                    row_min = std::min<uint32_t>(row_min, out[d]);
                }
            } else {
                const uint16_t* prev = r.dy == 0 ? &cur_row[static_cast<size_t>(qx) * labels]
                                                 : &prev_row[static_cast<size_t>(qx) * labels];
                const float wcol = edge_weight(weights, x, y, r);
                const uint32_t p2_16 =
                    std::min<long>(std::lround(p1f * (params.beta + params.gamma * wcol) *
                                               kSgmCostScale),
                                   kMaxCost16);
                neighbor_min(prev, p1_16, tmp.data());
                for (int d = 0; d < labels; ++d) {
                    uint32_t m = std::min<uint32_t>(prev[d], p2_16);
                    m = std::min<uint32_t>(m, tmp[d]);
                    const uint32_t l = c[d] + m;
                    out[d] = static_cast<uint16_t>(std::min<uint32_t>(l, kMaxCost16));
                    row_min = std::min<uint32_t>(row_min, out[d]);
                }
            }
            uint32_t* a = &agg[(static_cast<size_t>(y) * w + x) * labels];
            for (int d = 0; d < labels; ++d) {
                out[d] = static_cast<uint16_t>(out[d] - row_min);
                a[d] += out[d];
            }
            cur_valid[x] = 1;
        }
        if (r.dy != 0) {
            std::swap(prev_row, cur_row);
            std::swap(prev_valid, cur_valid);
        }
    }
}

std::vector<uint16_t> quantize_volume(const CostVolume& vol) {
    const size_t n = static_cast<size_t>(vol.width()) * vol.height() * vol.labels();
    std::vector<uint16_t> out(n);
    const float* src = vol.slice(0, 0);
    for (size_t i = 0; i < n; ++i) out[i] = quantize(src[i]);
    return out;
}

}  // namespace

Sgm1dResult sgm_1d(const CostVolume& vol, const SgmParams& params, const SgmEdgeWeights& weights) {
    const int w = vol.width(), h = vol.height(), labels = vol.labels();
    const std::vector<uint16_t> cost16 = quantize_volume(vol);
    std::vector<uint32_t> agg(cost16.size(), 0);

    const int ndirs = params.directions == 2 ? 2 : 8;
    for (int i = 0; i < ndirs; ++i) {
        const Direction& r = kDirs8[i];
        const uint16_t p1_16 = quantize(params.lambda / (r.diagonal() ? std::sqrt(2.0f) : 1.0f));
        aggregate_direction(cost16, w, h, labels, r, p1_16, params, weights, agg,
                            [labels](const uint16_t* prev, uint16_t p1, uint16_t* out) {
                                for (int d = 0; d < labels; ++d) {
                                    uint32_t m = kMaxCost16;
                                    if (d > 0) m = std::min<uint32_t>(m, prev[d - 1] + p1);
                                    if (d + 1 < labels) m = std::min<uint32_t>(m, prev[d + 1] + p1);
                                    out[d] = static_cast<uint16_t>(std::min<uint32_t>(m, kMaxCost16));
                                }
                            });
    }

    Sgm1dResult res{Image<int16_t>(w, h, 0), ScalarMap(w, h, 0.0f), ScalarMap(w, h, 0.0f)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const uint32_t* a = &agg[(static_cast<size_t>(y) * w + x) * labels];
            const uint16_t* c = &cost16[(static_cast<size_t>(y) * w + x) * labels];
            int64_t best = std::numeric_limits<int64_t>::max();
            int best_d = 0;
            uint32_t umin = std::numeric_limits<uint32_t>::max();
            for (int d = 0; d < labels; ++d) {
                // Remove the data-term overcounting across directions.
                const int64_t sc = static_cast<int64_t>(a[d]) -
                                   static_cast<int64_t>(ndirs - 1) * c[d];
                if (sc < best) {
                    best = sc;
                    best_d = d;
                }
                umin = std::min(umin, a[d]);
            }
            res.labels(x, y) = static_cast<int16_t>(best_d);
            res.uncertainty(x, y) = static_cast<float>(umin) / kSgmCostScale;
            double refined = best_d;
            if (best_d > 0 && best_d + 1 < labels) {
                auto sc = [&](int d) {
                    return static_cast<double>(a[d]) - static_cast<double>(ndirs - 1) * c[d];
                };
                refined += subpixel_offset(sc(best_d - 1), sc(best_d), sc(best_d + 1));
            }
            res.refined(x, y) = static_cast<float>(refined);
        }
    }
    return res;
}

Sgm2dResult sgm_2d(const CostVolume& vol, const FlowRange& range, const SgmParams& params,
                   const SgmEdgeWeights& weights) {
    const int w = vol.width(), h = vol.height(), labels = vol.labels();
    const int nu = range.u.count(), nv = range.v.count();
    const std::vector<uint16_t> cost16 = quantize_volume(vol);
    std::vector<uint32_t> agg(cost16.size(), 0);
    std::vector<uint16_t> minbuf(labels);

    const int ndirs = params.directions == 2 ? 2 : 8;
    for (int i = 0; i < ndirs; ++i) {
        const Direction& r = kDirs8[i];
        const uint16_t p1_16 = quantize(params.lambda / (r.diagonal() ? std::sqrt(2.0f) : 1.0f));
        aggregate_direction(
            cost16, w, h, labels, r, p1_16, params, weights, agg,
            [nu, nv, &minbuf](const uint16_t* prev, uint16_t p1, uint16_t* out) {
                // 3x3 min filter over the label grid (separable).
                for (int v = 0; v < nv; ++v) {
                    const uint16_t* row = prev + v * nu;
                    uint16_t* trow = minbuf.data() + v * nu;
                    for (int u = 0; u < nu; ++u) {
                        uint16_t m = row[u];
                        if (u > 0) m = std::min(m, row[u - 1]);
                        if (u + 1 < nu) m = std::min(m, row[u + 1]);
                        trow[u] = m;
                    }
                }
                for (int v = 0; v < nv; ++v) {
                    for (int u = 0; u < nu; ++u) {
                        uint32_t m = minbuf[v * nu + u];
                        if (v > 0) m = std::min<uint32_t>(m, minbuf[(v - 1) * nu + u]);
                        if (v + 1 < nv) m = std::min<uint32_t>(m, minbuf[(v + 1) * nu + u]);
                        out[v * nu + u] =
                            static_cast<uint16_t>(std::min<uint32_t>(m + p1, kMaxCost16));
                    }
                }
            });
    }

    Sgm2dResult res{Image<Eigen::Vector2i>(w, h, Eigen::Vector2i::Zero()), VectorMap(w, h),
                    ScalarMap(w, h, 0.0f)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const uint32_t* a = &agg[(static_cast<size_t>(y) * w + x) * labels];
            const uint16_t* c = &cost16[(static_cast<size_t>(y) * w + x) * labels];
            auto sc = [&](int l) {
                return static_cast<double>(a[l]) - static_cast<double>(ndirs - 1) * c[l];
            };
            double best = std::numeric_limits<double>::max();
            int best_l = 0;
            uint32_t umin = std::numeric_limits<uint32_t>::max();
            for (int l = 0; l < labels; ++l) {
                const double s = sc(l);
                if (s < best) {
                    best = s;
                    best_l = l;
                }
                umin = std::min(umin, a[l]);
            }
            const int lu = best_l % nu, lv = best_l / nu;
            res.labels(x, y) = Eigen::Vector2i(range.u.min + lu, range.v.min + lv);
            res.uncertainty(x, y) = static_cast<float>(umin) / kSgmCostScale;
            double ru = range.u.min + lu, rv = range.v.min + lv;
            if (lu > 0 && lu + 1 < nu)
                ru += subpixel_offset(sc(best_l - 1), sc(best_l), sc(best_l + 1));
            if (lv > 0 && lv + 1 < nv)
                rv += subpixel_offset(sc(best_l - nu), sc(best_l), sc(best_l + nu));
            res.refined(x, y) = Vec2f(static_cast<float>(ru), static_cast<float>(rv));
        }
    }
    return res;
}

}  // namespace sf
