#include "sf/flow.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "sf/parallel.h"

namespace sf {

int connected_components(const MaskMap& mask, Image<int32_t>* labels) {
    const int w = mask.width(), h = mask.height();
    *labels = Image<int32_t>(w, h, 0);
    int next_label = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask(x, y) || (*labels)(x, y)) continue;
            ++next_label;
            stack.push_back({x, y});
            (*labels)(x, y) = next_label;
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        if (!mask(nx, ny) || (*labels)(nx, ny)) continue;
                        (*labels)(nx, ny) = next_label;
                        stack.push_back({nx, ny});
                    }
            }
        }
    return next_label;
}

namespace {

struct Box {
    int u_min = 0, u_max = -1, v_min = 0, v_max = -1;
    bool empty() const { return u_max < u_min; }
    void include(int u, int v) {
        if (empty()) {
            u_min = u_max = u;
            v_min = v_max = v;
        } else {
            u_min = std::min(u_min, u);
            u_max = std::max(u_max, u);
            v_min = std::min(v_min, v);
            v_max = std::max(v_max, v);
        }
    }
    void merge(const Box& o) {
        if (o.empty()) return;
        include(o.u_min, o.v_min);
        include(o.u_max, o.v_max);
    }
};

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// Bounding box of the pruned 2D histogram (bins with count >= max/10).
Box histogram_box(const MaskMap& component, const VectorMap& field, const MaskMap* valid,
                  int bin) {
    std::map<std::pair<int, int>, int> hist;
    int max_count = 0;
    for (int y = 0; y < component.height(); ++y)
        for (int x = 0; x < component.width(); ++x) {
            if (!component(x, y)) continue;
            if (valid && !(*valid)(x, y)) continue;
            const int bu = floor_div(static_cast<int>(std::floor(field(x, y).x())), bin);
            const int bv = floor_div(static_cast<int>(std::floor(field(x, y).y())), bin);
            max_count = std::max(max_count, ++hist[{bu, bv}]);
        }
    Box box;
    for (const auto& [key, count] : hist) {
        if (10 * count < max_count) continue;
        box.include(key.first * bin, key.second * bin);
        box.include(key.first * bin + bin - 1, key.second * bin + bin - 1);
    }
    return box;
}

LabelRange cap_axis(int lo, int hi, int side) {
    if (hi - lo + 1 > side) {
        const int c = (lo + hi) / 2;
        lo = c - side / 2;
        hi = lo + side - 1;
    }
    return {lo, hi};
}

}  // namespace

FlowRange estimate_range(const MaskMap& component, const std::vector<FeatureMatch>& features,
                         const VectorMap& prior, const MaskMap& prior_valid,
                         const VectorMap& rigid, const FlowParams& params) {
    Box box;
    for (const auto& m : features) {
        const int x = static_cast<int>(std::lround(m.p.x()));
        const int y = static_cast<int>(std::lround(m.p.y()));
        if (!component.inside(x, y) || !component(x, y)) continue;
        const Vec2f d = m.q - m.p;
        box.include(static_cast<int>(std::floor(d.x())), static_cast<int>(std::floor(d.y())));
        box.include(static_cast<int>(std::ceil(d.x())), static_cast<int>(std::ceil(d.y())));
    }
    if (!prior.empty()) box.merge(histogram_box(component, prior, &prior_valid, params.histogram_bin));
    if (!rigid.empty()) box.merge(histogram_box(component, rigid, nullptr, params.histogram_bin));
    if (box.empty()) {
        box = {-params.fallback_range, params.fallback_range, -params.fallback_range,
               params.fallback_range};
    } else {
        box.u_min -= params.range_pad;
        box.u_max += params.range_pad;
        box.v_min -= params.range_pad;
        box.v_max += params.range_pad;
    }
    FlowRange r;
    r.u = cap_axis(box.u_min, box.u_max, params.max_range_side);
    r.v = cap_axis(box.v_min, box.v_max, params.max_range_side);
    return r;
}

ScalarMap geodesic_kernel(const ScalarMap& disparity, int cx, int cy, int radius, float kappa) {
    const int side = 2 * radius + 1;
    constexpr float kInf = std::numeric_limits<float>::infinity();
    ScalarMap dist(side, side, kInf);
    dist(radius, radius) = 0.0f;

    auto metric = [&](int ax, int ay, int bx, int by, float step) {
        return std::abs(disparity(ax, ay) - disparity(bx, by)) + step / 100.0f;
    };
    constexpr float kDiag = 1.41421356f;
    auto relax = [&](int wx, int wy, int dx, int dy, float step) {
        const int nx = wx + dx, ny = wy + dy;
        if (nx < 0 || nx >= side || ny < 0 || ny >= side) return;
        const int ix = cx + wx - radius, iy = cy + wy - radius;
        const int jx = ix + dx, jy = iy + dy;
        if (!disparity.inside(ix, iy) || !disparity.inside(jx, jy)) return;
        if (dist(nx, ny) == kInf) return;
        dist(wx, wy) = std::min(dist(wx, wy), dist(nx, ny) + metric(ix, iy, jx, jy, step));
    };
    // Two-pass chamfer approximation of the shortest geodesic path.
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            relax(x, y, -1, 0, 1.0f);
            relax(x, y, 0, -1, 1.0f);
            relax(x, y, -1, -1, kDiag);
            relax(x, y, 1, -1, kDiag);
        }
    for (int y = side - 1; y >= 0; --y)
        for (int x = side - 1; x >= 0; --x) {
            relax(x, y, 1, 0, 1.0f);
            relax(x, y, 0, 1, 1.0f);
            relax(x, y, 1, 1, kDiag);
            relax(x, y, -1, 1, kDiag);
        }

    ScalarMap weights(side, side, 0.0f);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            if (dist(x, y) != kInf) weights(x, y) = std::exp(-dist(x, y) / kappa);
    return weights;
}

namespace {

float weighted_median(std::vector<std::pair<float, float>>& vals /* (value, weight) */) {
    std::sort(vals.begin(), vals.end());
    double total = 0;
    for (const auto& v : vals) total += v.second;
    double acc = 0;
    for (const auto& v : vals) {
        acc += v.second;
        if (2 * acc >= total) return v.first;
    }
    return vals.back().first;
}

float plain_median(std::vector<float>& vals) {
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
    return vals[vals.size() / 2];
}

MaskMap dilate3(const MaskMap& m) {
    MaskMap out(m.width(), m.height(), 0);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            if (!m(x, y)) continue;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (m.inside(x + dx, y + dy)) out(x + dx, y + dy) = 1;
        }
    return out;
}

}  // namespace

FlowResult nonrigid_flow(const GrayImage& cur, const GrayImage& next, const MaskMap& mask,
                         const VectorMap& rigid, const ScalarMap& disparity,
                         const std::vector<FeatureMatch>& features, const VectorMap& prior,
                         const MaskMap& prior_valid, const FlowParams& params,
                         const SgmEdgeWeights& weights) {
    const int w = cur.width(), h = cur.height();
    FlowResult out;
    out.flow = rigid;
    out.valid = MaskMap(w, h, 0);

    Image<int32_t> comp_labels;
    const int num_components = connected_components(mask, &comp_labels);
    if (num_components == 0) return out;

    for (int c = 1; c <= num_components; ++c) {
        MaskMap comp(w, h, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) comp(x, y) = comp_labels(x, y) == c ? 1 : 0;

        const FlowRange range = estimate_range(comp, features, prior, prior_valid, rigid, params);
        const CostVolume fwd_vol = flow_cost_volume(cur, next, range, params.tau, &comp);
        const Sgm2dResult fwd = sgm_2d(fwd_vol, range, params.sgm, weights);

        // Mask in the next frame: forward scatter plus one dilation.
        MaskMap warped(w, h, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!comp(x, y)) continue;
                const int tx = static_cast<int>(std::lround(x + fwd.refined(x, y).x()));
                const int ty = static_cast<int>(std::lround(y + fwd.refined(x, y).y()));
                if (tx >= 0 && tx < w && ty >= 0 && ty < h) warped(tx, ty) = 1;
            }
        warped = dilate3(warped);

        FlowRange back;
        back.u = {-range.u.max, -range.u.min};
        back.v = {-range.v.max, -range.v.min};
        const CostVolume bwd_vol = flow_cost_volume(next, cur, back, params.tau, &warped);
        const Sgm2dResult bwd = sgm_2d(bwd_vol, back, params.sgm, {});

        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!comp(x, y)) continue;
                const Vec2f f = fwd.refined(x, y);
                out.flow(x, y) = f;
                const int tx = static_cast<int>(std::lround(x + f.x()));
                const int ty = static_cast<int>(std::lround(y + f.y()));
                if (tx < 0 || tx >= w || ty < 0 || ty >= h || !warped(tx, ty)) continue;
                if ((f + bwd.refined(tx, ty)).norm() <= params.bidir_tol) out.valid(x, y) = 1;
            }
    }

    // Hole filling by geodesic weighted median; background vectors (F_rig) and
    // valid foreground vectors are the known set.
    VectorMap known_field = rigid;
    MaskMap known(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask(x, y)) {
                known(x, y) = 1;
            } else if (out.valid(x, y)) {
                known(x, y) = 1;
                known_field(x, y) = out.flow(x, y);
            }
        }
    VectorMap filled = known_field;
    const int r = params.median_radius;
    parallel_rows(h, [&](int y) {
        std::vector<std::pair<float, float>> us, vs;
        for (int x = 0; x < w; ++x) {
            if (!mask(x, y) || out.valid(x, y)) continue;
            const ScalarMap kernel = geodesic_kernel(disparity, x, y, r, params.kappa_geo);
            us.clear();
            vs.clear();
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h || !known(nx, ny)) continue;
                    const float kw = kernel(dx + r, dy + r);
                    if (kw <= 0) continue;
                    us.push_back({known_field(nx, ny).x(), kw});
                    vs.push_back({known_field(nx, ny).y(), kw});
                }
            if (!us.empty()) filled(x, y) = Vec2f(weighted_median(us), weighted_median(vs));
        }
    });

    // Final 5x5 plain median over the foreground.
    out.flow = filled;
    parallel_rows(h, [&](int y) {
        std::vector<float> us, vs;
        for (int x = 0; x < w; ++x) {
            if (!mask(x, y)) continue;
            us.clear();
            vs.clear();
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    us.push_back(filled(nx, ny).x());
                    vs.push_back(filled(nx, ny).y());
                }
            out.flow(x, y) = Vec2f(plain_median(us), plain_median(vs));
        }
    });
    return out;
}

}  // namespace sf
