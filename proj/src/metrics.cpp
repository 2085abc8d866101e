#include "sf/metrics.h"

#include <cmath>
#include <stdexcept>

namespace sf {

bool is_outlier(double epe, double gt_magnitude) {
    return !(epe < 3.0 || epe < 0.05 * gt_magnitude);
}

ScalarMap derive_d2(const ScalarMap& est_d1, const MaskMap& est_mask, const Pose& est_pose,
                    const StereoRig& rig, const ScalarMap& gt_d2) {
    ScalarMap out(est_d1.width(), est_d1.height(), 0.0f);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            if (!est_mask.empty() && est_mask(x, y)) {
                out(x, y) = gt_d2(x, y);
                continue;
            }
            double td = 0;
            rigid_warp(Vec2d(x, y), est_d1(x, y), rig, est_pose, &td);
            if (std::isfinite(td) && td > 0) out(x, y) = static_cast<float>(td);
        }
    return out;
}

SceneFlowMetrics evaluate(const EvalMaps& maps) {
    const int w = maps.gt_d1.width(), h = maps.gt_d1.height();
    auto check = [&](int mw, int mh, const char* name) {
        if (mw != 0 && (mw != w || mh != h))
            throw std::invalid_argument(std::string("evaluate: size mismatch in ") + name);
    };
    check(maps.est_d1.width(), maps.est_d1.height(), "est_d1");
    check(maps.est_d2.width(), maps.est_d2.height(), "est_d2");
    check(maps.est_flow.width(), maps.est_flow.height(), "est_flow");
    check(maps.gt_d2.width(), maps.gt_d2.height(), "gt_d2");
    check(maps.gt_flow.width(), maps.gt_flow.height(), "gt_flow");
    check(maps.gt_flow_valid.width(), maps.gt_flow_valid.height(), "gt_flow_valid");
    check(maps.gt_mask.width(), maps.gt_mask.height(), "gt_mask");

    struct Counts {
        size_t valid_bg = 0, valid_fg = 0, out_bg = 0, out_fg = 0;
        void add(bool fg, bool outlier) {
            (fg ? valid_fg : valid_bg) += 1;
            if (outlier) (fg ? out_fg : out_bg) += 1;
        }
        RateSplit rates() const {
            RateSplit r;
            r.bg = valid_bg ? 100.0 * out_bg / valid_bg : 0.0;
            r.fg = valid_fg ? 100.0 * out_fg / valid_fg : 0.0;
            const size_t v = valid_bg + valid_fg, o = out_bg + out_fg;
            r.all = v ? 100.0 * o / v : 0.0;
            return r;
        }
    } c_d1, c_d2, c_fl, c_sf;

    SceneFlowMetrics m;
    double d_err_sum = 0, f_err_sum = 0;
    size_t d_count = 0, f_count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool fg = !maps.gt_mask.empty() && maps.gt_mask(x, y);
            const bool has_d1 = maps.gt_d1(x, y) > 0;
            const bool has_d2 = !maps.gt_d2.empty() && maps.gt_d2(x, y) > 0;
            const bool has_fl = !maps.gt_flow.empty() &&
                                (maps.gt_flow_valid.empty() || maps.gt_flow_valid(x, y));
            if (!has_d1 && !has_d2 && !has_fl) continue;
            ++m.evaluated;

            bool ok_d1 = true, ok_d2 = true, ok_fl = true;
            if (has_d1) {
                const double e = std::abs(maps.est_d1(x, y) - maps.gt_d1(x, y));
                ok_d1 = !is_outlier(e, std::abs(maps.gt_d1(x, y)));
                c_d1.add(fg, !ok_d1);
                d_err_sum += e;
                ++d_count;
            }
            if (has_d2 && !maps.est_d2.empty()) {
                const double e = std::abs(maps.est_d2(x, y) - maps.gt_d2(x, y));
                ok_d2 = !is_outlier(e, std::abs(maps.gt_d2(x, y)));
                c_d2.add(fg, !ok_d2);
            }
            if (has_fl && !maps.est_flow.empty()) {
                const double e = (maps.est_flow(x, y) - maps.gt_flow(x, y)).norm();
                ok_fl = !is_outlier(e, maps.gt_flow(x, y).norm());
                c_fl.add(fg, !ok_fl);
                f_err_sum += e;
                ++f_count;
            }
            if (has_d1 && has_d2 && has_fl && !maps.est_d2.empty() && !maps.est_flow.empty())
                c_sf.add(fg, !(ok_d1 && ok_d2 && ok_fl));
        }
    m.d1 = c_d1.rates();
    m.d2 = c_d2.rates();
    m.fl = c_fl.rates();
    m.sf = c_sf.rates();
    m.epe_disparity = d_count ? d_err_sum / d_count : 0.0;
    m.epe_flow = f_count ? f_err_sum / f_count : 0.0;
    return m;
}

}  // namespace sf
