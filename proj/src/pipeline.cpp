#include "sf/pipeline.h"

#include <cmath>
#include <stdexcept>

namespace sf {

Profile Profile::general() { return {}; }

Profile Profile::road() {
    Profile p;
    p.name = "road";
    p.seg.ground_prior = true;
    p.forward_candidates = true;
    return p;
}

Profile Profile::sintel() {
    Profile p;
    p.name = "sintel";
    p.seg.lambda_col = 1.5f;
    p.seg.tau_ncc = 0.25f;
    return p;
}

Profile Profile::by_name(const std::string& name) {
    if (name == "general") return general();
    if (name == "road") return road();
    if (name == "sintel") return sintel();
    throw std::invalid_argument("unknown profile: " + name);
}

StereoRig scale_rig(const StereoRig& rig, int new_width, int new_height) {
    StereoRig out = rig;
    const double sx = static_cast<double>(new_width) / rig.width;
    const double sy = static_cast<double>(new_height) / rig.height;
    out.intrinsics.f = rig.intrinsics.f * sx;
    out.intrinsics.cx = rig.intrinsics.cx * sx;
    out.intrinsics.cy = rig.intrinsics.cy * sy;
    out.width = new_width;
    out.height = new_height;
    return out;
}

namespace {

VectorMap resize_flow(const VectorMap& flow, int new_w, int new_h, float vector_scale) {
    VectorMap out = resize_bilinear(flow, new_w, new_h);
    for (int y = 0; y < new_h; ++y)
        for (int x = 0; x < new_w; ++x) out(x, y) *= vector_scale;
    return out;
}

ScalarMap resize_disparity(const ScalarMap& d, int new_w, int new_h, float scale) {
    ScalarMap out = resize_bilinear(d, new_w, new_h);
    for (int y = 0; y < new_h; ++y)
        for (int x = 0; x < new_w; ++x) out(x, y) *= scale;
    return out;
}

bool any_foreground(const MaskMap& m) {
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m(x, y)) return true;
    return false;
}

int scaled(int v, double s) { return std::max(2, static_cast<int>(std::lround(v * s))); }

}  // namespace

FrameOutput process_frame(const ColorImage& left, const ColorImage& right,
                          const ColorImage& next_left, const ColorImage& next_right,
                          const StereoRig& rig, const Profile& profile, FrameState* state,
                          const VectorMap* external_prior_flow,
                          const MaskMap* external_prior_valid) {
    const int in_w = left.width(), in_h = left.height();
    if (right.width() != in_w || next_left.width() != in_w || next_right.width() != in_w ||
        right.height() != in_h || next_left.height() != in_h || next_right.height() != in_h)
        throw std::invalid_argument("process_frame: image size mismatch");

    const int ww = scaled(in_w, profile.working_scale);
    const int wh = scaled(in_h, profile.working_scale);
    const ColorImage cur_c = resize_bilinear(left, ww, wh);
    const ColorImage next_c = resize_bilinear(next_left, ww, wh);
    const GrayImage cur = to_gray(cur_c);
    const GrayImage cur_r = to_gray(resize_bilinear(right, ww, wh));
    const GrayImage next = to_gray(next_c);
    const GrayImage next_r = to_gray(resize_bilinear(next_right, ww, wh));
    const StereoRig wrig = scale_rig(rig, ww, wh);
    const float up = static_cast<float>(in_w) / ww;

    // Stage 1: binocular stereo.
    const SgmEdgeWeights weights = color_edge_weights(cur_c);
    const StereoOutput bino = binocular(cur, cur_r, profile.stereo, weights);

    // Stage 2: ego-motion with multi-hypothesis initialization.
    ScalarMap mask_prior_map;
    if (state->has_prev && !state->prev_mask.empty() && any_foreground(state->prev_mask))
        mask_prior_map = make_mask_prior(state->prev_mask, state->prev_flow);
    ScalarMap vo_weights(ww, wh, 1.0f);
    for (int y = 0; y < wh; ++y)
        for (int x = 0; x < ww; ++x) {
            if (bino.occlusion(x, y))
                vo_weights(x, y) = 0.0f;
            else if (!mask_prior_map.empty() && mask_prior_map(x, y) > 0.5f)
                vo_weights(x, y) = 0.125f;  // predicted moving-object pixel
        }

    std::vector<PoseHypothesis> hypotheses;
    hypotheses.push_back({Pose::identity(), PoseSource::kIdentity, 0.0});
    if (state->has_prev) hypotheses.push_back({state->prev_pose, PoseSource::kPrevious, 0.0});
    const FeatureInitResult feats =
        feature_init(cur, next, bino.disparity, wrig, &bino.occlusion);
    if (feats.ok) hypotheses.push_back({feats.pose, PoseSource::kFeature, 0.0});
    if (profile.forward_candidates) {
        const double depth = median_depth(bino.disparity, wrig);
        for (const Pose& p : forward_translation_candidates(profile.num_forward_candidates, depth))
            hypotheses.push_back({p, PoseSource::kForwardTranslation, 0.0});
    }
    const Pose pose =
        select_pose(hypotheses, cur, next, bino.disparity, vo_weights, wrig, profile.vo);

    // Stage 3: epipolar refinement.
    TemporalFrames temporal;
    if (state->has_prev) {
        temporal.prev_left = &state->prev_left;
        temporal.prev_right = &state->prev_right;
        temporal.pose_prev = state->prev_pose;
    }
    temporal.next_left = &next;
    temporal.next_right = &next_r;
    temporal.pose_cur = pose;
    const StereoOutput refined =
        epipolar_refine(cur, cur_r, bino, temporal, wrig, profile.stereo, weights);
    const ScalarMap& disparity = refined.disparity;

    FrameOutput out;
    out.pose = pose;
    const VectorMap f_rig = rigid_flow(disparity, wrig, pose);
    VectorMap f_final = f_rig;
    MaskMap s_final(ww, wh, 0);

    try {
        // Stage 4: motion segmentation.
        const ScalarMap w_var = patch_stddev_weight(cur, profile.seg.tau_w);
        VectorMap f_pri;
        MaskMap pri_valid;
        if (external_prior_flow) {
            f_pri = resize_flow(*external_prior_flow, ww, wh, 1.0f / up);
            pri_valid = external_prior_valid ? resize_nearest(*external_prior_valid, ww, wh)
                                             : MaskMap(ww, wh, 1);
        } else {
            prior_flow(cur, next, &f_pri, &pri_valid);
        }

        std::vector<AppearanceTarget> app_targets;
        if (state->has_prev) {
            const Pose to_prev = invert(state->prev_pose);
            app_targets.push_back({&state->prev_left, to_prev});
            app_targets.push_back({&state->prev_right, compose(wrig.left_to_right(), to_prev)});
        }
        app_targets.push_back({&next, pose});
        app_targets.push_back({&next_r, compose(wrig.left_to_right(), pose)});

        const ScalarMap c_ncc =
            appearance_term(cur, app_targets, disparity, w_var, wrig, profile.seg);
        const ScalarMap c_flo = flow_term(f_rig, f_pri, pri_valid, w_var, profile.seg);
        const Image<int32_t> superpixels =
            slic_superpixels(cur_c, profile.seg.superpixel_count);
        const ScalarMap c_ncc_s = smooth_costs(c_ncc, superpixels);
        const ScalarMap c_flo_s = smooth_costs(c_flo, superpixels);

        SegPriors priors;
        if (!mask_prior_map.empty()) priors.mask = mask_prior_map;
        if (!state->prior_model.empty()) priors.prior_model = &state->prior_model;
        if (profile.seg.ground_prior)
            priors.ground = ground_prior(disparity, refined.d_max, profile.seg);
        const ScalarMap c_pri = prior_term(cur_c, priors, profile.seg);

        ScalarMap static_unary(ww, wh);
        MaskMap seed(ww, wh, 0);
        for (int y = 0; y < wh; ++y)
            for (int x = 0; x < ww; ++x) {
                const float data = c_ncc_s(x, y) + c_flo_s(x, y);
                static_unary(x, y) = data + c_pri(x, y);
                seed(x, y) = data > 0 ? 1 : 0;
            }
        const PottsWeights potts =
            potts_weights(cur_c, disparity, sobel_edge_map(cur), profile.seg);
        const SegmentResult seg = segment(cur_c, static_unary, potts, profile.seg, &seed);

        if (any_foreground(seg.mask)) {
            // Stage 5: non-rigid flow at the flow scale.
            const int fw = scaled(in_w, profile.flow_scale);
            const int fh = scaled(in_h, profile.flow_scale);
            const float down = static_cast<float>(fw) / ww;
            const ColorImage cur_fc = resize_bilinear(left, fw, fh);
            const GrayImage cur_f = to_gray(cur_fc);
            const GrayImage next_f = to_gray(resize_bilinear(next_left, fw, fh));
            const StereoRig frig = scale_rig(rig, fw, fh);
            const ScalarMap d_f = resize_disparity(disparity, fw, fh, down);
            const MaskMap mask_f = resize_nearest(seg.mask, fw, fh);
            const VectorMap f_rig_f = rigid_flow(d_f, frig, pose);
            std::vector<FeatureMatch> feats_f;
            for (const FeatureMatch& m : feats.matches)
                feats_f.push_back({m.p * down, m.q * down});
            VectorMap f_pri_f;
            MaskMap pri_valid_f;
            if (external_prior_flow) {
                f_pri_f = resize_flow(*external_prior_flow, fw, fh,
                                      static_cast<float>(fw) / in_w);
                pri_valid_f = external_prior_valid
                                  ? resize_nearest(*external_prior_valid, fw, fh)
                                  : MaskMap(fw, fh, 1);
            } else {
                prior_flow(cur_f, next_f, &f_pri_f, &pri_valid_f);
            }
            const FlowResult nres =
                nonrigid_flow(cur_f, next_f, mask_f, f_rig_f, d_f, feats_f, f_pri_f,
                              pri_valid_f, profile.flow, color_edge_weights(cur_fc));
            VectorMap f_non = resize_flow(nres.flow, ww, wh, 1.0f / down);
            const MaskMap n_valid = resize_nearest(nres.valid, ww, wh);
            // Foreground pixels take the closest in-component flow-scale
            // sample: the coarse grid holds the rigid fill outside the
            // component, so plain upsampling smears the object flow with it
            // along the boundary.
            {
                const double sx = ww > 1 ? static_cast<double>(fw - 1) / (ww - 1) : 0.0;
                const double sy = wh > 1 ? static_cast<double>(fh - 1) / (wh - 1) : 0.0;
                const float ux = static_cast<float>(ww) / fw;
                const float uy = static_cast<float>(wh) / fh;
                for (int y = 0; y < wh; ++y)
                    for (int x = 0; x < ww; ++x) {
                        if (!seg.mask(x, y)) continue;
                        const int cx = static_cast<int>(std::lround(x * sx));
                        const int cy = static_cast<int>(std::lround(y * sy));
                        int bx = -1, by = -1;
                        double best = 1e9;
                        for (int dy = -2; dy <= 2; ++dy)
                            for (int dx = -2; dx <= 2; ++dx) {
                                const int nx = cx + dx, ny = cy + dy;
                                if (nx < 0 || nx >= fw || ny < 0 || ny >= fh ||
                                    !mask_f(nx, ny))
                                    continue;
                                const double d = dx * dx + dy * dy;
                                if (d < best) {
                                    best = d;
                                    bx = nx;
                                    by = ny;
                                }
                            }
                        if (bx < 0) continue;  // far outside the coarse mask
                        const Vec2f f = nres.flow(bx, by);
                        f_non(x, y) = Vec2f(f.x() * ux, f.y() * uy);
                    }
            }

            // Stage 6: fusion.
            const FusionUnaries fu =
                fusion_unaries(cur, next, f_rig, f_non, n_valid, w_var, profile.seg);
            const ScalarMap fu_ncc_s = smooth_costs(fu.ncc, superpixels);
            const ScalarMap fu_flo_s = smooth_costs(fu.flo, superpixels);
            const ScalarMap c_col = color_term(cur_c, seg.model, profile.seg.lambda_col);
            ScalarMap fusion_unary(ww, wh);
            for (int y = 0; y < wh; ++y)
                for (int x = 0; x < ww; ++x)
                    fusion_unary(x, y) =
                        fu_ncc_s(x, y) + fu_flo_s(x, y) + c_col(x, y) + c_pri(x, y);
            const FusionResult fused = fuse(fusion_unary, potts, seg.mask, f_rig, f_non);
            f_final = fused.flow;
            s_final = fused.mask;
            out.fusion_energy = fused.energy;
            out.fusion_energy_rigid = fused.energy_rigid;
            out.fusion_energy_nonrigid = fused.energy_nonrigid;
        }
    } catch (const std::exception& e) {
        out.rigid_fallback = true;
        out.diagnostic = e.what();
        f_final = f_rig;
        s_final = MaskMap(ww, wh, 0);
    }

    out.disparity = resize_disparity(disparity, in_w, in_h, up);
    out.mask = resize_nearest(s_final, in_w, in_h);
    // Sharp composition at input resolution: rigid flow recomputed from the
    // upsampled disparity on the background, nearest working-scale samples on
    // the foreground. Bilinear flow upsampling would smear the two fields
    // across the mask boundary.
    out.flow = rigid_flow(out.disparity, rig, out.pose);
    if (any_foreground(s_final)) {
        const double sx = in_w > 1 ? static_cast<double>(ww - 1) / (in_w - 1) : 0.0;
        const double sy = in_h > 1 ? static_cast<double>(wh - 1) / (in_h - 1) : 0.0;
        const float ux = static_cast<float>(in_w) / ww;
        const float uy = static_cast<float>(in_h) / wh;
        for (int y = 0; y < in_h; ++y)
            for (int x = 0; x < in_w; ++x) {
                if (!out.mask(x, y)) continue;
                const Vec2f f = f_final(static_cast<int>(std::lround(x * sx)),
                                        static_cast<int>(std::lround(y * sy)));
                out.flow(x, y) = Vec2f(f.x() * ux, f.y() * uy);
            }
    }

    // Cross-frame state handoff.
    if (any_foreground(s_final)) state->prior_model.accumulate(ColorModel::fit(cur_c, s_final));
    state->prev_pose = pose;
    state->has_prev = true;
    state->prev_mask = std::move(s_final);
    state->prev_flow = f_final;
    state->prev_left = cur;
    state->prev_right = cur_r;
    ++state->frame_index;
    return out;
}

}  // namespace sf
