#include "sf/fusion.h"

#include <cmath>

#include "sf/matching.h"
#include "sf/parallel.h"

namespace sf {

FusionUnaries fusion_unaries(const GrayImage& cur, const GrayImage& next, const VectorMap& rigid,
                             const VectorMap& nonrigid, const MaskMap& nonrigid_valid,
                             const ScalarMap& w_var, const SegParams& params) {
    const int w = cur.width(), h = cur.height();
    FusionUnaries out{ScalarMap(w, h, 0.0f), ScalarMap(w, h, 0.0f)};
    parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const Vec2d p(x, y);
            const Vec2d p_rig = p + rigid(x, y).cast<double>();
            if (!cur.inside(p_rig.x(), p_rig.y()) || !nonrigid_valid(x, y)) continue;
            const Vec2d p_non = p + nonrigid(x, y).cast<double>();
            out.ncc(x, y) = params.lambda_ncc * w_var(x, y) *
                            static_cast<float>(tncc(cur, p, next, p_rig, 1.0) -
                                               tncc(cur, p, next, p_non, 1.0));
            const float r = (rigid(x, y) - nonrigid(x, y)).norm();
            const float tau_p = std::max(params.tau_flo, params.gamma_flo * rigid(x, y).norm());
            out.flo(x, y) = params.lambda_flo * w_var(x, y) *
                            (std::min(r, 2 * tau_p) - tau_p) / tau_p;
        }
    });
    return out;
}

FusionResult fuse(const ScalarMap& unary, const PottsWeights& potts, const MaskMap& free_mask,
                  const VectorMap& rigid, const VectorMap& nonrigid) {
    const int w = unary.width(), h = unary.height();
    std::vector<BinaryMrf::Constraint> constraints(static_cast<size_t>(w) * h,
                                                   BinaryMrf::kForceBackground);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (free_mask(x, y)) constraints[y * w + x] = BinaryMrf::kFree;

    const BinaryMrf mrf = build_seg_mrf(unary, potts, constraints);
    const MinCutResult cut = min_cut(mrf);

    FusionResult out;
    out.flow = rigid;
    out.mask = MaskMap(w, h, 0);
    out.energy = cut.energy;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (cut.labels[y * w + x]) {
                out.mask(x, y) = 1;
                out.flow(x, y) = nonrigid(x, y);
            }

    // Reference energies of the two single-proposal labelings.
    std::vector<uint8_t> labels(static_cast<size_t>(w) * h, 0);
    out.energy_rigid = mrf.energy(labels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (free_mask(x, y)) labels[y * w + x] = 1;
    out.energy_nonrigid = mrf.energy(labels);
    return out;
}

}  // namespace sf
