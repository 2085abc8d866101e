#pragma once

#include "sf/segmentation.h"

namespace sf {

struct FusionUnaries {
    ScalarMap ncc;  // photometric preference rigid vs. non-rigid
    ScalarMap flo;  // flow-residual term with the non-rigid proposal as prior
};

/// Data terms of the fusion energy. Both are zeroed where the rigid warp
/// leaves the image or the non-rigid proposal is invalid.
FusionUnaries fusion_unaries(const GrayImage& cur, const GrayImage& next, const VectorMap& rigid,
                             const VectorMap& nonrigid, const MaskMap& nonrigid_valid,
                             const ScalarMap& w_var, const SegParams& params);

struct FusionResult {
    VectorMap flow;  // per-pixel selection of the two proposals
    MaskMap mask;    // final motion segmentation (1 = non-rigid/foreground)
    double energy = 0.0;
    double energy_rigid = 0.0;     // all free pixels labeled rigid
    double energy_nonrigid = 0.0;  // all free pixels labeled non-rigid
};

/// Single graph cut over the free pixels (the initial mask's foreground);
/// background pixels are hard-constrained to the rigid proposal.
FusionResult fuse(const ScalarMap& unary, const PottsWeights& potts, const MaskMap& free_mask,
                  const VectorMap& rigid, const VectorMap& nonrigid);

}  // namespace sf
