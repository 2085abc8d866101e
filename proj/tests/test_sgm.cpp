#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sf/sgm.h"

using namespace sf;

namespace {

// Quantization mirrors the solver's fixed-point model (scale 1024, float
// penalty products) so chain energies compare exactly.
long q1024(double c) { return std::lround(c * kSgmCostScale); }

struct ChainPenalties {
    long p1, p2;
};

ChainPenalties chain_penalties(const SgmParams& params) {
    const float p1f = params.lambda;  // horizontal chain: axis direction
    return {std::lround(static_cast<double>(p1f) * kSgmCostScale),
            std::lround(static_cast<double>(p1f * (params.beta + params.gamma * 0.0f)) *
                        kSgmCostScale)};
}

long pair_cost_1d(int a, int b, const ChainPenalties& p) {
    if (a == b) return 0;
    return std::abs(a - b) == 1 ? p.p1 : p.p2;
}

// Exhaustive chain minimum over all labelings of a 1 x n chain.
long brute_force_chain(const std::vector<std::vector<long>>& cost, const ChainPenalties& p,
                       int* num_optima) {
    const int n = static_cast<int>(cost.size());
    const int labels = static_cast<int>(cost[0].size());
    long total = 1;
    for (int i = 0; i < n; ++i) total *= labels;
    long best = std::numeric_limits<long>::max();
    int count = 0;
    std::vector<int> lab(n);
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = 0; i < n; ++i) {
            lab[i] = static_cast<int>(c % labels);
            c /= labels;
        }
        long e = 0;
        for (int i = 0; i < n; ++i) e += cost[i][lab[i]];
        for (int i = 0; i + 1 < n; ++i) e += pair_cost_1d(lab[i], lab[i + 1], p);
        if (e < best) {
            best = e;
            count = 1;
        } else if (e == best) {
            ++count;
        }
    }
    *num_optima = count;
    return best;
}

}  // namespace

TEST_CASE("sgm penalties follow the published constants") {
    SgmParams p;
    auto [p1, p2] = sgm_penalties(false, 0.0f, p);
    CHECK(p1 == doctest::Approx(200.0 / 255.0));
    CHECK(p2 == doctest::Approx(2.0 * 200.0 / 255.0));
    auto [d1, d2] = sgm_penalties(true, 0.0f, p);
    CHECK(d1 == doctest::Approx(200.0 / 255.0 / std::sqrt(2.0)));
    CHECK(d2 == doctest::Approx(2.0 * d1));
    auto [w1, w2] = sgm_penalties(false, 1.0f, p);
    CHECK(w2 == doctest::Approx(4.0 * w1));
    CHECK(w2 > w1);
}

TEST_CASE("zero smoothness reduces sgm to the per-pixel argmin") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    CostVolume vol(12, 8, 5, 1.0f);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x)
            for (int d = 0; d < 5; ++d) vol.at(x, y, d) = u(rng);
    SgmParams params;
    params.lambda = 0.0f;
    const Sgm1dResult res = sgm_1d(vol, params, SgmEdgeWeights{});
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x) {
            int best = 0;
            for (int d = 1; d < 5; ++d)
                if (q1024(vol.at(x, y, d)) < q1024(vol.at(x, y, best))) best = d;
            CHECK(res.labels(x, y) == best);
        }
}

TEST_CASE("constant data cost gives zero uncertainty everywhere") {
    const CostVolume vol(10, 6, 7, 1.0f);  // every cost = cap
    const Sgm1dResult res = sgm_1d(vol, SgmParams{}, SgmEdgeWeights{});
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 10; ++x) {
            CHECK(res.uncertainty(x, y) == 0.0f);
            CHECK(res.uncertainty(x, y) >= 0.0f);
        }
}

TEST_CASE("single-direction-pair sgm is exact on random chains") {
    SgmParams params;
    params.directions = 2;
    const ChainPenalties pen = chain_penalties(params);
    std::mt19937 rng(17);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    int tested = 0;
    for (uint32_t seed = 0; tested < 30 && seed < 400; ++seed) {
        const int n = 6, labels = 4;
        CostVolume vol(n, 1, labels, 1.0f);
        std::vector<std::vector<long>> cost(n, std::vector<long>(labels));
        for (int x = 0; x < n; ++x)
            for (int d = 0; d < labels; ++d) {
                vol.at(x, 0, d) = u(rng);
                cost[x][d] = q1024(vol.at(x, 0, d));
            }
        int num_optima = 0;
        const long best = brute_force_chain(cost, pen, &num_optima);
        if (num_optima != 1) continue;  // exactness claim needs a unique optimum
        ++tested;
        const Sgm1dResult res = sgm_1d(vol, params, SgmEdgeWeights{});
        long e = 0;
        for (int x = 0; x < n; ++x) e += cost[x][res.labels(x, 0)];
        for (int x = 0; x + 1 < n; ++x)
            e += pair_cost_1d(res.labels(x, 0), res.labels(x + 1, 0), pen);
        CHECK(e == best);
    }
    CHECK(tested == 30);
}

TEST_CASE("2d sgm single-direction-pair matches brute force on a chain") {
    SgmParams params;
    params.directions = 2;
    const float p1f = params.lambda;
    const long p1 = std::lround(static_cast<double>(p1f) * kSgmCostScale);
    const long p2 = std::lround(static_cast<double>(p1f * (params.beta + params.gamma * 0.0f)) *
                                kSgmCostScale);
    FlowRange range;
    range.u = {-1, 1};
    range.v = {-1, 1};
    const int nu = range.u.count(), labels = 9, n = 5;

    auto pair_cost = [&](int a, int b) -> long {
        if (a == b) return 0;
        const int du = std::abs(a % nu - b % nu), dv = std::abs(a / nu - b / nu);
        return (du <= 1 && dv <= 1) ? p1 : p2;
    };

    std::mt19937 rng(23);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    int tested = 0;
    for (uint32_t seed = 0; tested < 10 && seed < 200; ++seed) {
        CostVolume vol(n, 1, labels, 1.0f);
        std::vector<std::vector<long>> cost(n, std::vector<long>(labels));
        for (int x = 0; x < n; ++x)
            for (int l = 0; l < labels; ++l) {
                vol.at(x, 0, l) = u(rng);
                cost[x][l] = q1024(vol.at(x, 0, l));
            }
        // Brute force over 9^5 labelings.
        long best = std::numeric_limits<long>::max();
        int count = 0;
        std::vector<int> lab(n);
        for (long code = 0; code < 59049; ++code) {
            long c = code;
            for (int i = 0; i < n; ++i) {
                lab[i] = static_cast<int>(c % labels);
                c /= labels;
            }
            long e = 0;
            for (int i = 0; i < n; ++i) e += cost[i][lab[i]];
            for (int i = 0; i + 1 < n; ++i) e += pair_cost(lab[i], lab[i + 1]);
            if (e < best) {
                best = e;
                count = 1;
            } else if (e == best) {
                ++count;
            }
        }
        if (count != 1) continue;
        ++tested;
        const Sgm2dResult res = sgm_2d(vol, range, params, SgmEdgeWeights{});
        long e = 0;
        auto label_index = [&](int x) {
            const Eigen::Vector2i l = res.labels(x, 0);
            return (l.y() - range.v.min) * nu + (l.x() - range.u.min);
        };
        for (int x = 0; x < n; ++x) e += cost[x][label_index(x)];
        for (int x = 0; x + 1 < n; ++x) e += pair_cost(label_index(x), label_index(x + 1));
        CHECK(e == best);
    }
    CHECK(tested == 10);
}

TEST_CASE("2d sgm recovers a global shift") {
    const int w = 48, h = 32, su = 3, sv = -2;
    GrayImage ref(w, h), target(w, h);
    std::mt19937 rng(41);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) ref(x, y) = u(rng);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) target(x, y) = ref.at_clamped(x - su, y - sv);
    FlowRange range;
    range.u = {-5, 5};
    range.v = {-5, 5};
    const CostVolume vol = flow_cost_volume(ref, target, range, 1.0f);
    const Sgm2dResult res = sgm_2d(vol, range, SgmParams{}, SgmEdgeWeights{});
    for (int y = 8; y < h - 8; ++y)
        for (int x = 9; x < w - 9; ++x) {
            CHECK(res.labels(x, y).x() == su);
            CHECK(res.labels(x, y).y() == sv);
        }
}

TEST_CASE("subpixel offset closed forms") {
    CHECK(subpixel_offset(2, 1, 2) == 0.0);
    // Parabola through (-1,3), (0,1), (1,2) has its vertex at +1/6.
    CHECK(subpixel_offset(3, 1, 2) == doctest::Approx(1.0 / 6.0));
    CHECK(subpixel_offset(1, 1, 1) == 0.0);  // zero curvature
    // Offset clamps to half a label.
    CHECK(subpixel_offset(1.0, 0.999, 100.0) >= -0.5);
    CHECK(subpixel_offset(1.0, 0.999, 100.0) <= 0.5);
}

TEST_CASE("boundary labels stay unrefined") {
    // A volume whose per-pixel minimum sits at label 0 everywhere.
    CostVolume vol(8, 4, 5, 1.0f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 8; ++x)
            for (int d = 0; d < 5; ++d) vol.at(x, y, d) = d == 0 ? 0.0f : 0.9f;
    const Sgm1dResult res = sgm_1d(vol, SgmParams{}, SgmEdgeWeights{});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 8; ++x) {
            CHECK(res.labels(x, y) == 0);
            CHECK(res.refined(x, y) == 0.0f);
        }
}

TEST_CASE("sgm output is deterministic across repeated runs") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    CostVolume vol(20, 12, 8, 1.0f);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 20; ++x)
            for (int d = 0; d < 8; ++d) vol.at(x, y, d) = u(rng);
    const Sgm1dResult a = sgm_1d(vol, SgmParams{}, SgmEdgeWeights{});
    const Sgm1dResult b = sgm_1d(vol, SgmParams{}, SgmEdgeWeights{});
    CHECK(a.labels == b.labels);
    CHECK(a.refined == b.refined);
    CHECK(a.uncertainty == b.uncertainty);
}
