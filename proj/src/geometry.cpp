#include "sf/geometry.h"

#include <limits>

#include "sf/parallel.h"

namespace sf {

Pose compose(const Pose& a, const Pose& b) {
    Pose out;
    out.r = a.r * b.r;
    out.t = a.r * b.t + a.t;
    return out;
}

Pose invert(const Pose& a) {
    Pose out;
    out.r = a.r.transpose();
    out.t = -(a.r.transpose() * a.t);
    return out;
}

Pose pose_exp(const Eigen::Matrix<double, 6, 1>& xi) {
    const Vec3d v = xi.head<3>();
    const Vec3d w = xi.tail<3>();
    const double theta = w.norm();
    Eigen::Matrix3d wx;
    wx << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    Eigen::Matrix3d r, vmat;
    if (theta < 1e-12) {
        r = Eigen::Matrix3d::Identity() + wx;
        vmat = Eigen::Matrix3d::Identity() + 0.5 * wx;
    } else {
        const double a = std::sin(theta) / theta;
        const double b = (1.0 - std::cos(theta)) / (theta * theta);
        const double c = (1.0 - a) / (theta * theta);
        r = Eigen::Matrix3d::Identity() + a * wx + b * wx * wx;
        vmat = Eigen::Matrix3d::Identity() + b * wx + c * wx * wx;
    }
    Pose out;
    out.r = r;
    out.t = vmat * v;
    return out;
}

Vec2d rigid_warp(const Vec2d& p, double d, const StereoRig& rig, const Pose& pose) {
    double unused;
    return rigid_warp(p, d, rig, pose, &unused);
}

Vec2d rigid_warp(const Vec2d& p, double d, const StereoRig& rig, const Pose& pose,
                 double* target_disparity) {
    // Homogeneous point (K^-1 p_hat, d/(fB)): normalized ray scaled by inverse depth.
    const Intrinsics& k = rig.intrinsics;
    const Vec3d ray = k.backproject(p.x(), p.y());
    const double inv_z = d / (k.f * rig.baseline);
    const Vec3d q = pose.r * ray + pose.t * inv_z;
    // q = x'/z where x' is the target-camera point; q.z() = z'/z.
    *target_disparity = q.z() > 0 ? d / q.z() : std::numeric_limits<double>::infinity();
    if (d == 0.0) *target_disparity = 0.0;
    return k.project(q);
}

MaskMap visibility_map(const ScalarMap& disparity, const StereoRig& rig, const Pose& pose,
                       double z_tolerance) {
    const int w = disparity.width(), h = disparity.height();
    ScalarMap zbuf(w, h, -1.0f);  // max target disparity landing on each target pixel
    Image<Vec2d> warped(w, h);
    ScalarMap tdisp(w, h, 0.0f);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double td;
            const Vec2d q = rigid_warp({double(x), double(y)}, disparity(x, y), rig, pose, &td);
            warped(x, y) = q;
            tdisp(x, y) = static_cast<float>(td);
            const int qx = static_cast<int>(std::lround(q.x()));
            const int qy = static_cast<int>(std::lround(q.y()));
            if (zbuf.inside(qx, qy) && std::isfinite(td))
                zbuf(qx, qy) = std::max(zbuf(qx, qy), static_cast<float>(td));
        }
    }

    MaskMap vis(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2d& q = warped(x, y);
            if (!disparity.inside(q.x(), q.y())) continue;
            const int qx = static_cast<int>(std::lround(q.x()));
            const int qy = static_cast<int>(std::lround(q.y()));
            if (!zbuf.inside(qx, qy)) continue;
            if (zbuf(qx, qy) > tdisp(x, y) + z_tolerance) continue;  // occluded by nearer surface
            vis(x, y) = 1;
        }
    }
    return vis;
}

VectorMap rigid_flow(const ScalarMap& disparity, const StereoRig& rig, const Pose& pose) {
    const int w = disparity.width(), h = disparity.height();
    VectorMap flow(w, h);
    parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const Vec2d q = rigid_warp({double(x), double(y)}, disparity(x, y), rig, pose);
            flow(x, y) = Vec2f(static_cast<float>(q.x() - x), static_cast<float>(q.y() - y));
        }
    });
    return flow;
}

}  // namespace sf
