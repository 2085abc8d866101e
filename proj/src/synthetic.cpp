#include "sf/synthetic.h"

#include <atomic>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "sf/parallel.h"

namespace sf {

namespace {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double hash01(uint64_t a, int64_t b, int64_t c) {
    const uint64_t h = mix64(mix64(a ^ mix64(static_cast<uint64_t>(b))) ^
                             mix64(static_cast<uint64_t>(c) * 0x2545f4914f6cdd1dULL));
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double value_noise(uint32_t seed, double u, double v) {
    const double fu = std::floor(u), fv = std::floor(v);
    const int64_t iu = static_cast<int64_t>(fu), iv = static_cast<int64_t>(fv);
    const double tu = u - fu, tv = v - fv;
    const double su = tu * tu * (3 - 2 * tu);  // smoothstep
    const double sv = tv * tv * (3 - 2 * tv);
    const double a = hash01(seed, iu, iv);
    const double b = hash01(seed, iu + 1, iv);
    const double c = hash01(seed, iu, iv + 1);
    const double d = hash01(seed, iu + 1, iv + 1);
    return (a * (1 - su) + b * su) * (1 - sv) + (c * (1 - su) + d * su) * sv;
}

struct Hit {
    double z = std::numeric_limits<double>::infinity();
    double u = 0, v = 0;
    const TexturedPlane* plane = nullptr;
    int mover_index = -1;  // -1: static surface
};

// Ray through the camera with world->camera pose `w2c`, in world coordinates.
struct Ray {
    Vec3d origin, dir;  // dir not normalized; parameter s equals camera depth z
};

Ray camera_ray(const Intrinsics& k, const Pose& w2c, double x, double y) {
    const Eigen::Matrix3d rt = w2c.r.transpose();
    Ray ray;
    ray.origin = -(rt * w2c.t);
    ray.dir = rt * k.backproject(x, y);
    return ray;
}

bool intersect(const TexturedPlane& plane, const Ray& ray, Hit* hit) {
    const Vec3d n = plane.normal();
    const double denom = ray.dir.dot(n);
    if (std::abs(denom) < 1e-12) return false;
    const double s = (plane.origin - ray.origin).dot(n) / denom;
    if (s <= 1e-9) return false;
    const Vec3d x = ray.origin + s * ray.dir;
    const Vec3d rel = x - plane.origin;
    const double u = rel.dot(plane.axis_u);
    const double v = rel.dot(plane.axis_v);
    if (plane.half_u > 0 && std::abs(u) > plane.half_u) return false;
    if (plane.half_v > 0 && std::abs(v) > plane.half_v) return false;
    if (s >= hit->z) return false;
    hit->z = s;
    hit->u = u;
    hit->v = v;
    hit->plane = &plane;
    return true;
}

// Body-frame ray for mover intersection.
Ray to_body(const Ray& ray, const Pose& body_to_world) {
    const Pose w2b = invert(body_to_world);
    return {w2b.apply(ray.origin), w2b.r * ray.dir};
}

Hit trace(const SceneSpec& spec, const Ray& ray, int frame) {
    Hit hit;
    for (const auto& plane : spec.planes) intersect(plane, ray, &hit);
    for (size_t m = 0; m < spec.movers.size(); ++m) {
        const Ray body_ray = to_body(ray, spec.movers[m].body_to_world[frame]);
        Hit body_hit;
        body_hit.z = hit.z;
        if (intersect(spec.movers[m].shape, body_ray, &body_hit)) {
            hit = body_hit;
            hit.mover_index = static_cast<int>(m);
        }
    }
    return hit;
}

}  // namespace

double plane_texture(uint32_t seed, double u, double v, double scale) {
    const double s = scale;
    double t = 0.5 * value_noise(seed, u / s, v / s) +
               0.3 * value_noise(seed + 101, 3.0 * u / s, 3.0 * v / s) +
               0.2 * value_noise(seed + 202, 9.0 * u / s, 9.0 * v / s);
    return std::clamp(t * 0.9 + 0.05, 0.0, 1.0);
}

std::vector<FrameTruth> render(const SceneSpec& spec) {
    const int frames = static_cast<int>(spec.camera.size());
    if (frames == 0) throw std::invalid_argument("render: empty camera trajectory");
    for (const auto& m : spec.movers)
        if (static_cast<int>(m.body_to_world.size()) != frames)
            throw std::invalid_argument("render: mover trajectory length mismatch");

    const int w = spec.rig.width, h = spec.rig.height;
    const Intrinsics& k = spec.rig.intrinsics;
    std::vector<FrameTruth> out(frames);

    for (int t = 0; t < frames; ++t) {
        FrameTruth& ft = out[t];
        ft.left = GrayImage(w, h);
        ft.right = GrayImage(w, h);
        ft.gt_disparity = ScalarMap(w, h);
        ft.gt_disparity2 = ScalarMap(w, h);
        ft.gt_flow = VectorMap(w, h, Vec2f::Zero());
        ft.gt_mask = MaskMap(w, h, 0);
        const bool has_next = t + 1 < frames;
        ft.gt_pose = has_next ? compose(spec.camera[t + 1], invert(spec.camera[t]))
                              : Pose::identity();
        const Pose right_pose = compose(spec.rig.left_to_right(), spec.camera[t]);

        std::atomic<bool> bad{false};
        parallel_rows(h, [&](int y) {
            for (int x = 0; x < w; ++x) {
                // Left view with ground truth.
                const Ray ray = camera_ray(k, spec.camera[t], x, y);
                const Hit hit = trace(spec, ray, t);
                if (!hit.plane) {
                    bad.store(true);
                    return;
                }
                const double tex = std::clamp(
                    hit.plane->texture_gain *
                            plane_texture(hit.plane->texture_seed, hit.u, hit.v,
                                          hit.plane->texture_scale) +
                        hit.plane->texture_bias,
                    0.0, 1.0);
                const double noise =
                    spec.noise * (2.0 * hash01(mix64(spec.noise_seed) ^ (uint64_t(t) << 1),
                                               x, y) - 1.0);
                ft.left(x, y) = static_cast<float>(std::clamp(tex + noise, 0.0, 1.0));
                ft.gt_disparity(x, y) = static_cast<float>(spec.rig.depth_to_disparity(hit.z));
                ft.gt_mask(x, y) = hit.mover_index >= 0 ? 1 : 0;

                if (has_next) {
                    // World point at t+1 of the surface point seen at p.
                    const Vec3d xw = ray.origin + hit.z * ray.dir;
                    Vec3d xw_next = xw;
                    if (hit.mover_index >= 0) {
                        const Mover& m = spec.movers[hit.mover_index];
                        const Vec3d xb = invert(m.body_to_world[t]).apply(xw);
                        xw_next = m.body_to_world[t + 1].apply(xb);
                    }
                    const Vec3d xc_next = spec.camera[t + 1].apply(xw_next);
                    if (xc_next.z() <= 1e-9) {
                        bad.store(true);
                        return;
                    }
                    const Vec2d p_next = k.project(xc_next);
                    ft.gt_flow(x, y) = Vec2f(static_cast<float>(p_next.x() - x),
                                             static_cast<float>(p_next.y() - y));
                    ft.gt_disparity2(x, y) =
                        static_cast<float>(spec.rig.depth_to_disparity(xc_next.z()));
                } else {
                    ft.gt_disparity2(x, y) = ft.gt_disparity(x, y);
                }

                // Right view.
                const Ray rray = camera_ray(k, right_pose, x, y);
                const Hit rhit = trace(spec, rray, t);
                if (!rhit.plane) {
                    bad.store(true);
                    return;
                }
                const double rtex = std::clamp(
                    rhit.plane->texture_gain *
                            plane_texture(rhit.plane->texture_seed, rhit.u, rhit.v,
                                          rhit.plane->texture_scale) +
                        rhit.plane->texture_bias,
                    0.0, 1.0);
                const double rnoise =
                    spec.noise * (2.0 * hash01(mix64(spec.noise_seed) ^ ((uint64_t(t) << 1) | 1),
                                               x, y) - 1.0);
                ft.right(x, y) = static_cast<float>(std::clamp(rtex + rnoise, 0.0, 1.0));
            }
        });
        if (bad.load())
            throw std::invalid_argument("render: surface behind camera or uncovered pixel");
    }
    return out;
}

namespace {

Vec3d parse_vec3(const nlohmann::json& j) {
    return Vec3d(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

Pose parse_pose(const nlohmann::json& j) {
    Pose p;
    if (j.contains("r_axis_angle")) {
        const Vec3d aa = parse_vec3(j["r_axis_angle"]);
        const double theta = aa.norm();
        p.r = theta < 1e-15 ? Eigen::Matrix3d::Identity()
                            : Eigen::AngleAxisd(theta, aa / theta).toRotationMatrix();
    }
    if (j.contains("t")) p.t = parse_vec3(j["t"]);
    return p;
}

TexturedPlane parse_plane(const nlohmann::json& j) {
    TexturedPlane p;
    p.origin = parse_vec3(j.at("origin"));
    p.axis_u = parse_vec3(j.at("axis_u")).normalized();
    p.axis_v = parse_vec3(j.at("axis_v")).normalized();
    p.half_u = j.value("half_u", -1.0);
    p.half_v = j.value("half_v", -1.0);
    p.texture_seed = j.value("seed", 1u);
    p.texture_scale = j.value("texture_scale", 1.0);
    p.texture_gain = j.value("texture_gain", 1.0);
    p.texture_bias = j.value("texture_bias", 0.0);
    return p;
}

}  // namespace

SceneSpec load_scene_spec(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open scene spec: " + json_path);
    nlohmann::json j;
    in >> j;

    SceneSpec spec;
    const auto& rig = j.at("rig");
    spec.rig.intrinsics.f = rig.at("f");
    spec.rig.intrinsics.cx = rig.at("cx");
    spec.rig.intrinsics.cy = rig.at("cy");
    spec.rig.baseline = rig.at("baseline");
    spec.rig.width = rig.at("width");
    spec.rig.height = rig.at("height");
    spec.noise = j.value("noise", 0.01);
    spec.noise_seed = j.value("noise_seed", 1234u);
    for (const auto& p : j.value("planes", nlohmann::json::array()))
        spec.planes.push_back(parse_plane(p));
    for (const auto& m : j.value("movers", nlohmann::json::array())) {
        Mover mover;
        mover.shape = parse_plane(m.at("plane"));
        for (const auto& pose : m.at("poses")) mover.body_to_world.push_back(parse_pose(pose));
        spec.movers.push_back(std::move(mover));
    }
    for (const auto& pose : j.at("camera")) spec.camera.push_back(parse_pose(pose));
    return spec;
}

}  // namespace sf
