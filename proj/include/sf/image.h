#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace sf {

using Vec2f = Eigen::Vector2f;
using Vec3f = Eigen::Vector3f;
using Vec2d = Eigen::Vector2d;
using Vec3d = Eigen::Vector3d;

/// Dense row-major 2D grid of per-pixel values.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, T fill = T{})
        : w_(width), h_(height), data_(static_cast<size_t>(width) * height, fill) {}

    int width() const { return w_; }
    int height() const { return h_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    T& operator()(int x, int y) { return data_[static_cast<size_t>(y) * w_ + x]; }
    const T& operator()(int x, int y) const { return data_[static_cast<size_t>(y) * w_ + x]; }

    T* row(int y) { return data_.data() + static_cast<size_t>(y) * w_; }
    const T* row(int y) const { return data_.data() + static_cast<size_t>(y) * w_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool inside(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }
    bool inside(double x, double y) const { return x >= 0.0 && x <= w_ - 1.0 && y >= 0.0 && y <= h_ - 1.0; }

    /// Value at clamped integer coordinates.
    const T& at_clamped(int x, int y) const {
        x = std::clamp(x, 0, w_ - 1);
        y = std::clamp(y, 0, h_ - 1);
        return (*this)(x, y);
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_size(const Image& o) const { return w_ == o.w_ && h_ == o.h_; }

    bool operator==(const Image& o) const { return w_ == o.w_ && h_ == o.h_ && data_ == o.data_; }

private:
    int w_ = 0, h_ = 0;
    std::vector<T> data_;
};

using ScalarMap = Image<float>;
using VectorMap = Image<Vec2f>;
using MaskMap = Image<uint8_t>;
using GrayImage = Image<float>;
using ColorImage = Image<Vec3f>;

/// Bilinear sample with edge clamping. Coordinates outside the image are
/// clamped to the border pixel.
template <typename T>
inline T sample_bilinear(const Image<T>& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    return static_cast<T>(img(x0, y0) * static_cast<float>((1 - fx) * (1 - fy)) +
                          img(x1, y0) * static_cast<float>(fx * (1 - fy)) +
                          img(x0, y1) * static_cast<float>((1 - fx) * fy) +
                          img(x1, y1) * static_cast<float>(fx * fy));
}

/// Bilinear downscale/upscale to the given size (pixel-center aligned).
template <typename T>
inline Image<T> resize_bilinear(const Image<T>& img, int new_w, int new_h) {
    Image<T> out(new_w, new_h);
    const double sx = new_w > 1 ? static_cast<double>(img.width() - 1) / (new_w - 1) : 0.0;
    const double sy = new_h > 1 ? static_cast<double>(img.height() - 1) / (new_h - 1) : 0.0;
    for (int y = 0; y < new_h; ++y)
        for (int x = 0; x < new_w; ++x)
            out(x, y) = sample_bilinear(img, x * sx, y * sy);
    return out;
}

template <typename T>
inline Image<T> resize_nearest(const Image<T>& img, int new_w, int new_h) {
    Image<T> out(new_w, new_h);
    const double sx = new_w > 1 ? static_cast<double>(img.width() - 1) / (new_w - 1) : 0.0;
    const double sy = new_h > 1 ? static_cast<double>(img.height() - 1) / (new_h - 1) : 0.0;
    for (int y = 0; y < new_h; ++y)
        for (int x = 0; x < new_w; ++x)
            out(x, y) = img(static_cast<int>(std::lround(x * sx)), static_cast<int>(std::lround(y * sy)));
    return out;
}

inline GrayImage to_gray(const ColorImage& c) {
    GrayImage g(c.width(), c.height());
    for (int y = 0; y < c.height(); ++y)
        for (int x = 0; x < c.width(); ++x) {
            const Vec3f& v = c(x, y);
            g(x, y) = 0.299f * v.x() + 0.587f * v.y() + 0.114f * v.z();
        }
    return g;
}

inline ColorImage to_color(const GrayImage& g) {
    ColorImage c(g.width(), g.height());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) c(x, y) = Vec3f::Constant(g(x, y));
    return c;
}

}  // namespace sf
