#include "sf/io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <png.h>

namespace sf {

namespace {

struct RawPng {
    int width = 0, height = 0, channels = 0, bit_depth = 0;
    std::vector<uint16_t> data;  // interleaved, native endian

    uint16_t at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
};

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};

RawPng read_png(const std::string& path) {
    std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open PNG for reading: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("failed to decode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_bit_depth(png, info) == 16) png_set_swap(png);  // to little endian
    png_read_update_info(png, info);

    RawPng out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = static_cast<int>(png_get_channels(png, info));
    out.bit_depth = static_cast<int>(png_get_bit_depth(png, info));
    out.data.resize(static_cast<size_t>(out.width) * out.height * out.channels);

    const size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<uint8_t> row(row_bytes);
    for (int y = 0; y < out.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int i = 0; i < out.width * out.channels; ++i) {
            out.data[static_cast<size_t>(y) * out.width * out.channels + i] =
                out.bit_depth == 16 ? reinterpret_cast<const uint16_t*>(row.data())[i] : row[i];
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const std::string& path, int width, int height, int channels, int bit_depth,
               const std::vector<uint16_t>& data) {
    std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open PNG for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed to encode PNG: " + path);
    }
    png_init_io(png, fp.get());
    const int color_type = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);  // data is little endian

    std::vector<uint8_t> row8;
    for (int y = 0; y < height; ++y) {
        const uint16_t* src = &data[static_cast<size_t>(y) * width * channels];
        if (bit_depth == 16) {
            png_write_row(png, reinterpret_cast<png_const_bytep>(src));
        } else {
            row8.resize(static_cast<size_t>(width) * channels);
            for (int i = 0; i < width * channels; ++i) row8[i] = static_cast<uint8_t>(src[i]);
            png_write_row(png, row8.data());
        }
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_disparity_png(const std::string& path, const ScalarMap& disparity) {
    std::vector<uint16_t> data(disparity.size());
    for (int y = 0; y < disparity.height(); ++y)
        for (int x = 0; x < disparity.width(); ++x) {
            const double v = std::lround(256.0 * disparity(x, y));
            data[static_cast<size_t>(y) * disparity.width() + x] =
                static_cast<uint16_t>(std::clamp(v, 0.0, 65535.0));
        }
    write_png(path, disparity.width(), disparity.height(), 1, 16, data);
}

ScalarMap read_disparity_png(const std::string& path) {
    const RawPng raw = read_png(path);
    if (raw.channels != 1 || raw.bit_depth != 16)
        throw std::runtime_error("not a 16-bit single-channel disparity PNG: " + path);
    ScalarMap out(raw.width, raw.height);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) out(x, y) = raw.at(x, y, 0) / 256.0f;
    return out;
}

void write_flow_png(const std::string& path, const VectorMap& flow, const MaskMap& valid) {
    std::vector<uint16_t> data(flow.size() * 3);
    auto encode = [](float v) {
        return static_cast<uint16_t>(
            std::clamp(std::lround(v * 64.0f) + 32768L, 0L, 65535L));
    };
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            const size_t i = (static_cast<size_t>(y) * flow.width() + x) * 3;
            data[i] = encode(flow(x, y).x());
            data[i + 1] = encode(flow(x, y).y());
            data[i + 2] = valid.empty() ? 1 : (valid(x, y) ? 1 : 0);
        }
    write_png(path, flow.width(), flow.height(), 3, 16, data);
}

void read_flow_png(const std::string& path, VectorMap* flow, MaskMap* valid) {
    const RawPng raw = read_png(path);
    if (raw.channels != 3 || raw.bit_depth != 16)
        throw std::runtime_error("not a 16-bit three-channel flow PNG: " + path);
    *flow = VectorMap(raw.width, raw.height, Vec2f::Zero());
    *valid = MaskMap(raw.width, raw.height, 0);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) {
            (*flow)(x, y) = Vec2f((raw.at(x, y, 0) - 32768) / 64.0f,
                                  (raw.at(x, y, 1) - 32768) / 64.0f);
            (*valid)(x, y) = raw.at(x, y, 2) ? 1 : 0;
        }
}

void write_mask_png(const std::string& path, const MaskMap& mask) {
    std::vector<uint16_t> data(mask.size());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            data[static_cast<size_t>(y) * mask.width() + x] = mask(x, y) ? 255 : 0;
    write_png(path, mask.width(), mask.height(), 1, 8, data);
}

MaskMap read_mask_png(const std::string& path) {
    const RawPng raw = read_png(path);
    MaskMap out(raw.width, raw.height);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) out(x, y) = raw.at(x, y, 0) ? 1 : 0;
    return out;
}

ColorImage read_image_png(const std::string& path) {
    const RawPng raw = read_png(path);
    const float scale = raw.bit_depth == 16 ? 1.0f / 65535.0f : 1.0f / 255.0f;
    ColorImage out(raw.width, raw.height);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) {
            if (raw.channels >= 3) {
                out(x, y) = Vec3f(raw.at(x, y, 0), raw.at(x, y, 1), raw.at(x, y, 2)) * scale;
            } else {
                out(x, y) = Vec3f::Constant(raw.at(x, y, 0) * scale);
            }
        }
    return out;
}

void write_gray_png(const std::string& path, const GrayImage& img) {
    std::vector<uint16_t> data(img.size());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            data[static_cast<size_t>(y) * img.width() + x] =
                static_cast<uint16_t>(std::clamp(std::lround(img(x, y) * 255.0f), 0L, 255L));
    write_png(path, img.width(), img.height(), 1, 8, data);
}

void write_color_png(const std::string& path, const ColorImage& img) {
    std::vector<uint16_t> data(img.size() * 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c)
                data[(static_cast<size_t>(y) * img.width() + x) * 3 + c] =
                    static_cast<uint16_t>(std::clamp(std::lround(img(x, y)(c) * 255.0f), 0L, 255L));
    write_png(path, img.width(), img.height(), 3, 8, data);
}

void write_poses(const std::string& path, const std::vector<Pose>& poses) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open pose file for writing: " + path);
    out.precision(17);
    for (const Pose& p : poses) {
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) out << p.r(r, c) << ' ';
            out << p.t(r);
            if (r < 2) out << ' ';
        }
        out << '\n';
    }
}

std::vector<Pose> read_poses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pose file: " + path);
    std::vector<Pose> poses;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Pose p;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) ss >> p.r(r, c);
            ss >> p.t(r);
        }
        if (!ss) throw std::runtime_error("malformed pose line in " + path);
        poses.push_back(p);
    }
    return poses;
}

StereoRig read_calib(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open calibration file: " + path);
    StereoRig rig;
    if (!(in >> rig.intrinsics.f >> rig.intrinsics.cx >> rig.intrinsics.cy >> rig.baseline >>
          rig.width >> rig.height))
        throw std::runtime_error("malformed calibration file: " + path);
    return rig;
}

void write_calib(const std::string& path, const StereoRig& rig) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open calibration file for writing: " + path);
    out.precision(17);
    out << rig.intrinsics.f << ' ' << rig.intrinsics.cx << ' ' << rig.intrinsics.cy << ' '
        << rig.baseline << ' ' << rig.width << ' ' << rig.height << '\n';
}

namespace {

// Standard 55-entry flow color wheel.
std::vector<Vec3f> make_color_wheel() {
    const int ry = 15, yg = 6, gc = 4, cb = 11, bm = 13, mr = 6;
    std::vector<Vec3f> wheel;
    for (int i = 0; i < ry; ++i) wheel.emplace_back(1.0f, static_cast<float>(i) / ry, 0.0f);
    for (int i = 0; i < yg; ++i) wheel.emplace_back(1.0f - static_cast<float>(i) / yg, 1.0f, 0.0f);
    for (int i = 0; i < gc; ++i) wheel.emplace_back(0.0f, 1.0f, static_cast<float>(i) / gc);
    for (int i = 0; i < cb; ++i) wheel.emplace_back(0.0f, 1.0f - static_cast<float>(i) / cb, 1.0f);
    for (int i = 0; i < bm; ++i) wheel.emplace_back(static_cast<float>(i) / bm, 0.0f, 1.0f);
    for (int i = 0; i < mr; ++i) wheel.emplace_back(1.0f, 0.0f, 1.0f - static_cast<float>(i) / mr);
    return wheel;
}

}  // namespace

ColorImage flow_to_color(const VectorMap& flow, float max_mag) {
    static const std::vector<Vec3f> wheel = make_color_wheel();
    if (max_mag <= 0) {
        for (int y = 0; y < flow.height(); ++y)
            for (int x = 0; x < flow.width(); ++x) max_mag = std::max(max_mag, flow(x, y).norm());
        if (max_mag <= 0) max_mag = 1.0f;
    }
    ColorImage out(flow.width(), flow.height());
    const int n = static_cast<int>(wheel.size());
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            const float mag = std::min(flow(x, y).norm() / max_mag, 1.0f);
            const float angle = std::atan2(-flow(x, y).y(), -flow(x, y).x()) / 3.14159265f;
            const float fk = (angle + 1.0f) / 2.0f * (n - 1);
            const int k0 = std::min(static_cast<int>(fk), n - 1);
            const int k1 = (k0 + 1) % n;
            const float f = fk - k0;
            Vec3f col = (1 - f) * wheel[k0] + f * wheel[k1];
            // Saturate toward white at zero motion.
            out(x, y) = Vec3f::Ones() - mag * (Vec3f::Ones() - col);
        }
    return out;
}

}  // namespace sf
