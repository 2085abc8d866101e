#pragma once

#include <string>
#include <vector>

#include "sf/geometry.h"
#include "sf/image.h"

namespace sf {

/// Disparity PNG: 16-bit single channel, value = round(256 * d), 0 = invalid.
void write_disparity_png(const std::string& path, const ScalarMap& disparity);
ScalarMap read_disparity_png(const std::string& path);  // invalid pixels read as 0

/// Flow PNG: 16-bit three channels, u/v = (value - 2^15) / 64, third channel
/// nonzero = valid.
void write_flow_png(const std::string& path, const VectorMap& flow, const MaskMap& valid);
void read_flow_png(const std::string& path, VectorMap* flow, MaskMap* valid);

/// Mask PNG: 8-bit, 0 / 255.
void write_mask_png(const std::string& path, const MaskMap& mask);
MaskMap read_mask_png(const std::string& path);  // nonzero -> 1

/// Intensity images. Readers accept 8/16-bit gray or RGB(A) and normalize to
/// [0, 1]; the gray writer emits 8-bit.
ColorImage read_image_png(const std::string& path);
void write_gray_png(const std::string& path, const GrayImage& img);
void write_color_png(const std::string& path, const ColorImage& img);

/// Pose text file: one 3x4 row-major matrix per line.
void write_poses(const std::string& path, const std::vector<Pose>& poses);
std::vector<Pose> read_poses(const std::string& path);

/// Calibration text file: f cx cy baseline width height (whitespace separated).
StereoRig read_calib(const std::string& path);
void write_calib(const std::string& path, const StereoRig& rig);

/// Middlebury-style color wheel; max_mag <= 0 normalizes by the field maximum.
ColorImage flow_to_color(const VectorMap& flow, float max_mag = 0.0f);

}  // namespace sf
