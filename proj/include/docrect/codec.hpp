#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "docrect/image.hpp"

namespace docrect {

/// Decodes a PNG or JPEG byte stream. 8-bit sample v maps to exactly v/255
/// (16-bit PNG samples to v/65535). Gray input yields one channel, colour
/// input three; alpha is dropped. Malformed streams throw FormatError with
/// the byte offset at which decoding stopped.
ImagePlane decode_image(std::span<const std::uint8_t> bytes);

/// Lossless 8-bit PNG; samples are rounded to the nearest of 256 levels.
std::vector<std::uint8_t> encode_png(const ImagePlane& img);
std::vector<std::uint8_t> encode_jpeg(const ImagePlane& img, int quality = 95);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

ImagePlane read_image(const std::filesystem::path& path);
/// Chooses JPEG for .jpg/.jpeg extensions, PNG otherwise.
void write_image(const std::filesystem::path& path, const ImagePlane& img);

}  // namespace docrect
