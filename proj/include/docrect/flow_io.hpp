#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "docrect/flow.hpp"

namespace docrect {

/// DSFL container, all integers little-endian:
///
///   "DSFL"            4 bytes magic
///   version           u32 (1 or 2)
///   direction         u8  (0 backward, 1 forward)
///   semantics         u8  (version 2 only; 0 absolute coordinates, 1 displacements)
///   height, width     u32, u32
///   payload           height*width interleaved (u, v) f32 pairs, row-major
enum class DsflSemantics : std::uint8_t { absolute = 0, displacement = 1 };

struct DsflRecord {
  std::uint32_t version = 1;
  FlowDirection direction = FlowDirection::backward;
  DsflSemantics semantics = DsflSemantics::absolute;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> pairs;  // 2 * height * width
};

std::vector<std::uint8_t> encode_dsfl(const DsflRecord& record);
/// Throws FormatError naming the offending header field.
DsflRecord decode_dsfl(std::span<const std::uint8_t> bytes);

/// Version-1 encoding of an absolute-coordinate flow.
std::vector<std::uint8_t> encode_flow(const FlowField& flow);
/// Rejects displacement-semantics records. The source grid is taken to be the
/// flow's own extent.
FlowField decode_flow(std::span<const std::uint8_t> bytes);

void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

}  // namespace docrect
