#include "docrect/flow_io.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "docrect/codec.hpp"
#include "docrect/error.hpp"

namespace docrect {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'F', 'L'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

[[noreturn]] void bad_field(const char* field, const std::string& detail) {
  std::ostringstream os;
  os << "DSFL field '" << field << "': " << detail;
  throw FormatError(os.str());
}

}  // namespace

std::vector<std::uint8_t> encode_dsfl(const DsflRecord& r) {
  if (r.version != 1 && r.version != 2) bad_field("version", "unsupported version " + std::to_string(r.version));
  if (r.pairs.size() != 2ull * r.height * r.width) bad_field("payload", "pair count does not match height*width");
  if (r.version == 1 && r.semantics != DsflSemantics::absolute)
    bad_field("semantics", "version 1 can only hold absolute coordinates");
  std::vector<std::uint8_t> out;
  out.reserve(18 + r.pairs.size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, r.version);
  out.push_back(static_cast<std::uint8_t>(r.direction));
  if (r.version == 2) out.push_back(static_cast<std::uint8_t>(r.semantics));
  put_u32(out, r.height);
  put_u32(out, r.width);
  for (float f : r.pairs) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

DsflRecord decode_dsfl(std::span<const std::uint8_t> b) {
  if (b.size() < 4) bad_field("magic", "stream shorter than 4 bytes");
  if (std::memcmp(b.data(), kMagic, 4) != 0) bad_field("magic", "expected \"DSFL\"");
  if (b.size() < 8) bad_field("version", "truncated header");
  DsflRecord r;
  r.version = get_u32(b, 4);
  if (r.version != 1 && r.version != 2) bad_field("version", "unsupported version " + std::to_string(r.version));
  std::size_t at = 8;
  if (b.size() < at + 1) bad_field("direction", "truncated header");
  if (b[at] > 1) bad_field("direction", "expected 0 or 1, got " + std::to_string(b[at]));
  r.direction = static_cast<FlowDirection>(b[at]);
  ++at;
  if (r.version == 2) {
    if (b.size() < at + 1) bad_field("semantics", "truncated header");
    if (b[at] > 1) bad_field("semantics", "expected 0 or 1, got " + std::to_string(b[at]));
    r.semantics = static_cast<DsflSemantics>(b[at]);
    ++at;
  }
  if (b.size() < at + 4) bad_field("height", "truncated header");
  r.height = get_u32(b, at);
  at += 4;
  if (b.size() < at + 4) bad_field("width", "truncated header");
  r.width = get_u32(b, at);
  at += 4;
  const std::uint64_t count = 2ull * r.height * r.width;
  if (b.size() - at != count * 4) {
    std::ostringstream os;
    os << "expected " << count * 4 << " bytes for " << r.height << "x" << r.width << ", found " << b.size() - at;
    bad_field("payload", os.str());
  }
  r.pairs.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) r.pairs[i] = std::bit_cast<float>(get_u32(b, at + 4 * i));
  return r;
}

std::vector<std::uint8_t> encode_flow(const FlowField& flow) {
  DsflRecord r;
  r.version = 1;
  r.direction = flow.direction;
  r.height = static_cast<std::uint32_t>(flow.height);
  r.width = static_cast<std::uint32_t>(flow.width);
  r.pairs.resize(2 * flow.size());
  for (std::size_t i = 0; i < flow.size(); ++i) {
    r.pairs[2 * i] = flow.u[i];
    r.pairs[2 * i + 1] = flow.v[i];
  }
  return encode_dsfl(r);
}

FlowField decode_flow(std::span<const std::uint8_t> bytes) {
  DsflRecord r = decode_dsfl(bytes);
  if (r.semantics != DsflSemantics::absolute) bad_field("semantics", "expected absolute coordinates, got displacements");
  if (r.height == 0 || r.width == 0) bad_field("height", "flow must be at least 1x1");
  const int h = static_cast<int>(r.height), w = static_cast<int>(r.width);
  FlowField f(h, w, r.direction, h, w);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.u[i] = r.pairs[2 * i];
    f.v[i] = r.pairs[2 * i + 1];
  }
  return f;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  write_file(path, encode_flow(flow));
}

FlowField read_flow(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  try {
    return decode_flow(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace docrect
