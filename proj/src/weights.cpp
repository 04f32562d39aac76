#include "docrect/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "docrect/codec.hpp"
#include "docrect/error.hpp"

namespace docrect {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'W', '1'};
constexpr std::size_t kHeaderSize = 16;

std::string shape_str(const std::vector<std::int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

std::int64_t shape_numel(const std::vector<std::int64_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

[[noreturn]] void bad_field(const std::string& field, const std::string& detail) {
  throw FormatError("DSW1 field '" + field + "': " + detail);
}

}  // namespace

std::int64_t Tensor::numel() const { return shape_numel(shape); }

WeightStore::WeightStore(std::map<std::string, Tensor> tensors) : tensors_(std::move(tensors)) {
  for (const auto& [name, t] : tensors_) {
    for (auto d : t.shape)
      if (d < 0) throw ManifestError("tensor '" + name + "' has a negative dimension");
    if (static_cast<std::int64_t>(t.data.size()) != t.numel())
      throw ManifestError("tensor '" + name + "' holds " + std::to_string(t.data.size()) +
                          " values but its shape " + shape_str(t.shape) + " needs " + std::to_string(t.numel()));
  }
}

const Tensor& WeightStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ManifestError("missing tensor '" + name + "'");
  return it->second;
}

std::int64_t WeightStore::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.numel();
  return n;
}

void WeightStore::validate(const LayerManifest& manifest) const {
  std::vector<std::string> problems;
  std::map<std::string, const TensorSpec*> wanted;
  for (const auto& spec : manifest) {
    wanted[spec.name] = &spec;
    auto it = tensors_.find(spec.name);
    if (it == tensors_.end()) {
      problems.push_back("missing tensor '" + spec.name + "' " + shape_str(spec.shape));
    } else if (it->second.shape != spec.shape) {
      problems.push_back("tensor '" + spec.name + "' has shape " + shape_str(it->second.shape) + ", expected " +
                         shape_str(spec.shape));
    }
  }
  for (const auto& [name, t] : tensors_) {
    if (!wanted.count(name)) problems.push_back("unexpected tensor '" + name + "' " + shape_str(t.shape));
  }
  if (!problems.empty()) {
    std::ostringstream os;
    os << "weight manifest mismatch (" << problems.size() << " problem" << (problems.size() > 1 ? "s" : "") << "):";
    for (const auto& p : problems) os << "\n  " << p;
    throw ManifestError(os.str());
  }
}

WeightStore zero_weights(const LayerManifest& manifest) {
  std::map<std::string, Tensor> m;
  for (const auto& spec : manifest) {
    Tensor t;
    t.shape = spec.shape;
    t.data.assign(static_cast<std::size_t>(shape_numel(spec.shape)), 0.0f);
    m.emplace(spec.name, std::move(t));
  }
  return WeightStore(std::move(m));
}

WeightStore random_weights(const LayerManifest& manifest, std::uint64_t seed, float gain) {
  std::mt19937_64 rng(seed);
  std::map<std::string, Tensor> m;
  for (const auto& spec : manifest) {
    Tensor t;
    t.shape = spec.shape;
    t.data.assign(static_cast<std::size_t>(shape_numel(spec.shape)), 0.0f);
    if (spec.shape.size() == 4) {
      const double fan_in = static_cast<double>(spec.shape[1] * spec.shape[2] * spec.shape[3]);
      std::normal_distribution<float> dist(0.0f, gain * static_cast<float>(std::sqrt(2.0 / fan_in)));
      for (float& v : t.data) v = dist(rng);
    }
    m.emplace(spec.name, std::move(t));
  }
  return WeightStore(std::move(m));
}

std::vector<std::uint8_t> encode_weights(const WeightStore& store) {
  nlohmann::json manifest = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : store.tensors()) {
    manifest.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}, {"dtype", "f32le"}});
    offset += t.data.size() * 4;
  }
  const std::string text = manifest.dump();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + text.size() + offset);
  out.insert(out.end(), kMagic, kMagic + 4);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(1u >> (8 * i)));
  const std::uint64_t len = text.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, t] : store.tensors()) {
    for (float f : t.data) {
      const auto bits = std::bit_cast<std::uint32_t>(f);
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
  }
  return out;
}

WeightStore decode_weights(std::span<const std::uint8_t> b, const LayerManifest* expected) {
  if (b.size() < 4 || std::memcmp(b.data(), kMagic, 4) != 0) bad_field("magic", "expected \"DSW1\"");
  if (b.size() < kHeaderSize) bad_field("version", "truncated header");
  std::uint32_t version = 0;
  for (int i = 0; i < 4; ++i) version |= static_cast<std::uint32_t>(b[4 + i]) << (8 * i);
  if (version != 1) bad_field("version", "unsupported version " + std::to_string(version));
  std::uint64_t mlen = 0;
  for (int i = 0; i < 8; ++i) mlen |= static_cast<std::uint64_t>(b[8 + i]) << (8 * i);
  if (mlen > b.size() - kHeaderSize) bad_field("manifest_length", "runs past the end of the stream");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(b.begin() + kHeaderSize, b.begin() + kHeaderSize + static_cast<std::ptrdiff_t>(mlen));
  } catch (const nlohmann::json::exception& e) {
    bad_field("manifest", std::string("invalid JSON: ") + e.what());
  }
  if (!manifest.is_array()) bad_field("manifest", "expected a JSON array");

  const std::span<const std::uint8_t> payload = b.subspan(kHeaderSize + mlen);
  struct Extent {
    std::uint64_t begin, end;
    std::string name;
  };
  std::vector<Extent> extents;
  std::map<std::string, Tensor> tensors;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest[i];
    const std::string where = "manifest[" + std::to_string(i) + "]";
    if (!e.is_object()) bad_field(where, "expected an object");
    if (!e.contains("name") || !e["name"].is_string()) bad_field(where + ".name", "missing or not a string");
    const std::string name = e["name"].get<std::string>();
    if (!e.contains("dtype") || e["dtype"] != "f32le") bad_field(where + ".dtype", "tensor '" + name + "' must be \"f32le\"");
    if (!e.contains("shape") || !e["shape"].is_array()) bad_field(where + ".shape", "tensor '" + name + "' needs an integer array");
    if (!e.contains("offset") || !e["offset"].is_number_unsigned())
      bad_field(where + ".offset", "tensor '" + name + "' needs a non-negative integer offset");
    Tensor t;
    for (const auto& d : e["shape"]) {
      if (!d.is_number_integer() || d.get<std::int64_t>() < 0)
        bad_field(where + ".shape", "tensor '" + name + "' has a non-integer or negative dimension");
      t.shape.push_back(d.get<std::int64_t>());
    }
    const std::uint64_t offset = e["offset"].get<std::uint64_t>();
    const std::uint64_t bytes = static_cast<std::uint64_t>(t.numel()) * 4;
    if (offset > payload.size() || bytes > payload.size() - offset)
      bad_field(where + ".offset", "tensor '" + name + "' runs past the end of the payload");
    if (tensors.count(name)) bad_field(where + ".name", "duplicate tensor '" + name + "'");
    t.data.resize(static_cast<std::size_t>(t.numel()));
    for (std::size_t k = 0; k < t.data.size(); ++k) {
      std::uint32_t bits = 0;
      for (int j = 0; j < 4; ++j) bits |= static_cast<std::uint32_t>(payload[offset + 4 * k + j]) << (8 * j);
      t.data[k] = std::bit_cast<float>(bits);
    }
    extents.push_back({offset, offset + bytes, name});
    tensors.emplace(name, std::move(t));
  }

  std::sort(extents.begin(), extents.end(), [](const Extent& a, const Extent& c) { return a.begin < c.begin; });
  std::uint64_t cursor = 0;
  for (const auto& ex : extents) {
    if (ex.begin < cursor) bad_field("offset", "tensor '" + ex.name + "' overlaps the previous tensor");
    if (ex.begin > cursor) bad_field("offset", "gap of " + std::to_string(ex.begin - cursor) + " bytes before tensor '" + ex.name + "'");
    cursor = ex.end;
  }
  if (cursor != payload.size())
    bad_field("payload", std::to_string(payload.size() - cursor) + " trailing bytes not covered by the manifest");

  WeightStore store(std::move(tensors));
  if (expected) store.validate(*expected);
  return store;
}

void save_weights(const std::filesystem::path& path, const WeightStore& store) {
  write_file(path, encode_weights(store));
}

WeightStore load_weights(const std::filesystem::path& path, const LayerManifest* expected) {
  auto bytes = read_file(path);
  try {
    return decode_weights(bytes, expected);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ManifestError& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
}

}  // namespace docrect
