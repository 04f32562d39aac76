#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace docrect {

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t numel() const;
};

struct TensorSpec {
  std::string name;
  std::vector<std::int64_t> shape;
};

using LayerManifest = std::vector<TensorSpec>;

/// Immutable collection of named float tensors.
class WeightStore {
 public:
  WeightStore() = default;
  /// Throws ManifestError if a tensor's data length disagrees with its shape.
  explicit WeightStore(std::map<std::string, Tensor> tensors);

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  /// Throws ManifestError naming the tensor when absent.
  const Tensor& get(const std::string& name) const;
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }
  std::int64_t parameter_count() const;

  /// Throws ManifestError listing every missing, mis-shaped and unexpected
  /// tensor.
  void validate(const LayerManifest& manifest) const;

 private:
  std::map<std::string, Tensor> tensors_;
};

/// All zeros, shaped per the manifest.
WeightStore zero_weights(const LayerManifest& manifest);

/// Deterministic random weights: He-scaled normal kernels times `gain`,
/// zero biases.
WeightStore random_weights(const LayerManifest& manifest, std::uint64_t seed, float gain = 1.0f);

/// DSW1 container, integers little-endian:
///
///   "DSW1"                 4 bytes magic
///   version                u32 = 1
///   manifest_length        u64, bytes of the manifest that follows
///   manifest               UTF-8 JSON array of
///                          {"name", "shape": [..], "offset": bytes into payload, "dtype": "f32le"}
///   payload                tensors back to back
std::vector<std::uint8_t> encode_weights(const WeightStore& store);

/// Parses a DSW1 stream. Every manifest entry must be well formed and the
/// payload must be tiled exactly (no gaps, overlaps or trailing bytes). When
/// `expected` is given, the store must match it tensor for tensor.
WeightStore decode_weights(std::span<const std::uint8_t> bytes, const LayerManifest* expected = nullptr);

void save_weights(const std::filesystem::path& path, const WeightStore& store);
WeightStore load_weights(const std::filesystem::path& path, const LayerManifest* expected = nullptr);

}  // namespace docrect
