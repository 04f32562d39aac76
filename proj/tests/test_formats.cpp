#include <doctest.h>

#include <cstring>

#include "docrect/error.hpp"
#include "docrect/flow_io.hpp"
#include "docrect/rectnet.hpp"
#include "docrect/weights.hpp"
#include "support.hpp"

using namespace docrect;

namespace {

std::string format_error(const std::vector<std::uint8_t>& bytes, bool weights) {
  try {
    if (weights)
      decode_weights(bytes);
    else
      decode_flow(bytes);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

WeightStore small_store() {
  std::mt19937 rng(1);
  std::map<std::string, Tensor> m;
  m["a.weight"] = testing::random_tensor(rng, {2, 3, 3, 3});
  m["a.bias"] = testing::random_tensor(rng, {2});
  m["b.scalar"] = Tensor{{}, {0.5f}};
  return WeightStore(std::move(m));
}

}  // namespace

TEST_CASE("DSFL layout and round trip") {
  std::mt19937 rng(2);
  FlowField f(3, 5, FlowDirection::forward, 3, 5);
  std::uniform_real_distribution<float> d(-100.f, 100.f);
  for (auto& u : f.u) u = d(rng);
  for (auto& v : f.v) v = d(rng);
  f.u[0] = -0.0f;
  f.v[1] = 1e-40f;  // denormal survives

  const auto bytes = encode_flow(f);
  REQUIRE(bytes.size() == 4 + 4 + 1 + 4 + 4 + 15 * 8);
  CHECK(std::memcmp(bytes.data(), "DSFL", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);
  CHECK(bytes[9] == 3);
  CHECK(bytes[13] == 5);
  float first;
  std::memcpy(&first, bytes.data() + 17, 4);
  CHECK(std::signbit(first));

  const FlowField back = decode_flow(bytes);
  CHECK(back.direction == FlowDirection::forward);
  CHECK(std::memcmp(back.u.data(), f.u.data(), f.u.size() * 4) == 0);
  CHECK(std::memcmp(back.v.data(), f.v.data(), f.v.size() * 4) == 0);
  CHECK(encode_flow(back) == bytes);

  const auto dir = testing::temp_dir("formats");
  write_flow(dir / "f.dsfl", f);
  CHECK(encode_flow(read_flow(dir / "f.dsfl")) == bytes);
}

TEST_CASE("DSFL version 2 carries semantics") {
  DsflRecord r;
  r.version = 2;
  r.semantics = DsflSemantics::displacement;
  r.direction = FlowDirection::forward;
  r.height = 1;
  r.width = 2;
  r.pairs = {1, 2, 3, 4};
  const auto bytes = encode_dsfl(r);
  CHECK(bytes.size() == 4 + 4 + 1 + 1 + 8 + 16);
  const DsflRecord back = decode_dsfl(bytes);
  CHECK(back.semantics == DsflSemantics::displacement);
  CHECK(back.pairs == r.pairs);
  CHECK_THROWS_AS(decode_flow(bytes), FormatError);
}

TEST_CASE("DSFL corruption names the field") {
  const auto good = encode_flow(identity_flow(2, 2));
  auto bad = good;
  bad[0] = 'X';
  CHECK(format_error(bad, false).find("'magic'") != std::string::npos);
  bad = good;
  bad[4] = 9;
  CHECK(format_error(bad, false).find("'version'") != std::string::npos);
  bad = good;
  bad[8] = 7;
  CHECK(format_error(bad, false).find("'direction'") != std::string::npos);
  bad = good;
  bad.pop_back();
  CHECK(format_error(bad, false).find("'payload'") != std::string::npos);
  bad = std::vector<std::uint8_t>(good.begin(), good.begin() + 11);
  CHECK(format_error(bad, false).find("'height'") != std::string::npos);
}

TEST_CASE("DSW1 round trip is bit-exact") {
  const WeightStore s = small_store();
  const auto bytes = encode_weights(s);
  CHECK(std::memcmp(bytes.data(), "DSW1", 4) == 0);
  const WeightStore back = decode_weights(bytes);
  CHECK(back.size() == s.size());
  for (const auto& [name, t] : s.tensors()) {
    CHECK(back.get(name).shape == t.shape);
    CHECK(std::memcmp(back.get(name).data.data(), t.data.data(), t.data.size() * 4) == 0);
  }
  CHECK(encode_weights(back) == bytes);
}

TEST_CASE("DSW1 network container round trip and manifest check") {
  const WeightStore s = random_weights(rectnet_manifest(), 42);
  const auto bytes = encode_weights(s);
  const WeightStore back = decode_weights(bytes, &rectnet_manifest());
  CHECK(back.parameter_count() == s.parameter_count());
  CHECK(encode_weights(back) == bytes);

  CHECK(random_weights(rectnet_manifest(), 42).get("gru.z.weight").data == s.get("gru.z.weight").data);
  CHECK(random_weights(rectnet_manifest(), 43).get("gru.z.weight").data != s.get("gru.z.weight").data);
}

TEST_CASE("DSW1 rejects malformed containers") {
  const auto good = encode_weights(small_store());
  auto bad = good;
  bad[1] = 'Z';
  CHECK(format_error(bad, true).find("'magic'") != std::string::npos);
  bad = good;
  bad[4] = 2;
  CHECK(format_error(bad, true).find("'version'") != std::string::npos);
  bad = good;
  bad[16] = '{';
  CHECK(format_error(bad, true).find("'manifest'") != std::string::npos);
  bad = good;
  bad.push_back(0);
  CHECK(format_error(bad, true).find("'payload'") != std::string::npos);
  bad = good;
  bad[8] = 0xff;
  bad[9] = 0xff;
  CHECK(format_error(bad, true).find("'manifest_length'") != std::string::npos);

  // A hand-built manifest with a gap between tensors.
  const std::string manifest =
      R"([{"name":"a","shape":[1],"offset":0,"dtype":"f32le"},{"name":"b","shape":[1],"offset":8,"dtype":"f32le"}])";
  std::vector<std::uint8_t> gap = {'D', 'S', 'W', '1', 1, 0, 0, 0};
  for (int i = 0; i < 8; ++i) gap.push_back(static_cast<std::uint8_t>(manifest.size() >> (8 * i)));
  gap.insert(gap.end(), manifest.begin(), manifest.end());
  gap.resize(gap.size() + 12, 0);
  CHECK(format_error(gap, true).find("gap") != std::string::npos);

  const std::string f16 = R"([{"name":"a","shape":[1],"offset":0,"dtype":"f16"}])";
  std::vector<std::uint8_t> dt = {'D', 'S', 'W', '1', 1, 0, 0, 0};
  for (int i = 0; i < 8; ++i) dt.push_back(static_cast<std::uint8_t>(f16.size() >> (8 * i)));
  dt.insert(dt.end(), f16.begin(), f16.end());
  dt.resize(dt.size() + 4, 0);
  CHECK(format_error(dt, true).find("dtype") != std::string::npos);
}

TEST_CASE("manifest mismatches list every problem") {
  std::map<std::string, Tensor> m = zero_weights(rectnet_manifest()).tensors();
  m.erase("gru.z.weight");
  m["head.conv2.bias"] = Tensor{{3}, {0, 0, 0}};
  m["extra.tensor"] = Tensor{{1}, {0}};
  const auto bytes = encode_weights(WeightStore(std::move(m)));
  try {
    decode_weights(bytes, &rectnet_manifest());
    FAIL("expected a manifest error");
  } catch (const ManifestError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("missing tensor 'gru.z.weight'") != std::string::npos);
    CHECK(msg.find("'head.conv2.bias' has shape [3]") != std::string::npos);
    CHECK(msg.find("unexpected tensor 'extra.tensor'") != std::string::npos);
  }
}

TEST_CASE("layer manifest shapes") {
  std::map<std::string, std::vector<std::int64_t>> shapes;
  for (const auto& t : rectnet_manifest()) shapes[t.name] = t.shape;
  CHECK(shapes["encoder.stem.weight"] == std::vector<std::int64_t>{64, 3, 7, 7});
  CHECK(shapes["encoder.head.weight"] == std::vector<std::int64_t>{256, 128, 1, 1});
  CHECK(shapes["gen.q2.weight"] == std::vector<std::int64_t>{192, 224, 3, 3});
  CHECK(shapes["gen.v1.weight"] == std::vector<std::int64_t>{128, 2, 7, 7});
  CHECK(shapes["gen.z.weight"] == std::vector<std::int64_t>{126, 256, 3, 3});
  CHECK(shapes["gru.h.weight"] == std::vector<std::int64_t>{128, 384, 3, 3});
  CHECK(shapes["upsample.conv2.weight"] == std::vector<std::int64_t>{576, 256, 1, 1});
  CHECK(shapes.count("encoder.block1.proj.weight") == 0);
  CHECK(shapes["encoder.block4.proj.weight"] == std::vector<std::int64_t>{96, 96, 1, 1});
}
