#include <doctest.h>

#include <json.hpp>

#include "docrect/error.hpp"
#include "docrect/flow.hpp"
#include "docrect/metrics.hpp"
#include "support.hpp"

using namespace docrect;

namespace {

DisplacementField field(int h, int w, std::vector<int> dx, std::vector<int> dy) {
  DisplacementField f(h, w);
  f.dx = std::move(dx);
  f.dy = std::move(dy);
  return f;
}

ImagePlane add_noise(const ImagePlane& img, double sigma, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0, sigma);
  ImagePlane out = img;
  for (float& v : out.data) v = static_cast<float>(std::clamp(v + n(rng), 0.0, 1.0));
  return out;
}

}  // namespace

TEST_CASE("local_distortion") {
  CHECK(local_distortion(DisplacementField(3, 3)) == 0.0);
  CHECK(local_distortion(field(2, 2, {3, 3, 3, 3}, {4, 4, 4, 4})) == 5.0);
  CHECK(local_distortion(field(1, 2, {0, 3}, {0, 4})) == 2.5);
  const DisplacementField f = field(1, 3, {1, -2, 0}, {2, 2, -1});
  DisplacementField g = f;
  for (auto& v : g.dx) v *= 3;
  for (auto& v : g.dy) v *= 3;
  CHECK(local_distortion(g) == doctest::Approx(3 * local_distortion(f)).epsilon(1e-14));
  CHECK_THROWS_AS(local_distortion(DisplacementField()), ParameterError);
}

TEST_CASE("line_distortion") {
  CHECK(line_distortion(field(2, 2, {0, 0, 2, 2}, {0, 0, 0, 0})) == 0.5);
  CHECK(line_distortion(field(3, 4, std::vector<int>(12, -7), std::vector<int>(12, 4))) == 0.0);

  std::mt19937 rng(31);
  std::uniform_int_distribution<int> d(-20, 20);
  SUBCASE("scaling pattern gives exactly zero") {
    DisplacementField f(9, 13);
    std::vector<int> col(13), row(9);
    for (int& v : col) v = d(rng);
    for (int& v : row) v = d(rng);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 13; ++x) {
        f.dx[y * 13 + x] = col[x];
        f.dy[y * 13 + x] = row[y];
      }
    CHECK(line_distortion(f) == 0.0);
  }
  SUBCASE("adding constants leaves a general field unchanged") {
    DisplacementField f(7, 5);
    for (auto& v : f.dx) v = d(rng);
    for (auto& v : f.dy) v = d(rng);
    DisplacementField g = f;
    for (auto& v : g.dx) v += 11;
    for (auto& v : g.dy) v -= 6;
    CHECK(line_distortion(g) == doctest::Approx(line_distortion(f)).epsilon(1e-12));
    CHECK(line_distortion(f) > 0);
  }
  CHECK_THROWS_AS(line_distortion(DisplacementField()), ParameterError);
}

TEST_CASE("ms_ssim") {
  const ImagePlane img = testing::texture(256, 256, 32);
  CHECK(std::fabs(ms_ssim(img, img) - 1.0) <= 1e-9);
  const ImagePlane n05 = add_noise(img, 0.05, 1), n10 = add_noise(img, 0.1, 2);
  const double s05 = ms_ssim(img, n05), s10 = ms_ssim(img, n10);
  CHECK(s10 < s05);
  CHECK(s05 < 1.0);
  CHECK(s10 >= 0.0);
  CHECK(std::fabs(ms_ssim(n05, img) - ms_ssim(img, n05)) <= 1e-12);
  CHECK_THROWS_AS(ms_ssim(img, testing::texture(256, 250, 1)), ShapeError);

  const MsSsimParams p;
  CHECK(p.weights == std::array<double, 5>{0.0448, 0.2856, 0.3001, 0.2363, 0.1333});
  CHECK(p.weights[0] + p.weights[1] + p.weights[2] + p.weights[3] + p.weights[4] == doctest::Approx(1.0001));

  // Small inputs shrink the window instead of failing.
  const ImagePlane small = testing::texture(40, 30, 33);
  CHECK(std::fabs(ms_ssim(small, small) - 1.0) <= 1e-9);
}

TEST_CASE("edit distance examples") {
  const EditCounts same = edit_distance(std::string("abc"), std::string("abc"));
  CHECK(same.distance == 0);
  CHECK(same.insertions + same.deletions + same.substitutions == 0);
  const EditCounts empty = edit_distance(std::string(""), std::string("abc"));
  CHECK(empty.deletions == 0);
  CHECK(empty.insertions == 3);
  CHECK(empty.substitutions == 0);
  CHECK(empty.distance == 3);
  const EditCounts kit = edit_distance(std::string("kitten"), std::string("sitting"));
  CHECK(kit.distance == 3);
  CHECK(kit.substitutions == 2);
  CHECK(kit.insertions == 1);
  CHECK(kit.deletions == 0);

  CHECK(cer(std::string("abc"), std::string("abc")) == 0.0);
  CHECK(cer(std::string("abd"), std::string("abc")) == 1.0 / 3.0);
  CHECK(cer(std::string("kitten"), std::string("sitting")) == 3.0 / 7.0);
  CHECK_THROWS_AS(cer(std::string("x"), std::string("  ")), ParameterError);
}

TEST_CASE("edit distance equals the recursive oracle on short strings") {
  const auto strings = testing::all_strings(U"abc", 5);
  REQUIRE(strings.size() == 364);
  for (const auto& a : strings)
    for (const auto& b : strings) {
      const EditCounts e = edit_distance(a, b);
      REQUIRE(e.distance == testing::recursive_edit_distance(a, b));
      REQUIRE(e.deletions + e.insertions + e.substitutions == e.distance);
      REQUIRE(static_cast<long>(b.size()) - static_cast<long>(a.size()) == e.insertions - e.deletions);
    }
}

TEST_CASE("edit distance is a metric") {
  std::mt19937 rng(34);
  const auto strings = testing::all_strings(U"abcd", 4);
  std::uniform_int_distribution<std::size_t> pick(0, strings.size() - 1);
  for (int t = 0; t < 3000; ++t) {
    const auto &a = strings[pick(rng)], &b = strings[pick(rng)], &c = strings[pick(rng)];
    const long ab = edit_distance(a, b).distance;
    CHECK(ab == edit_distance(b, a).distance);
    CHECK(ab <= edit_distance(a, c).distance + edit_distance(c, b).distance);
    CHECK((ab == 0) == (a == b));
  }
}

TEST_CASE("text normalisation") {
  CHECK(normalize_text("  a \t\n b  ") == U"a b");
  CHECK(normalize_text("e\xCC\x81") == U"é");  // e + combining acute
  CHECK(normalize_text("x\xC2\xA0y") == U"x y");    // no-break space collapses
  CHECK(edit_distance(std::string("caf\xC3\xA9"), std::string("cafe\xCC\x81")).distance == 0);
  CHECK_THROWS_AS(normalize_text("a\xFF" "b"), FormatError);
  CHECK_THROWS_AS(normalize_text("\xC3"), FormatError);
}

TEST_CASE("evaluate_pair") {
  const ImagePlane tex = testing::texture(160, 160, 35);
  const ImagePlane gt = testing::crop(tex, 10, 10, 120, 120);
  EvalParams p;
  p.target_area = 120 * 120;

  SUBCASE("perfect rectification") {
    const MetricRow r = evaluate_pair(gt, gt, std::string("hello world"), std::string("hello  world"), p);
    CHECK(r.ld <= 0.05);
    CHECK(r.li_d <= 0.05);
    CHECK(std::fabs(r.ms_ssim - 1.0) <= 1e-9);
    REQUIRE(r.ed.has_value());
    CHECK(r.ed->distance == 0);
    CHECK(*r.cer == 0.0);
  }
  SUBCASE("4 px translation") {
    const ImagePlane rect = testing::crop(tex, 10, 14, 120, 120);
    const MetricRow r = evaluate_pair(gt, rect, std::nullopt, std::nullopt, p);
    CHECK(r.ld == doctest::Approx(4.0).epsilon(0.125));
    CHECK(r.li_d <= 0.2);
    CHECK_FALSE(r.ed.has_value());
  }
  SUBCASE("a distorted image scores worse than a self-pair") {
    FlowField wave = identity_flow(120, 120);
    for (int y = 0; y < 120; ++y)
      for (int x = 0; x < 120; ++x) {
        wave.u[wave.index(y, x)] += 3.f * std::sin(y / 9.f);
        wave.v[wave.index(y, x)] += 3.f * std::sin(x / 11.f);
      }
    const ImagePlane bent = apply_backward_flow(gt, wave);
    const MetricRow self = evaluate_pair(gt, gt, std::nullopt, std::nullopt, p);
    const MetricRow bad = evaluate_pair(gt, bent, std::nullopt, std::nullopt, p);
    CHECK(bad.ms_ssim < self.ms_ssim);
    CHECK(bad.ld > self.ld);
    CHECK(bad.li_d > self.li_d);
  }
  SUBCASE("rectified image is resized to the ground truth extent") {
    const ImagePlane big = resize_bilinear(gt, 240, 240);
    const MetricRow r = evaluate_pair(gt, big, std::nullopt, std::nullopt, p);
    CHECK(r.ms_ssim > 0.8);
  }
}

TEST_CASE("reports") {
  MetricRow a{"b", 0.5, 2.0, 1.0, EditCounts{1, 0, 1, 2}, 0.25, std::nullopt};
  MetricRow b{"a", 0.7, 4.0, 3.0, std::nullopt, std::nullopt, std::nullopt};
  MetricRow c{"c", 0, 0, 0, std::nullopt, std::nullopt, std::string("decode failed")};
  const MetricReport rep = make_report({a, b, c}, EvalParams{});
  CHECK(rep.rows[0].id == "a");
  CHECK(rep.mean.images == 2);
  CHECK(rep.mean.failed == 1);
  CHECK(rep.mean.text_images == 1);
  CHECK(rep.mean.ms_ssim == doctest::Approx(0.6));
  CHECK(rep.mean.ld == doctest::Approx(3.0));
  CHECK(rep.mean.li_d == doctest::Approx(2.0));
  CHECK(rep.mean.ed == doctest::Approx(2.0));
  CHECK(rep.mean.cer == doctest::Approx(0.25));

  const auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j["config"]["ms_ssim"]["weights"] == nlohmann::json({0.0448, 0.2856, 0.3001, 0.2363, 0.1333}));
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][2]["error"] == "decode failed");
  CHECK(j["aggregate"]["ld"] == 3.0);

  const std::string csv = report_csv(rep);
  CHECK(csv.rfind("id,ms_ssim,ld,li_d,ed,cer,error\n", 0) == 0);
  CHECK(csv.find("\nmean,") != std::string::npos);
  CHECK(csv.find("c,,,,,,decode failed") != std::string::npos);

  CHECK(summary_line(rep.mean) == "MS-SSIM 0.6000 LD 3.0000 Li-D 2.0000 ED 2.0000 CER 0.2500");
  MetricAggregate no_text;
  CHECK(summary_line(no_text).find("ED n/a CER n/a") != std::string::npos);
}
