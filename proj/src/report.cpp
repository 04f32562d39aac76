#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "docrect/metrics.hpp"

namespace docrect {

namespace {

nlohmann::json config_json(const EvalParams& p) {
  return {
      {"target_area", p.target_area},
      {"ms_ssim",
       {{"k1", p.ssim.k1},
        {"k2", p.ssim.k2},
        {"window", p.ssim.window},
        {"sigma", p.ssim.sigma},
        {"dynamic_range", p.ssim.dynamic_range},
        {"weights", p.ssim.weights}}},
      {"sift", {{"cell_size", p.sift.cell_size}}},
      {"sift_flow",
       {{"descriptor_scale", p.flow.descriptor_scale},
        {"data_truncation", p.flow.data_truncation},
        {"eta", p.flow.eta},
        {"alpha", p.flow.alpha},
        {"smooth_truncation", p.flow.smooth_truncation},
        {"top_radius", p.flow.top_radius},
        {"radius", p.flow.radius},
        {"iterations", p.flow.iterations},
        {"min_level_size", p.flow.min_level_size}}},
      {"text_normalization", "NFC, whitespace collapsed, trimmed"},
  };
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

MetricReport make_report(std::vector<MetricRow> rows, const EvalParams& params) {
  std::sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) { return a.id < b.id; });
  MetricReport r{std::move(rows), {}, params};
  r.mean = aggregate(r.rows);
  return r;
}

std::string report_json(const MetricReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"id", r.id}};
    if (r.error) {
      j["error"] = *r.error;
    } else {
      j["ms_ssim"] = r.ms_ssim;
      j["ld"] = r.ld;
      j["li_d"] = r.li_d;
      if (r.ed) {
        j["ed"] = r.ed->distance;
        j["deletions"] = r.ed->deletions;
        j["insertions"] = r.ed->insertions;
        j["substitutions"] = r.ed->substitutions;
      }
      if (r.cer) j["cer"] = *r.cer;
    }
    rows.push_back(std::move(j));
  }
  const auto& m = report.mean;
  nlohmann::json agg = {{"images", m.images},   {"failed", m.failed}, {"ms_ssim", m.ms_ssim},
                        {"ld", m.ld},           {"li_d", m.li_d},     {"text_images", m.text_images}};
  if (m.text_images) {
    agg["ed"] = m.ed;
    agg["cer"] = m.cer;
  }
  nlohmann::json doc = {{"config", config_json(report.params)}, {"rows", rows}, {"aggregate", agg}};
  return doc.dump(2) + "\n";
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "id,ms_ssim,ld,li_d,ed,cer,error\n";
  for (const auto& r : report.rows) {
    os << csv_field(r.id) << ",";
    if (r.error) {
      os << ",,,,," << csv_field(*r.error) << "\n";
      continue;
    }
    os << r.ms_ssim << "," << r.ld << "," << r.li_d << ",";
    if (r.ed) os << r.ed->distance;
    os << ",";
    if (r.cer) os << *r.cer;
    os << ",\n";
  }
  const auto& m = report.mean;
  os << "mean," << m.ms_ssim << "," << m.ld << "," << m.li_d << ",";
  if (m.text_images) os << m.ed << "," << m.cer;
  else os << ",";
  os << ",\n";
  return os.str();
}

std::string summary_line(const MetricAggregate& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "MS-SSIM " << m.ms_ssim << " LD " << m.ld << " Li-D " << m.li_d;
  if (m.text_images) os << " ED " << m.ed << " CER " << m.cer;
  else os << " ED n/a CER n/a";
  return os.str();
}

}  // namespace docrect
