#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "docrect/image.hpp"
#include "docrect/siftflow.hpp"

namespace docrect {

/// Mean Euclidean length of the displacements.
double local_distortion(const DisplacementField& field);

/// Mean of the population standard deviations of every column of dx and
/// every row of dy.
double line_distortion(const DisplacementField& field);

struct MsSsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  int window = 11;
  double sigma = 1.5;
  double dynamic_range = 1.0;
  std::array<double, 5> weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
};

/// Five-level MS-SSIM on luma with valid-mode Gaussian windows. The window
/// shrinks to the level size on small levels. Contrast-structure terms are
/// clamped at zero before exponentiation; the result is clamped to [0,1].
double ms_ssim(const ImagePlane& a, const ImagePlane& b, const MsSsimParams& params = {});

struct EditCounts {
  long deletions = 0;
  long insertions = 0;
  long substitutions = 0;
  long distance = 0;
};

/// NFC, runs of whitespace collapsed to one space, leading and trailing
/// whitespace removed. Throws FormatError on invalid UTF-8.
std::u32string normalize_text(const std::string& utf8);

/// Levenshtein distance turning hyp into ref, with the operation counts of
/// one optimal alignment.
EditCounts edit_distance(const std::u32string& hyp, const std::u32string& ref);
EditCounts edit_distance(const std::string& hyp, const std::string& ref);

/// distance / |ref| on normalised text. Throws ParameterError for an empty
/// reference.
double cer(const std::u32string& hyp, const std::u32string& ref);
double cer(const std::string& hyp, const std::string& ref);

struct EvalParams {
  long long target_area = 598400;
  MsSsimParams ssim;
  SiftParams sift;
  SiftFlowParams flow;
};

struct MetricRow {
  std::string id;
  double ms_ssim = 0.0;
  double ld = 0.0;
  double li_d = 0.0;
  std::optional<EditCounts> ed;
  std::optional<double> cer;
  std::optional<std::string> error;
};

/// Area-normalises the ground truth, resizes the rectified image to the same
/// extent, matches ground truth to rectified and scores both images. Text
/// metrics are filled when both texts are present.
MetricRow evaluate_pair(const ImagePlane& gt, const ImagePlane& rectified, const std::optional<std::string>& gt_text,
                        const std::optional<std::string>& hyp_text, const EvalParams& params = {});

struct MetricAggregate {
  std::size_t images = 0;       // rows without error
  std::size_t text_images = 0;  // rows with text metrics
  std::size_t failed = 0;
  double ms_ssim = 0.0;
  double ld = 0.0;
  double li_d = 0.0;
  double ed = 0.0;
  double cer = 0.0;
};

MetricAggregate aggregate(const std::vector<MetricRow>& rows);

struct MetricReport {
  std::vector<MetricRow> rows;  // sorted by id
  MetricAggregate mean;
  EvalParams params;
};

MetricReport make_report(std::vector<MetricRow> rows, const EvalParams& params);
std::string report_json(const MetricReport& report);
std::string report_csv(const MetricReport& report);
/// "MS-SSIM x LD x Li-D x ED x CER x"
std::string summary_line(const MetricAggregate& mean);

}  // namespace docrect
