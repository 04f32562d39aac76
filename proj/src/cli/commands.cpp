#include "docrect/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "docrect/codec.hpp"
#include "docrect/flow.hpp"
#include "docrect/flow_io.hpp"
#include "docrect/losses.hpp"
#include "docrect/metrics.hpp"
#include "docrect/rectnet.hpp"
#include "docrect/siftflow.hpp"
#include "docrect/weights.hpp"

namespace fs = std::filesystem;

namespace docrect {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter:
    case ErrorKind::semantics: return 2;
    case ErrorKind::shape:
    case ErrorKind::format:
    case ErrorKind::manifest:
    case ErrorKind::conversion: return 3;
    case ErrorKind::internal: return 4;
  }
  return 4;
}

namespace {

std::string numbered(const char* prefix, int k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d%s", prefix, k, ext);
  return buf;
}

std::optional<std::string> read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::map<std::string, fs::path> images_by_stem(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ParameterError("not a directory: '" + dir.string() + "'");
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_image(e.path())) out[e.path().stem().string()] = e.path();
  return out;
}

// ---------------------------------------------------------------- warp

struct WarpArgs {
  std::string image, flow, out;
};

int cmd_warp(const WarpArgs& a, std::ostream& out) {
  const ImagePlane img = read_image(a.image);
  FlowField flow = read_flow(a.flow);
  if (flow.direction != FlowDirection::backward)
    throw SemanticsError(a.flow + ": flow direction must be backward (DSFL field 'direction' is forward)");
  flow.source_height = img.height;
  flow.source_width = img.width;
  const ImagePlane warped = apply_backward_flow(img, flow);
  write_image(a.out, warped);
  out << "warped " << img.width << "x" << img.height << " -> " << warped.width << "x" << warped.height << " "
      << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------- rectify

struct RectifyArgs {
  std::string image, weights, out, mask, trace;
  int iters = 12;
  float tau = 0.5f;
  bool output_masked = false;
};

int cmd_rectify(const RectifyArgs& a, std::ostream& out) {
  if (a.iters < 1) throw ParameterError("--iters must be >= 1, got " + std::to_string(a.iters));
  if (!(a.tau > 0.0f && a.tau < 1.0f)) throw ParameterError("--tau must lie in (0,1)");
  const WeightStore weights = load_weights(a.weights, &rectnet_manifest());
  const ImagePlane img = read_image(a.image);
  std::optional<ConfidenceMap> conf;
  if (!a.mask.empty()) conf = ConfidenceMap::from_image(read_image(a.mask));

  RectifyOptions opt;
  opt.iterations = a.iters;
  opt.tau = a.tau;
  opt.warp_masked = a.output_masked;
  opt.keep_flows = false;

  const ImagePlane* preview_src = &img;
  ImagePlane masked_copy;
  if (!a.trace.empty()) {
    fs::create_directories(a.trace);
    if (a.output_masked && conf) {
      masked_copy = apply_document_mask(img, *conf, a.tau).image;
      preview_src = &masked_copy;
    }
    const double scale = std::min(1.0, 512.0 / std::max(img.height, img.width));
    const int ph = std::max(1, static_cast<int>(std::lround(img.height * scale)));
    const int pw = std::max(1, static_cast<int>(std::lround(img.width * scale)));
    const fs::path dir = a.trace;
    opt.observer = [&, dir, ph, pw](int k, const FlowField& f, const ResidualFlow&) {
      write_flow(dir / numbered("flow", k, ".dsfl"), resize_flow(f, img.height, img.width, img.height, img.width));
      write_image(dir / numbered("preview", k, ".png"),
                  apply_backward_flow(*preview_src, resize_flow(f, ph, pw, img.height, img.width)));
    };
  }

  const RectifyResult res = rectify_image(img, conf, weights, opt);
  write_image(a.out, res.rectified);
  out << "rectified " << img.width << "x" << img.height << " in " << a.iters << " iterations -> " << a.out;
  if (!a.trace.empty()) out << " (trace: " << a.iters << " flows in " << a.trace << ")";
  out << "\n";
  return 0;
}

// -------------------------------------------------------- flow-convert

struct ConvertArgs {
  std::string forward, out;
  int max_sweeps = 1000;
  double min_coverage = 0.01;
};

int cmd_flow_convert(const ConvertArgs& a, std::ostream& out) {
  const FlowField fwd = read_flow(a.forward);
  if (fwd.direction != FlowDirection::forward)
    throw SemanticsError(a.forward + ": flow direction must be forward (DSFL field 'direction' is backward)");
  InversionOptions opt;
  opt.max_fill_sweeps = a.max_sweeps;
  opt.min_coverage = a.min_coverage;
  const InversionResult inv = forward_to_backward(fwd, opt);
  write_flow(a.out, inv.backward);

  // Round trip: distorted pixel -> rectified coordinate -> back through the
  // backward flow. Border pixels are skipped.
  double sum = 0.0, worst = 0.0;
  std::size_t count = 0;
  for (int y = 1; y + 1 < fwd.height; ++y)
    for (int x = 1; x + 1 < fwd.width; ++x) {
      const std::size_t i = fwd.index(y, x);
      const float bx = bilinear_sample(inv.backward.u, inv.backward.height, inv.backward.width, fwd.u[i], fwd.v[i]);
      const float by = bilinear_sample(inv.backward.v, inv.backward.height, inv.backward.width, fwd.u[i], fwd.v[i]);
      const double e = std::hypot(bx - x, by - y);
      sum += e;
      worst = std::max(worst, e);
      ++count;
    }
  out << std::fixed << std::setprecision(2) << "coverage " << 100.0 * inv.coverage << "% filled in "
      << inv.fill_sweeps << " sweeps; round-trip error mean " << std::setprecision(4) << (count ? sum / count : 0.0)
      << " px, max " << worst << " px; wrote " << inv.backward.width << "x" << inv.backward.height
      << " backward flow to " << a.out << "\n";
  return 0;
}

// --------------------------------------------------------------- match

struct MatchArgs {
  std::string gt, rect, out;
  long long area = 598400;
};

int cmd_match(const MatchArgs& a, std::ostream& out) {
  if (a.area < 1) throw ParameterError("--area must be positive");
  const ImagePlane g = resize_to_area(to_gray(read_image(a.gt)), a.area);
  const ImagePlane r = resize_bilinear(to_gray(read_image(a.rect)), g.height, g.width);
  const DisplacementField field = sift_flow_match(dense_sift(g), dense_sift(r));
  write_displacement(a.out, field);
  out << std::fixed << std::setprecision(4) << "LD " << local_distortion(field) << " Li-D " << line_distortion(field)
      << " on " << field.width << "x" << field.height << " -> " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred_dir, gt_dir, text_pred_dir, text_gt_dir, report, format = "json", pairs;
  int workers = 0;
};

struct PairJob {
  std::string id;
  fs::path pred, gt;
  std::optional<fs::path> hyp_text, gt_text;
};

std::vector<PairJob> collect_pairs(const EvalArgs& a, std::ostream& err) {
  std::vector<PairJob> jobs;
  auto add_text = [&](PairJob& j, const std::string& pred_stem, const std::string& gt_stem) {
    if (a.text_pred_dir.empty() || a.text_gt_dir.empty()) return;
    const fs::path hp = fs::path(a.text_pred_dir) / (pred_stem + ".txt");
    const fs::path gp = fs::path(a.text_gt_dir) / (gt_stem + ".txt");
    if (fs::exists(hp) && fs::exists(gp)) {
      j.hyp_text = hp;
      j.gt_text = gp;
    } else {
      err << "no text pair for '" << j.id << "'\n";
    }
  };
  if (!a.pairs.empty()) {
    std::ifstream in(a.pairs);
    if (!in) throw FormatError("cannot open pairs file '" + a.pairs + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string pred, gt;
      if (!(ls >> pred >> gt)) throw FormatError(a.pairs + ":" + std::to_string(lineno) + ": expected 'PRED GT'");
      PairJob j{fs::path(pred).stem().string(), fs::path(a.pred_dir) / pred, fs::path(a.gt_dir) / gt, {}, {}};
      add_text(j, fs::path(pred).stem().string(), fs::path(gt).stem().string());
      jobs.push_back(std::move(j));
    }
    return jobs;
  }
  const auto preds = images_by_stem(a.pred_dir);
  const auto gts = images_by_stem(a.gt_dir);
  for (const auto& [stem, path] : preds) {
    auto it = gts.find(stem);
    if (it == gts.end()) {
      err << "unmatched prediction: " << path.string() << "\n";
      continue;
    }
    PairJob j{stem, path, it->second, {}, {}};
    add_text(j, stem, stem);
    jobs.push_back(std::move(j));
  }
  for (const auto& [stem, path] : gts)
    if (!preds.count(stem)) err << "unmatched ground truth: " << path.string() << "\n";
  return jobs;
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv("DOCRECT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ParameterError("DOCRECT_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (a.format != "json" && a.format != "csv") throw ParameterError("--format must be json or csv");
  if (a.workers < 0) throw ParameterError("--workers must be >= 1");
  if (a.text_pred_dir.empty() != a.text_gt_dir.empty())
    throw ParameterError("--text-pred-dir and --text-gt-dir must be given together");
  const int workers = resolve_workers(a.workers);
  const std::vector<PairJob> jobs = collect_pairs(a, err);
  if (jobs.empty()) throw ParameterError("no pairs");

  const EvalParams params;
  std::vector<MetricRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      const PairJob& j = jobs[i];
      try {
        std::optional<std::string> gt_text, hyp_text;
        if (j.gt_text) gt_text = read_text(*j.gt_text);
        if (j.hyp_text) hyp_text = read_text(*j.hyp_text);
        rows[i] = evaluate_pair(read_image(j.gt), read_image(j.pred), gt_text, hyp_text, params);
      } catch (const std::exception& e) {
        rows[i] = MetricRow{};
        rows[i].error = e.what();
      }
      rows[i].id = j.id;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min<int>(workers, static_cast<int>(jobs.size())); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  const MetricReport report = make_report(std::move(rows), params);
  for (const auto& r : report.rows)
    if (r.error) err << "pair '" << r.id << "' failed: " << *r.error << "\n";
  if (!a.report.empty()) {
    const std::string text = a.format == "json" ? report_json(report) : report_csv(report);
    write_file(a.report, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  out << summary_line(report.mean) << "\n";
  return report.mean.failed ? 3 : 0;
}

// ----------------------------------------------------------- eval-loss

struct LossArgs {
  std::string trace, gt_backward, gt_forward;
  double lambda = 0.85, alpha = 0.5;
};

int cmd_eval_loss(const LossArgs& a, std::ostream& out) {
  std::vector<fs::path> files;
  if (!fs::is_directory(a.trace)) throw ParameterError("not a directory: '" + a.trace + "'");
  for (const auto& e : fs::directory_iterator(a.trace)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("flow_", 0) == 0 && e.path().extension() == ".dsfl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParameterError("no flow_*.dsfl files in '" + a.trace + "'");

  const FlowField gt_b = read_flow(a.gt_backward);
  FlowField gt_f = read_flow(a.gt_forward);
  if (gt_b.direction != FlowDirection::backward) throw SemanticsError(a.gt_backward + ": expected a backward flow");
  if (gt_f.direction != FlowDirection::forward) throw SemanticsError(a.gt_forward + ": expected a forward flow");
  gt_f.source_height = gt_b.height;
  gt_f.source_width = gt_b.width;

  std::vector<LossTerms> terms;
  for (const auto& f : files) {
    FlowField pred = read_flow(f);
    pred.source_height = gt_f.height;
    pred.source_width = gt_f.width;
    terms.push_back({l1_flow_loss(pred, gt_b), circle_line_loss(pred, gt_f)});
  }
  const LossBreakdown b = total_loss(terms, a.lambda, a.alpha);
  nlohmann::json j = {{"lambda", b.lambda}, {"alpha", b.alpha}, {"total", b.total}};
  for (const auto& it : b.iterations) j["iterations"].push_back({{"l_f", it.l_f}, {"l_line", it.l_line}, {"combined", it.combined}});
  out << j.dump(2) << "\n";
  return 0;
}

// -------------------------------------------------------- make-weights

struct WeightArgs {
  std::string out;
  bool zero = false;
  std::optional<std::uint64_t> seed;
  float gain = 1.0f;
};

int cmd_make_weights(const WeightArgs& a, std::ostream& out) {
  if (a.zero == a.seed.has_value()) throw ParameterError("give exactly one of --zero or --random SEED");
  const WeightStore store = a.zero ? zero_weights(rectnet_manifest()) : random_weights(rectnet_manifest(), *a.seed, a.gain);
  save_weights(a.out, store);
  out << "wrote " << store.size() << " tensors (" << store.parameter_count() << " parameters) to " << a.out << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document rectification, flow utilities and evaluation metrics", "docrect"};
  app.require_subcommand(1);

  WarpArgs warp;
  auto* c_warp = app.add_subcommand("warp", "Apply a backward DSFL flow to an image");
  c_warp->add_option("image", warp.image)->required();
  c_warp->add_option("flow", warp.flow)->required();
  c_warp->add_option("out", warp.out)->required();

  RectifyArgs rect;
  auto* c_rect = app.add_subcommand("rectify", "Run progressive rectification with a DSW1 weight file");
  c_rect->add_option("image", rect.image)->required();
  c_rect->add_option("weights", rect.weights)->required();
  c_rect->add_option("out", rect.out, "Rectified image (.png or .jpg)")->required();
  c_rect->add_option("--iters", rect.iters, "Refinement iterations K")->capture_default_str();
  c_rect->add_option("--mask", rect.mask, "Confidence map image; pixels below --tau are cleared");
  c_rect->add_option("--tau", rect.tau, "Mask threshold")->capture_default_str();
  c_rect->add_option("--trace", rect.trace, "Directory for per-iteration flows and previews");
  c_rect->add_flag("--output-masked", rect.output_masked, "Warp the masked image instead of the original");

  ConvertArgs conv;
  auto* c_conv = app.add_subcommand("flow-convert", "Invert a forward DSFL flow into a backward one");
  c_conv->add_option("forward", conv.forward)->required();
  c_conv->add_option("out", conv.out)->required();
  c_conv->add_option("--max-sweeps", conv.max_sweeps)->capture_default_str();
  c_conv->add_option("--min-coverage", conv.min_coverage)->capture_default_str();

  MatchArgs match;
  auto* c_match = app.add_subcommand("match", "SIFT-flow match a ground-truth image to a rectified one");
  c_match->add_option("gt", match.gt)->required();
  c_match->add_option("rect", match.rect)->required();
  c_match->add_option("out", match.out, "Displacement field (DSFL v2)")->required();
  c_match->add_option("--area", match.area, "Pixel area both images are normalised to")->capture_default_str();

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Score rectified images against ground truth");
  c_eval->add_option("--pred-dir", ev.pred_dir)->required();
  c_eval->add_option("--gt-dir", ev.gt_dir)->required();
  c_eval->add_option("--text-pred-dir", ev.text_pred_dir);
  c_eval->add_option("--text-gt-dir", ev.text_gt_dir);
  c_eval->add_option("--report", ev.report);
  c_eval->add_option("--format", ev.format)->capture_default_str();
  c_eval->add_option("--workers", ev.workers, "Worker threads (DOCRECT_THREADS overrides)");
  c_eval->add_option("--pairs", ev.pairs, "File of 'PRED GT' lines relative to the two directories");

  LossArgs loss;
  auto* c_loss = app.add_subcommand("eval-loss", "Score a rectify trace against ground-truth flows");
  c_loss->add_option("trace", loss.trace)->required();
  c_loss->add_option("gt_backward", loss.gt_backward)->required();
  c_loss->add_option("gt_forward", loss.gt_forward)->required();
  c_loss->add_option("--lambda", loss.lambda)->capture_default_str();
  c_loss->add_option("--alpha", loss.alpha)->capture_default_str();

  WeightArgs wa;
  std::uint64_t seed = 0;
  auto* c_weights = app.add_subcommand("make-weights", "Write a DSW1 container for the network");
  c_weights->add_option("out", wa.out)->required();
  auto* zero_flag = c_weights->add_flag("--zero", wa.zero, "All-zero weights");
  auto* random_opt = c_weights->add_option("--random", seed, "Seeded random weights");
  zero_flag->excludes(random_opt);
  c_weights->add_option("--gain", wa.gain, "Scale of the random kernels")->capture_default_str();

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "docrect: " << e.what() << "\n";
    return 2;
  }
  if (random_opt->count()) wa.seed = seed;

  try {
    if (c_warp->parsed()) return cmd_warp(warp, out);
    if (c_rect->parsed()) return cmd_rectify(rect, out);
    if (c_conv->parsed()) return cmd_flow_convert(conv, out);
    if (c_match->parsed()) return cmd_match(match, out);
    if (c_eval->parsed()) return cmd_eval(ev, out, err);
    if (c_loss->parsed()) return cmd_eval_loss(loss, out);
    if (c_weights->parsed()) return cmd_make_weights(wa, out);
  } catch (const Error& e) {
    err << "docrect: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "docrect: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "docrect: internal error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}

}  // namespace docrect
