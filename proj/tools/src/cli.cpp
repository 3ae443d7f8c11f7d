// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/cli/cli.hpp"

#include <CLI/CLI.hpp>

#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>

#include <fmt/format.h>

#include "axtrack/cli/report.hpp"
#include "axtrack/cli/tube_io.hpp"
#include "axtrack/cross_clip.hpp"
#include "axtrack/error.hpp"
#include "axtrack/evaluation.hpp"
#include "axtrack/harness/config.hpp"
#include "axtrack/harness/heatmap.hpp"
#include "axtrack/harness/mac_report.hpp"
#include "axtrack/harness/oracle_params.hpp"
#include "axtrack/harness/synthetic.hpp"
#include "axtrack/within_clip.hpp"

namespace axtrack::cli {
namespace fs = std::filesystem;
namespace {

struct Override {
  const char* key;
  const char* flags;
  bool sweep;  // replaced by a list flag in bench
};

constexpr std::array<Override, 15> kOverrides{{
    {"video_len", "--video-len,--l", false},
    {"clip_len", "--clip-len,--t", true},
    {"height", "--height,--h", true},
    {"width", "--width,--w", true},
    {"channels", "--channels,--d", true},
    {"queries", "--queries,--n", false},
    {"classes", "--classes,--c", false},
    {"n_within", "--n-within", false},
    {"n_cross", "--n-cross", false},
    {"heads", "--heads", false},
    {"k_sample", "--k-sample,--k", false},
    {"atrous_rates", "--atrous-rates", false},
    {"scale_mode", "--scale-mode", false},
    {"objects", "--objects", false},
    {"decoder_layers", "--decoder-layers", false},
}};

struct CommonOptions {
  std::string config;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string out = "axtrack_out";
  std::array<std::string, kOverrides.size()> values;
  std::array<CLI::Option*, kOverrides.size()> opts{};
};

void add_common(CLI::App* app, CommonOptions& c, bool sweep) {
  app->add_option("--config", c.config, "Config file of key = value lines");
  c.seed_opt = app->add_option("--seed", c.seed, "Seed for every random draw (overrides the config)");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  for (std::size_t i = 0; i < kOverrides.size(); ++i) {
    if (sweep && kOverrides[i].sweep) continue;
    c.opts[i] = app->add_option(kOverrides[i].flags, c.values[i], fmt::format("Override config key {}", kOverrides[i].key));
  }
}

ModelConfig resolve(const CommonOptions& c) {
  ModelConfig cfg = c.config.empty() ? ModelConfig{} : ModelConfig::load(c.config);
  for (std::size_t i = 0; i < kOverrides.size(); ++i)
    if (c.opts[i] != nullptr && c.opts[i]->count() > 0) cfg.set(kOverrides[i].key, c.values[i]);
  if (c.seed_opt->count() > 0) cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

void add_config(Report& r, const ModelConfig& cfg) {
  r.add("config.video_len", cfg.video_len);
  r.add("config.clip_len", cfg.clip_len);
  r.add("config.height", cfg.height);
  r.add("config.width", cfg.width);
  r.add("config.channels", cfg.channels);
  r.add("config.queries", cfg.queries);
  r.add("config.classes", cfg.classes);
  r.add("config.n_within", cfg.n_within);
  r.add("config.n_cross", cfg.n_cross);
  r.add("config.heads", cfg.heads);
  r.add("config.k_sample", cfg.k_sample);
  r.add("config.atrous_rates", fmt::format("{},{},{}", cfg.atrous_rates[0], cfg.atrous_rates[1], cfg.atrous_rates[2]));
  r.add("config.scale_mode", to_string(cfg.scale_mode));
  r.add("config.seed", cfg.seed);
  r.add("config.objects", cfg.objects);
  r.add("config.decoder_layers", cfg.decoder_layers);
}

void add_objects(Report& r, const SyntheticVideoSpec& spec, const SyntheticVideo& v) {
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const ObjectSpec& o = spec.objects[i];
    const std::string p = fmt::format("object.{}.", i);
    r.add(p + "class_id", o.class_id);
    r.add(p + "color", o.color);
    r.add(p + "size", fmt::format("{}x{}", o.height, o.width));
    r.add(p + "velocity", fmt::format("{},{}", o.dy, o.dx));
    r.add(p + "start", fmt::format("{},{}", v.starts[i][0], v.starts[i][1]));
  }
}

void add_quality(Report& r, const std::string& prefix, const VpqResult& q) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [c, cq] : q.per_class) {
    tp += cq.tp;
    fp += cq.fp;
    fn += cq.fn;
  }
  r.add(prefix + ".tp", tp);
  r.add(prefix + ".fp", fp);
  r.add(prefix + ".fn", fn);
  for (const auto& [c, cq] : q.per_class) {
    const std::string p = fmt::format("{}.class.{}.", prefix, c);
    r.add(p + "tp", cq.tp);
    r.add(p + "fp", cq.fp);
    r.add(p + "fn", cq.fn);
    r.add(p + "iou_sum", cq.iou_sum);
    r.add(p + "quality", cq.quality);
  }
}

// Object whose mask is used for the default heatmap reference: the first
// moving one, else the first.
std::size_t reference_object(const SyntheticVideoSpec& spec) {
  for (std::size_t i = 0; i < spec.objects.size(); ++i)
    if (spec.objects[i].dy != 0 || spec.objects[i].dx != 0) return i;
  return 0;
}

// Centre of the object's bounding box at `frame`, as a clip-local reference.
HeatmapReference object_center(const GroundTruthTube& g, std::size_t frame, std::size_t clip_len) {
  const DenseArray& m = g.masks;
  std::size_t h0 = m.extent(1), h1 = 0, w0 = m.extent(2), w1 = 0;
  for (std::size_t h = 0; h < m.extent(1); ++h)
    for (std::size_t w = 0; w < m.extent(2); ++w)
      if (m(frame, h, w) > 0.5) {
        h0 = std::min(h0, h);
        h1 = std::max(h1, h);
        w0 = std::min(w0, w);
        w1 = std::max(w1, w);
      }
  if (h0 > h1) throw Error(fmt::format("object {} is empty at frame {}", g.track_id, frame));
  return {frame % clip_len, (h0 + h1) / 2, (w0 + w1) / 2};
}

// Dumps the heatmaps for one reference and records where each frame peaks.
void heatmap_section(Report& r, const SyntheticVideo& v, const ModelConfig& cfg, const SegmenterParams& params,
                     std::size_t clip, std::size_t block, const HeatmapReference& ref,
                     const std::optional<fs::path>& dir) {
  const std::vector<ClipFeatures> clips = split_into_clips(v.video, cfg.clip_len);
  if (clip >= clips.size()) throw IndexError(fmt::format("clip {} of {}", clip, clips.size()));
  FieldCapture cap;
  cap.block = block;
  within_clip_forward(build_pyramid(clips[clip]), params.within, &cap);
  if (!cap.filled) throw ConfigError(fmt::format("no within-clip block {} (N_w = {})", block, cfg.n_within));
  const std::vector<DenseArray> maps = trajectory_heatmaps(cap.height, cap.width, ref);
  if (dir) dump_attention_heatmaps(cap.height, cap.width, ref, *dir);

  const std::size_t t0 = clip * cfg.clip_len;
  std::optional<std::size_t> owner;
  if (t0 + ref.t < cfg.video_len) {
    for (std::size_t i = 0; i < v.gt.tubes.size(); ++i)
      if (v.gt.tubes[i].masks(t0 + ref.t, ref.h, ref.w) > 0.5) owner = i;
  }
  r.add("heatmap.clip", clip);
  r.add("heatmap.block", block);
  r.add("heatmap.reference", fmt::format("{},{},{}", ref.t, ref.h, ref.w));
  r.add("heatmap.object", owner ? static_cast<std::int64_t>(*owner) : std::int64_t{-1});
  for (std::size_t tp = 0; tp < maps.size(); ++tp) {
    const auto a = argmax_pixel(maps[tp]);
    const std::string p = fmt::format("heatmap.frame.{}.", tp);
    r.add(p + "argmax", fmt::format("{},{}", a[0], a[1]));
    const bool real = t0 + tp < cfg.video_len;
    r.add(p + "inside", real && owner && v.gt.tubes[*owner].masks(t0 + tp, a[0], a[1]) > 0.5);
  }
}

Report run_demo(const ModelConfig& cfg, const fs::path& out, bool dumps) {
  const SyntheticVideoSpec spec = default_synthetic_spec(cfg);
  const SyntheticVideo v = generate_synthetic(spec);
  const ModelParams params = build_oracle_params(spec, cfg);
  const OfflineResult plain = run_offline(v.video, cfg.clip_len, params);
  NearOnlineOptions shuffle;
  shuffle.shuffle_seed = cfg.seed;
  const OfflineResult shuffled = run_offline(v.video, cfg.clip_len, params, shuffle);

  const VpqResult near = vpq_detail(plain.near_online.tubes, v.gt);
  const VpqResult off = vpq_detail(plain.tubes, v.gt);
  const VpqResult near_sh = vpq_detail(shuffled.near_online.tubes, v.gt);
  const VpqResult off_sh = vpq_detail(shuffled.tubes, v.gt);
  const TrackingStats tracking = measure_tracking(v, spec, cfg.clip_len, params.segmenter);

  Report r;
  r.add("vpq_near_online", near.vpq);
  r.add("vpq_offline", off.vpq);
  r.add("vpq_near_online_shuffled", near_sh.vpq);
  r.add("vpq_offline_shuffled", off_sh.vpq);
  r.add("tracking_rate", tracking.rate());
  r.add("tracking_pairs", tracking.pairs);
  r.add("tracking_hits", tracking.hits);
  r.add("clips", plain.near_online.aligned.size());
  add_config(r, cfg);
  add_objects(r, spec, v);
  add_quality(r, "near_online", near);
  add_quality(r, "offline", off);
  add_quality(r, "near_online_shuffled", near_sh);
  add_quality(r, "offline_shuffled", off_sh);

  const std::size_t obj = reference_object(spec);
  const HeatmapReference ref = object_center(v.gt.tubes[obj], 0, cfg.clip_len);
  heatmap_section(r, v, cfg, params.segmenter, 0, 0, ref,
                  dumps ? std::optional<fs::path>(out / "heatmaps") : std::nullopt);
  if (dumps) {
    write_ground_truth(out / "gt", v.gt);
    write_tubes(out / "near_online", plain.near_online.tubes);
    write_tubes(out / "offline", plain.tubes);
    write_tubes(out / "offline_shuffled", shuffled.tubes);
    std::ofstream cfg_out(out / "config.txt", std::ios::binary);
    cfg_out << cfg.serialize();
    if (!cfg_out) throw IoError(fmt::format("cannot write {}", (out / "config.txt").string()));
  }
  return r;
}

struct SweepLists {
  std::vector<std::size_t> t, h, w, d;
};

Report run_bench(const ModelConfig& base, SweepLists s) {
  if (s.t.empty()) s.t = {2, 4};
  if (s.h.empty()) s.h = {2, 4, 8};
  if (s.d.empty()) s.d = {4, 8};
  const bool square = s.w.empty();
  Report r;
  std::vector<std::pair<ModelConfig, MacReport>> points;
  for (std::size_t t : s.t)
    for (std::size_t h : s.h)
      for (std::size_t w : square ? std::vector<std::size_t>{h} : s.w)
        for (std::size_t d : s.d) {
          ModelConfig cfg = base;
          cfg.clip_len = t;
          cfg.height = h;
          cfg.width = w;
          cfg.channels = d;
          cfg.validate();
          points.emplace_back(cfg, count_macs(cfg));
        }
  bool all_exact = true;
  for (const auto& [cfg, m] : points) all_exact = all_exact && m.full.exact() && m.axial.exact() && m.ratio_exact();
  r.add("points", points.size());
  r.add("all_exact", all_exact);
  r.add("config.heads", base.heads);
  const auto add_counter = [&r](const std::string& p, const MacCounter& c) {
    r.add(p + "stage1_scores", c.stage1_scores);
    r.add(p + "stage1_values", c.stage1_values);
    r.add(p + "stage2_scores", c.stage2_scores);
    r.add(p + "stage2_values", c.stage2_values);
    r.add(p + "projections", c.projections);
    r.add(p + "total", c.total());
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    const MacReport& m = points[i].second;
    const std::string p = fmt::format("point.{}.", i);
    r.add(p + "t", m.frames);
    r.add(p + "h", m.height);
    r.add(p + "w", m.width);
    r.add(p + "d", m.channels);
    add_counter(p + "full.counted.", m.full.counted);
    add_counter(p + "full.analytic.", m.full.analytic);
    add_counter(p + "axial.counted.", m.axial.counted);
    add_counter(p + "axial.analytic.", m.axial.analytic);
    r.add(p + "full_dominant", m.full.counted_dominant());
    r.add(p + "axial_dominant", m.axial.counted_dominant());
    r.add(p + "ratio", m.ratio());
    r.add(p + "analytic_ratio", m.analytic_ratio());
    r.add(p + "counts_exact", m.full.exact() && m.axial.exact());
    r.add(p + "ratio_exact", m.ratio_exact());
  }
  return r;
}

struct AttnOptions {
  std::size_t clip = 0, block = 0;
  std::size_t ref_t = 0, ref_h = 0, ref_w = 0;
  CLI::Option* ref_opts[3] = {nullptr, nullptr, nullptr};
  bool random_params = false;
};

Report run_attn(const ModelConfig& cfg, const AttnOptions& a, const fs::path& out) {
  const SyntheticVideoSpec spec = default_synthetic_spec(cfg);
  const SyntheticVideo v = generate_synthetic(spec);
  ModelParams params;
  if (a.random_params) {
    Rng rng(cfg.seed);
    params = random_model_params(cfg, rng);
  } else {
    params = build_oracle_params(spec, cfg);
  }
  const std::size_t given = static_cast<std::size_t>(a.ref_opts[0]->count() > 0) +
                            static_cast<std::size_t>(a.ref_opts[1]->count() > 0) +
                            static_cast<std::size_t>(a.ref_opts[2]->count() > 0);
  if (given != 0 && given != 3) throw ConfigError("give all of --ref-t, --ref-h and --ref-w, or none");
  HeatmapReference ref{a.ref_t, a.ref_h, a.ref_w};
  if (given == 0) {
    const std::size_t frame = a.clip * cfg.clip_len;
    if (frame >= cfg.video_len) throw IndexError(fmt::format("clip {} starts past the video end", a.clip));
    ref = object_center(v.gt.tubes[reference_object(spec)], frame, cfg.clip_len);
  }
  Report r;
  r.add("params", a.random_params ? "random" : "oracle");
  heatmap_section(r, v, cfg, params.segmenter, a.clip, a.block, ref, out / "heatmaps");
  add_config(r, cfg);
  return r;
}

Report run_eval(const fs::path& pred_dir, const fs::path& gt_dir, double iou_thresh) {
  const std::vector<Tube> preds = read_tubes(pred_dir);
  const GroundTruthSet gt = read_ground_truth(gt_dir);
  const VpqResult q = vpq_detail(preds, gt, iou_thresh);
  Report r;
  r.add("vpq", q.vpq);
  r.add("iou_threshold", iou_thresh);
  r.add("predictions", preds.size());
  r.add("ground_truth", gt.tubes.size());
  add_quality(r, "eval", q);
  return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"axtrack: axial-trajectory video segmentation harness", "axtrack"};
  app.set_help_flag("--help", "Print help and exit");
  app.require_subcommand(1, 1);

  CommonOptions demo_c, bench_c, attn_c;
  std::string eval_out = "axtrack_out";

  CLI::App* demo = app.add_subcommand("demo", "Synthetic video, oracle parameters, both inference modes, VPQ");
  demo->set_help_flag("--help");
  add_common(demo, demo_c, false);
  bool no_dumps = false;
  demo->add_flag("--no-dumps", no_dumps, "Skip PGM dumps");

  CLI::App* bench = app.add_subcommand("bench", "Instrumented MAC counts over a sweep");
  bench->set_help_flag("--help");
  add_common(bench, bench_c, true);
  SweepLists sweep;
  bench->add_option("--t,--clip-len", sweep.t, "Clip lengths (default 2 4)");
  bench->add_option("--h,--height", sweep.h, "Heights (default 2 4 8)");
  bench->add_option("--w,--width", sweep.w, "Widths (default: equal to the height)");
  bench->add_option("--d,--channels", sweep.d, "Channels (default 4 8)");

  CLI::App* attn = app.add_subcommand("attn", "Trajectory heatmaps for one reference point");
  attn->set_help_flag("--help");
  add_common(attn, attn_c, false);
  AttnOptions attn_o;
  attn->add_option("--clip", attn_o.clip, "Clip index")->capture_default_str();
  attn->add_option("--block", attn_o.block, "Within-clip block")->capture_default_str();
  attn_o.ref_opts[0] = attn->add_option("--ref-t", attn_o.ref_t, "Reference frame within the clip");
  attn_o.ref_opts[1] = attn->add_option("--ref-h", attn_o.ref_h, "Reference row");
  attn_o.ref_opts[2] = attn->add_option("--ref-w", attn_o.ref_w, "Reference column");
  attn->add_flag("--random-params", attn_o.random_params, "Seeded random parameters instead of the oracle");

  CLI::App* eval = app.add_subcommand("eval", "VPQ of a prediction dump against a ground-truth dump");
  eval->set_help_flag("--help");
  std::string pred_dir, gt_dir;
  double iou_thresh = 0.5;
  eval->add_option("--pred", pred_dir, "Prediction dump directory")->required();
  eval->add_option("--gt", gt_dir, "Ground-truth dump directory")->required();
  eval->add_option("--iou-thresh", iou_thresh, "Match threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  eval->add_option("--out", eval_out, "Output directory")->capture_default_str();

  std::vector<std::string> storage{"axtrack"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    Report report;
    fs::path out_dir;
    if (demo->parsed()) {
      const ModelConfig cfg = resolve(demo_c);
      out_dir = demo_c.out;
      make_dir(out_dir);
      report = run_demo(cfg, out_dir, !no_dumps);
    } else if (bench->parsed()) {
      const ModelConfig cfg = resolve(bench_c);
      out_dir = bench_c.out;
      report = run_bench(cfg, sweep);
    } else if (attn->parsed()) {
      const ModelConfig cfg = resolve(attn_c);
      out_dir = attn_c.out;
      report = run_attn(cfg, attn_o, out_dir);
    } else {
      out_dir = eval_out;
      report = run_eval(pred_dir, gt_dir, iou_thresh);
    }
    report.write(out_dir);
    out << report.text();
    return kExitOk;
  } catch (const NumericError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace axtrack::cli
