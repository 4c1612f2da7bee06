/*
 * Copyright 2026 The hipseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hipseg/config.hpp"
#include "hipseg/dataset.hpp"
#include "hipseg/errors.hpp"
#include "hipseg/phantom.hpp"
#include "hipseg/pipeline.hpp"
#include "hipseg/volume_io.hpp"

namespace fs = std::filesystem;
using namespace hipseg;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  bool quiet = false;

  [[nodiscard]] PipelineConfig config() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    for (const auto& o : overrides) apply_override(c, o);
    c.validate();
    return c;
  }
  [[nodiscard]] LogFn log() const {
    if (quiet) return {};
    return [](const std::string& line) { std::cerr << line << '\n'; };
  }
};

// Fold -1 means: train on everything, no validation set.
struct Split {
  std::vector<Sample> train;
  std::vector<Sample> validation;
};

Split split_manifest(const Manifest& m, Side side, int fold) {
  std::vector<std::size_t> train, held;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    (m.entries[i].fold == fold ? held : train).push_back(i);
  }
  if (train.empty()) throw DataError("no training samples outside fold " + std::to_string(fold));
  Split s;
  s.train = load_samples(m, side, train);
  if (!held.empty()) s.validation = load_samples(m, side, held);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoFailure("cannot write " + path.string());
}

// Checkpoint files named *_iter<N>.fck in a directory, sorted by N.
std::vector<ModelCheckpoint> checkpoints_in(const fs::path& dir) {
  static const std::regex pattern(R"(.*_iter(\d+)\.fck)");
  std::vector<std::pair<int, fs::path>> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    const auto name = e.path().filename().string();
    if (std::regex_match(name, m, pattern)) found.emplace_back(std::stoi(m[1]), e.path());
  }
  if (found.empty()) throw DataError("no *_iter<N>.fck checkpoints in " + dir.string());
  std::sort(found.begin(), found.end());
  std::vector<ModelCheckpoint> out;
  for (const auto& [it, path] : found) out.push_back({it, load_checkpoint(path)});
  return out;
}

std::vector<ModelCheckpoint> checkpoints_from(const std::string& arg) {
  if (fs::is_directory(arg)) return checkpoints_in(arg);
  return {{0, load_checkpoint(arg)}};
}

std::string format_metrics(const std::string& id, const MetricReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s dsc %.4f  jsc %.4f  pi %.4f  ri %.4f", id.c_str(), r.dsc,
                r.jsc, r.pi, r.ri);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage 3D FCN localization and segmentation"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_path, "key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("-s,--set", common.overrides, "override one key, e.g. --set alpha=0.3");
  app.add_flag("-q,--quiet", common.quiet, "no progress output");

  std::string manifest_path, out, proposal_path, seg_path, volume_path;
  int fold = -1;

  // phantom
  auto* phantom = app.add_subcommand("phantom", "write a synthetic phantom dataset");
  PhantomSpec spec;
  int size = 0;
  phantom->add_option("-o,--out", out, "output directory")->required();
  phantom->add_option("-n,--count", spec.pair_count, "number of volumes");
  phantom->add_option("--size", size, "cubic volume edge; target sizes scale with it");
  phantom->add_option("--phantom-seed", spec.seed, "phantom generator seed");
  phantom->add_option("--noise", spec.noise_std, "Gaussian noise std");
  phantom->add_option("--folds", spec.folds, "fold count written to the manifest");

  // train-proposal
  auto* train_prop = app.add_subcommand("train-proposal", "train the proposal network");
  train_prop->add_option("-m,--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  train_prop->add_option("-o,--out", out, "checkpoint directory")->required();
  train_prop->add_option("--fold", fold, "hold this fold out for validation");

  // train-seg
  auto* train_seg = app.add_subcommand("train-seg", "train the segmentation network");
  train_seg->add_option("-m,--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  train_seg->add_option("-p,--proposal", proposal_path, "proposal checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  train_seg->add_option("-o,--out", out, "checkpoint directory")->required();
  train_seg->add_option("--fold", fold, "hold this fold out for validation");

  // infer
  auto* infer = app.add_subcommand("infer", "segment one volume");
  infer->add_option("-p,--proposal", proposal_path)->required()->check(CLI::ExistingFile);
  infer->add_option("-g,--seg", seg_path)->required()->check(CLI::ExistingFile);
  infer->add_option("-i,--volume", volume_path, ".nii or native volume")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("-o,--out", out, "native label output")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "score a trained pair on a manifest");
  std::string csv_path;
  eval->add_option("-m,--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  eval->add_option("-p,--proposal", proposal_path)->required()->check(CLI::ExistingFile);
  eval->add_option("-g,--seg", seg_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--fold", fold, "evaluate only this fold");
  eval->add_option("--csv", csv_path, "per-sample CSV output");

  // sweep-alpha
  auto* sweep = app.add_subcommand("sweep-alpha", "segmentation runs over mask alphas");
  std::vector<double> alphas = default_alphas();
  sweep->add_option("-m,--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  sweep->add_option("-p,--proposal", proposal_path)->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", out, "one record CSV per alpha")->required();
  sweep->add_option("--fold", fold, "validation fold");
  sweep->add_option("--alphas", alphas, "alpha values")->delimiter(',');

  // ablate
  auto* ablate = app.add_subcommand("ablate", "pair proposal and segmentation checkpoints");
  std::string proposals_arg, segs_arg;
  ablate->add_option("-m,--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  ablate->add_option("-p,--proposals", proposals_arg, "checkpoint file or directory")->required();
  ablate->add_option("-g,--segs", segs_arg, "checkpoint file or directory")->required();
  ablate->add_option("--fold", fold, "validation fold")->required();
  ablate->add_option("-o,--out", out, "table CSV");

  // crossval
  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation of both stages");
  std::vector<std::string> sides{"left", "right"};
  crossval->add_option("-m,--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  crossval->add_option("-o,--out", out, "report CSV");
  crossval->add_option("--sides", sides, "left,right")->delimiter(',');

  // export-slices
  auto* slices = app.add_subcommand("export-slices", "write PGM planes of a volume");
  std::string axis_arg = "all";
  std::optional<int> index;
  slices->add_option("-i,--volume", volume_path)->required()->check(CLI::ExistingFile);
  slices->add_option("-o,--out", out, "output directory")->required();
  slices->add_option("--axis", axis_arg)->check(CLI::IsMember({"x", "y", "z", "all"}));
  slices->add_option("--index", index, "plane index, default the middle");

  CLI11_PARSE(app, argc, argv);

  try {
    if (phantom->parsed()) {
      if (size > 0) {
        // Targets keep their size relative to the head.
        const double k = static_cast<double>(size) / spec.dims.w;
        auto scale = [k](Vec3 v) { return Vec3{v.x * k, v.y * k, v.z * k}; };
        spec.dims = {size, size, size};
        spec.target_axes_min = scale(spec.target_axes_min);
        spec.target_axes_max = scale(spec.target_axes_max);
        spec.jitter = static_cast<int>(spec.jitter * k);
      }
      auto m = export_dataset(spec, out);
      std::cout << "wrote " << m.entries.size() << " volumes to " << out << '\n';
      return 0;
    }

    const auto cfg = common.config();
    TrainOptions opts;
    opts.log = common.log();

    if (train_prop->parsed()) {
      auto split = split_manifest(read_manifest(manifest_path), cfg.side, fold);
      opts.output_dir = out;
      opts.prefix = "proposal";
      opts.keep_checkpoints = false;
      write_text(fs::path(out) / "config.txt", format_config(cfg));
      auto r = train_proposal(split.train, split.validation, cfg, opts);
      std::cout << "final loss " << (r.record.loss.empty() ? 0.0 : r.record.loss.back()) << '\n';
    } else if (train_seg->parsed()) {
      auto split = split_manifest(read_manifest(manifest_path), cfg.side, fold);
      opts.output_dir = out;
      opts.prefix = "segmentation";
      opts.keep_checkpoints = false;
      write_text(fs::path(out) / "config.txt", format_config(cfg));
      auto r = train_segmentation(split.train, split.validation, load_checkpoint(proposal_path),
                                  cfg, opts);
      std::cout << "final loss " << (r.record.loss.empty() ? 0.0 : r.record.loss.back()) << '\n';
    } else if (infer->parsed()) {
      const auto volume = load_volume(volume_path);
      auto r = infer_two_stage(load_checkpoint(proposal_path), load_checkpoint(seg_path), volume,
                               cfg);
      save_native(r.label, out);
      std::cout << "localization " << r.loc.to_line() << "\nvoxels " << r.label.count() << '\n';
    } else if (eval->parsed()) {
      auto m = read_manifest(manifest_path);
      std::vector<std::size_t> picked;
      for (std::size_t i = 0; i < m.entries.size(); ++i)
        if (fold < 0 || m.entries[i].fold == fold) picked.push_back(i);
      const auto samples = load_samples(m, cfg.side, picked);
      const auto prop = load_checkpoint(proposal_path);
      const auto seg = load_checkpoint(seg_path);
      std::string csv = "id,dsc,jsc,pi,ri,proposal_dsc,failed\n";
      std::vector<MetricReport> all;
      for (const auto& s : samples) {
        auto e = evaluate_sample(prop, seg, s, cfg);
        all.push_back(e.metrics);
        char tail[64];
        std::snprintf(tail, sizeof tail, ",%.6f,%d\n", e.proposal_dsc, e.failed ? 1 : 0);
        csv += e.id + "," + e.metrics.csv_row() + tail;
        std::cout << format_metrics(e.id, e.metrics) << (e.failed ? "  (failed)" : "") << '\n';
      }
      std::cout << format_metrics("mean", mean_report(all)) << '\n';
      if (!csv_path.empty()) write_text(csv_path, csv);
    } else if (sweep->parsed()) {
      auto split = split_manifest(read_manifest(manifest_path), cfg.side, fold);
      auto runs = alpha_sweep(split.train, split.validation, load_checkpoint(proposal_path), alphas,
                              cfg, opts);
      for (const auto& run : runs) {
        char name[64];
        std::snprintf(name, sizeof name, "alpha_%.3f.csv", run.alpha);
        write_text(fs::path(out) / name, run.result.record.to_csv());
        save_checkpoint(run.result.final_model(),
                        fs::path(out) / (std::string(name, std::strlen(name) - 4) + ".fck"));
        const auto hit = run.result.record.first_reaching(0.8);
        std::cout << "alpha " << run.alpha << ": steps to val DSC 0.80 "
                  << (hit ? std::to_string(*hit) : std::string("not reached")) << '\n';
      }
    } else if (ablate->parsed()) {
      auto m = read_manifest(manifest_path);
      auto held = load_samples(m, cfg.side, m.fold_members(fold));
      auto table = ablation_grid(checkpoints_from(proposals_arg), checkpoints_from(segs_arg), held,
                                 cfg);
      const auto csv = table.to_csv();
      if (out.empty()) std::cout << csv;
      else write_text(out, csv);
    } else if (crossval->parsed()) {
      std::vector<Side> parsed;
      for (const auto& s : sides) parsed.push_back(parse_side(s));
      const auto start = std::chrono::steady_clock::now();
      auto report = cross_validate(read_manifest(manifest_path), cfg, opts, parsed);
      const double minutes =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
      for (const auto& side : report.sides) {
        for (const auto& f : side.folds)
          std::cout << format_metrics(std::string(to_string(side.side)) + " fold " +
                                          std::to_string(f.fold),
                                      f.mean)
                    << '\n';
        std::cout << format_metrics(std::string(to_string(side.side)) + " mean", side.mean)
                  << '\n';
      }
      std::printf("elapsed %.1f min\n", minutes);
      if (!out.empty()) write_text(out, report.to_csv());
    } else if (slices->parsed()) {
      const auto volume = load_volume(volume_path);
      fs::create_directories(out);
      const auto d = volume.dims();
      const int extents[3] = {d.w, d.h, d.d};
      for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
        const char name = "xyz"[static_cast<int>(axis)];
        if (axis_arg != "all" && axis_arg[0] != name) continue;
        const int i = index.value_or(extents[static_cast<int>(axis)] / 2);
        const auto path = fs::path(out) / (std::string(1, name) + "_" + std::to_string(i) + ".pgm");
        export_slice(volume, axis, i, path);
        std::cout << path.string() << '\n';
      }
    }
  } catch (const hipseg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
