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

#include "hipseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "hipseg/errors.hpp"
#include "hipseg/ops.hpp"
#include "hipseg/optimizer.hpp"
#include "float_env.hpp"

namespace hipseg {

namespace {

constexpr double kOutputThreshold = 0.5;

void say(const TrainOptions& options, const std::string& line) {
  if (options.log) options.log(line);
}

// Runs task(i) for i in [0, count) on up to `jobs` threads; the first
// exception is rethrown after every worker has stopped.
void run_jobs(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// Serializes a caller's log callback across worker threads.
TrainOptions locked(const TrainOptions& options, std::mutex& mutex) {
  TrainOptions out = options;
  if (options.log) {
    out.log = [&mutex, log = options.log](const std::string& line) {
      std::lock_guard lock(mutex);
      log(line);
    };
  }
  return out;
}

Tensor label_tensor(const LabelVolume& label) { return volume_to_tensor(label.to_volume()); }

using Validator = std::function<double(const FcnModel&)>;

double initial_prior(const std::vector<TrainingExample>& examples, double configured) {
  if (configured > 0.0) return configured;
  double fraction = 0.0;
  for (const auto& e : examples) {
    double fg = 0.0;
    for (float v : e.target.data()) fg += v;
    fraction += fg / static_cast<double>(e.target.size());
  }
  fraction /= static_cast<double>(examples.size());
  // Empty or all-foreground targets would put the bias at infinity.
  return std::clamp(fraction, 1e-4, 0.5);
}

TrainResult run_training(const std::vector<TrainingExample>& examples, const NetworkConfig& network,
                         int iterations, const PipelineConfig& config, std::uint64_t order_seed,
                         const Validator& validate, const TrainOptions& options,
                         const std::string& stage) {
  if (examples.empty()) throw DataError(stage + " training needs at least one sample");
  const FlushSubnormals flush;
  FcnModel model(network);
  const double prior = initial_prior(examples, config.output_prior);
  for (auto& b : model.parameters().back().value.data()) {
    b = static_cast<float>(std::log(prior / (1.0 - prior)));
  }
  OptimizerState state;
  TrainResult result;
  auto& record = result.record;
  const int batch = config.batch_size;
  const int val_every =
      options.validation_interval > 0 ? options.validation_interval : config.checkpoint_interval;
  const auto order = training_order(examples.size(),
                                    static_cast<std::size_t>(iterations) * batch, order_seed);

  auto validate_at = [&](int it) {
    if (!validate) return;
    const double dsc = validate(model);
    record.val_dsc.emplace_back(it, dsc);
  };
  auto checkpoint_at = [&](int it) {
    if (options.keep_checkpoints || it == iterations) result.checkpoints.push_back({it, model});
    if (!options.output_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof name, "_iter%06d.fck", it);
      save_checkpoint(model, options.output_dir / (options.prefix + name));
    }
    std::string line = stage + " iter " + std::to_string(it);
    if (!record.loss.empty()) line += " loss " + std::to_string(record.loss.back());
    if (!record.val_dsc.empty() && record.val_dsc.back().first == it) {
      line += " val_dsc " + std::to_string(record.val_dsc.back().second);
    }
    say(options, line);
  };

  if (!options.output_dir.empty()) std::filesystem::create_directories(options.output_dir);
  if (iterations == 0) {
    validate_at(0);
    checkpoint_at(0);
  }
  std::vector<Tensor> grads;
  for (int it = 1; it <= iterations; ++it) {
    const auto started = std::chrono::steady_clock::now();
    double loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      const auto& ex = examples[order[static_cast<std::size_t>(it - 1) * batch + b]];
      const auto prediction = model.forward(ex.input, true);
      const auto dice = dice_loss_and_grad(prediction, ex.target);
      if (!std::isfinite(dice.loss)) {
        throw DivergenceError(stage + " loss is not finite at iteration " + std::to_string(it));
      }
      loss += dice.loss;
      auto g = model.backward(dice.grad);
      if (b == 0) {
        grads = std::move(g);
      } else {
        for (std::size_t i = 0; i < grads.size(); ++i) {
          auto dst = grads[i].data();
          auto src = g[i].data();
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
      }
    }
    if (batch > 1) {
      const float scale = 1.0f / static_cast<float>(batch);
      for (auto& g : grads) {
        for (auto& v : g.data()) v *= scale;
      }
      loss /= batch;
    }
    for (const auto& g : grads) require_finite(g, "parameter gradient");
    optimizer_step(model.parameters(), grads, state, config.optimizer);
    model.clear_record();
    record.loss.push_back(loss);
    record.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());

    if (it % val_every == 0 || it == iterations) validate_at(it);
    if (it % config.checkpoint_interval == 0 || it == iterations) checkpoint_at(it);
  }
  if (!options.output_dir.empty()) {
    const auto csv_path = options.output_dir / (options.prefix + "_record.csv");
    std::FILE* f = std::fopen(csv_path.string().c_str(), "wb");
    if (!f) throw IoFailure("cannot write " + csv_path.string());
    const auto csv = record.to_csv();
    const bool ok = std::fwrite(csv.data(), 1, csv.size(), f) == csv.size();
    if (std::fclose(f) != 0 || !ok) throw IoFailure("write failed for " + csv_path.string());
  }
  return result;
}

// Per validation sample, the segmentation crop or nothing when the proposal
// is empty.
struct PreparedValidation {
  const Sample* sample;
  std::optional<EnhancedCrop> crop;
};

std::vector<PreparedValidation> prepare_validation(const std::vector<Sample>& validation,
                                                   const FcnModel& proposal,
                                                   const PipelineConfig& config) {
  std::vector<PreparedValidation> out;
  for (const auto& s : validation) {
    const auto prob = infer_proposal(proposal, s.volume, config.proposal_dims);
    PreparedValidation p{&s, std::nullopt};
    try {
      const auto loc = localize_proposal(prob, config);
      p.crop = segmentation_input(prob, s.volume, loc, config);
    } catch (const EmptyProposal&) {
    }
    out.push_back(std::move(p));
  }
  return out;
}

double prepared_dsc(const FcnModel& segmentation, const PreparedValidation& p) {
  if (!p.crop) return 0.0;
  return dice_score(segment_crop(segmentation, *p.crop), p.sample->label);
}

}  // namespace

std::string TrainRecord::to_csv() const {
  std::string out = "iteration,loss,val_dsc\n";
  std::size_t v = 0;
  char buf[96];
  auto val_for = [&](int it) -> std::string {
    while (v < val_dsc.size() && val_dsc[v].first < it) ++v;
    if (v < val_dsc.size() && val_dsc[v].first == it) {
      std::snprintf(buf, sizeof buf, "%.9g", val_dsc[v].second);
      return buf;
    }
    return {};
  };
  if (loss.empty() && !val_dsc.empty() && val_dsc.front().first == 0) {
    out += "0,," + val_for(0) + "\n";
  }
  for (std::size_t i = 0; i < loss.size(); ++i) {
    const int it = static_cast<int>(i) + 1;
    std::snprintf(buf, sizeof buf, "%d,%.9g,", it, loss[i]);
    std::string row = buf;
    out += row + val_for(it) + "\n";
  }
  return out;
}

std::optional<int> TrainRecord::first_reaching(double target) const {
  for (const auto& [it, dsc] : val_dsc) {
    if (dsc >= target) return it;
  }
  return std::nullopt;
}

Tensor network_input(const Volume& volume) {
  auto t = volume_to_tensor(volume);
  double sum = 0.0, squares = 0.0;
  for (float v : t.data()) {
    sum += v;
    squares += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(t.size());
  const double mean = sum / n;
  const double var = std::max(0.0, squares / n - mean * mean);
  // Without standardization the faint background barely differs from the
  // convolutions' zero padding, and the mirrored targets can only be told
  // apart by position.
  const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  for (auto& v : t.data()) v = static_cast<float>((v - mean) * scale);
  return t;
}

std::vector<std::size_t> training_order(std::size_t samples, std::size_t draws,
                                        std::uint64_t seed) {
  std::vector<std::size_t> order;
  if (samples == 0) return order;
  order.reserve(draws);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> epoch(samples);
  while (order.size() < draws) {
    std::iota(epoch.begin(), epoch.end(), std::size_t{0});
    std::shuffle(epoch.begin(), epoch.end(), rng);
    for (auto i : epoch) {
      if (order.size() == draws) break;
      order.push_back(i);
    }
  }
  return order;
}

LabelVolume downsample_label(const LabelVolume& label, Dims3 target, LabelDownsample rule) {
  if (rule == LabelDownsample::trilinear) {
    return binarize(trilinear_resample(label.to_volume(), target), kOutputThreshold);
  }
  // Nearest source voxel under the same align-corners mapping as resampling.
  auto nearest = [](int i, int source, int size) {
    if (size == 1) return (source - 1) / 2;
    return static_cast<int>(std::lround(static_cast<double>(i) * (source - 1) / (size - 1)));
  };
  const auto& s = label.dims();
  LabelVolume out(target, label.spacing());
  for (int z = 0; z < target.d; ++z) {
    for (int y = 0; y < target.h; ++y) {
      for (int x = 0; x < target.w; ++x) {
        out.set(x, y, z,
                label.at(nearest(x, s.w, target.w), nearest(y, s.h, target.h),
                         nearest(z, s.d, target.d)) != 0);
      }
    }
  }
  return out;
}

TrainingExample proposal_example(const Sample& sample, const PipelineConfig& config) {
  if (sample.label.dims() != sample.volume.dims()) {
    throw DataError("label of " + sample.id + " does not match its volume");
  }
  return {network_input(trilinear_resample(sample.volume, config.proposal_dims)),
          label_tensor(downsample_label(sample.label, config.proposal_dims,
                                        config.label_downsample))};
}

TrainResult train_proposal(const std::vector<Sample>& train, const std::vector<Sample>& validation,
                           const PipelineConfig& config, const TrainOptions& options) {
  config.validate();
  std::vector<TrainingExample> examples;
  for (const auto& s : train) examples.push_back(proposal_example(s, config));
  Validator validate;
  if (!validation.empty()) {
    validate = [&](const FcnModel& model) {
      double sum = 0.0;
      for (const auto& s : validation) {
        const auto prob = infer_proposal(model, s.volume, config.proposal_dims);
        sum += dice_score(binarize(prob, kOutputThreshold), s.label);
      }
      return sum / static_cast<double>(validation.size());
    };
  }
  return run_training(examples, config.proposal_network(), config.proposal_iterations, config,
                      derive_seed(config.seed, "proposal-order"), validate, options, "proposal");
}

Volume infer_proposal(const FcnModel& model, const Volume& volume, const Dims3& proposal_dims) {
  model.config().validate_input(proposal_dims);
  const auto small = trilinear_resample(volume, proposal_dims);
  const auto output = model.predict(network_input(small));
  if (output.dim(1) != 1) throw ShapeMismatch("proposal model must have one output channel");
  return trilinear_resample(tensor_to_volume(output, volume.spacing()), volume.dims());
}

Localization localize_proposal(const Volume& prob, const PipelineConfig& config) {
  if (config.localize_binarized) {
    return localize(axis_histograms(binarize(prob, config.mask.binarize_threshold)),
                    config.epsilon);
  }
  return localize(axis_histograms(prob), config.epsilon);
}

EnhancedCrop segmentation_input(const Volume& prob, const Volume& volume, const Localization& loc,
                                const PipelineConfig& config) {
  return enhance_crop(prob, volume, loc, config.crop_dims, config.mask);
}

SegmentationExample segmentation_example(const Sample& sample, const Volume& prob,
                                         const PipelineConfig& config, bool fallback) {
  SegmentationExample out;
  try {
    out.loc = localize_proposal(prob, config);
  } catch (const EmptyProposal&) {
    if (!fallback) throw;
    if (sample.label.count() == 0) {
      throw DataError("sample " + sample.id + " has an empty proposal and an empty label");
    }
    out.loc = localize(axis_histograms(sample.label), 0.0);
    out.used_fallback = true;
  }
  auto crop_in = segmentation_input(prob, sample.volume, out.loc, config);
  out.window = crop_in.window;
  out.tensors = {network_input(crop_in.volume), label_tensor(crop(sample.label, out.window))};
  return out;
}

TrainResult train_segmentation(const std::vector<Sample>& train,
                               const std::vector<Sample>& validation, const FcnModel& proposal,
                               const PipelineConfig& config, const TrainOptions& options) {
  config.validate();
  std::vector<TrainingExample> examples;
  for (const auto& s : train) {
    const auto prob = infer_proposal(proposal, s.volume, config.proposal_dims);
    auto ex = segmentation_example(s, prob, config, true);
    if (ex.used_fallback) {
      say(options, "segmentation: empty proposal for " + s.id + ", using the label center");
    }
    examples.push_back(std::move(ex.tensors));
  }
  const auto prepared = prepare_validation(validation, proposal, config);
  Validator validate;
  if (!prepared.empty()) {
    validate = [&](const FcnModel& model) {
      double sum = 0.0;
      for (const auto& p : prepared) sum += prepared_dsc(model, p);
      return sum / static_cast<double>(prepared.size());
    };
  }
  return run_training(examples, config.segmentation_network(), config.segmentation_iterations,
                      config, derive_seed(config.seed, "segmentation-order"), validate, options,
                      "segmentation");
}

LabelVolume segment_crop(const FcnModel& segmentation, const EnhancedCrop& crop) {
  const auto output = segmentation.predict(network_input(crop.volume));
  const auto prob = tensor_to_volume(output, crop.volume.spacing());
  return paste_back(binarize(prob, kOutputThreshold), crop.window);
}

TwoStageResult infer_two_stage(const FcnModel& proposal, const FcnModel& segmentation,
                               const Volume& volume, const PipelineConfig& config) {
  config.validate();
  const auto prob = infer_proposal(proposal, volume, config.proposal_dims);
  const auto loc = localize_proposal(prob, config);
  const auto input = segmentation_input(prob, volume, loc, config);
  return {segment_crop(segmentation, input), loc, input.window};
}

std::vector<double> default_alphas() { return {0.0, 0.1, 0.3, 1.0}; }

std::vector<AlphaRun> alpha_sweep(const std::vector<Sample>& train,
                                  const std::vector<Sample>& validation, const FcnModel& proposal,
                                  const std::vector<double>& alphas, const PipelineConfig& config,
                                  const TrainOptions& options) {
  std::vector<AlphaRun> runs(alphas.size());
  std::mutex log_mutex;
  const auto opts = locked(options, log_mutex);
  run_jobs(alphas.size(), config.jobs, [&](std::size_t i) {
    PipelineConfig c = config;
    c.mask.alpha = alphas[i];
    TrainOptions o = opts;
    char tag[48];
    std::snprintf(tag, sizeof tag, "_alpha%g", alphas[i]);
    o.prefix += tag;
    runs[i] = {alphas[i], train_segmentation(train, validation, proposal, c, o)};
  });
  return runs;
}

std::string AblationTable::to_csv() const {
  std::string out = "proposal_iteration,proposal_only";
  for (int s : segmentation_iterations) out += ",seg_" + std::to_string(s);
  out += "\n";
  char buf[32];
  for (std::size_t r = 0; r < dsc.size(); ++r) {
    out += std::to_string(proposal_iterations[r]);
    for (double v : dsc[r]) {
      std::snprintf(buf, sizeof buf, ",%.6f", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

AblationTable ablation_grid(const std::vector<ModelCheckpoint>& proposals,
                            const std::vector<ModelCheckpoint>& segmentations,
                            const std::vector<Sample>& validation, const PipelineConfig& config) {
  config.validate();
  if (validation.empty()) throw DataError("ablation needs at least one validation sample");
  AblationTable table;
  for (const auto& s : segmentations) table.segmentation_iterations.push_back(s.iteration);
  const auto n = static_cast<double>(validation.size());
  for (const auto& p : proposals) {
    table.proposal_iterations.push_back(p.iteration);
    std::vector<double> row(segmentations.size() + 1, 0.0);
    for (const auto& s : validation) {
      const auto prob = infer_proposal(p.model, s.volume, config.proposal_dims);
      row[0] += dice_score(binarize(prob, kOutputThreshold), s.label) / n;
      PreparedValidation prepared{&s, std::nullopt};
      try {
        prepared.crop = segmentation_input(prob, s.volume, localize_proposal(prob, config), config);
      } catch (const EmptyProposal&) {
      }
      for (std::size_t j = 0; j < segmentations.size(); ++j) {
        row[j + 1] += prepared_dsc(segmentations[j].model, prepared) / n;
      }
    }
    table.dsc.push_back(std::move(row));
  }
  return table;
}

SampleEvaluation evaluate_sample(const FcnModel& proposal, const FcnModel& segmentation,
                                 const Sample& sample, const PipelineConfig& config) {
  SampleEvaluation out;
  out.id = sample.id;
  const auto prob = infer_proposal(proposal, sample.volume, config.proposal_dims);
  out.proposal_dsc = dice_score(binarize(prob, kOutputThreshold), sample.label);
  try {
    const auto input =
        segmentation_input(prob, sample.volume, localize_proposal(prob, config), config);
    out.metrics = compute_metrics(segment_crop(segmentation, input), sample.label);
  } catch (const EmptyProposal&) {
    out.failed = true;
  } catch (const EmptySegmentation&) {
    out.failed = true;
  }
  return out;
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  MetricReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.dsc += r.dsc;
    m.jsc += r.jsc;
    m.pi += r.pi;
    m.ri += r.ri;
  }
  const auto n = static_cast<double>(reports.size());
  m.dsc /= n;
  m.jsc /= n;
  m.pi /= n;
  m.ri /= n;
  return m;
}

std::string CrossValidationReport::to_csv() const {
  std::string out = "side,fold,id,dsc,jsc,pi,ri,proposal_dsc\n";
  char buf[32];
  auto row = [&](const std::string& side, const std::string& fold, const std::string& id,
                 const MetricReport& m, double proposal) {
    std::snprintf(buf, sizeof buf, ",%.6f", proposal);
    out += side + "," + fold + "," + id + "," + m.csv_row() + buf + "\n";
  };
  for (const auto& s : sides) {
    const std::string side = to_string(s.side);
    for (const auto& f : s.folds) {
      for (const auto& e : f.samples) row(side, std::to_string(f.fold), e.id, e.metrics, e.proposal_dsc);
      row(side, std::to_string(f.fold), "mean", f.mean, f.proposal_dsc);
    }
    row(side, "all", "mean", s.mean, s.proposal_dsc);
  }
  return out;
}

CrossValidationReport cross_validate(const Manifest& manifest, const PipelineConfig& config,
                                     const TrainOptions& options, const std::vector<Side>& sides) {
  config.validate();
  const int folds = manifest.fold_count();
  if (folds < 2) throw DataError("cross-validation needs at least two folds in the manifest");
  for (int f = 0; f < folds; ++f) {
    if (manifest.fold_members(f).empty()) {
      throw DataError("fold " + std::to_string(f) + " has no samples");
    }
  }

  CrossValidationReport report;
  for (auto side : sides) report.sides.push_back({side, std::vector<FoldReport>(folds), {}, 0.0});

  std::mutex log_mutex;
  const auto opts = locked(options, log_mutex);
  const std::size_t tasks = sides.size() * static_cast<std::size_t>(folds);
  run_jobs(tasks, config.jobs, [&](std::size_t task) {
    const auto si = task / static_cast<std::size_t>(folds);
    const int fold = static_cast<int>(task % static_cast<std::size_t>(folds));
    const Side side = sides[si];
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      if (manifest.entries[i].fold != fold) train_idx.push_back(i);
    }
    const auto train = load_samples(manifest, side, train_idx);
    const auto held_out = load_samples(manifest, side, manifest.fold_members(fold));

    TrainOptions o = opts;
    o.keep_checkpoints = false;
    const std::string tag = std::string(to_string(side)) + "_fold" + std::to_string(fold);
    o.prefix = tag + "_proposal";
    auto user_log = opts.log;
    if (user_log) o.log = [user_log, tag](const std::string& l) { user_log("[" + tag + "] " + l); };
    // Validation is the held-out fold; it never feeds back into training.
    const auto proposal = train_proposal(train, held_out, config, o);
    o.prefix = tag + "_segmentation";
    const auto segmentation =
        train_segmentation(train, held_out, proposal.final_model(), config, o);

    FoldReport fr;
    fr.fold = fold;
    std::vector<MetricReport> metrics;
    double proposal_sum = 0.0;
    for (const auto& s : held_out) {
      auto e = evaluate_sample(proposal.final_model(), segmentation.final_model(), s, config);
      if (e.failed && o.log) o.log("sample " + s.id + " produced no segmentation; scored 0");
      metrics.push_back(e.metrics);
      proposal_sum += e.proposal_dsc;
      fr.samples.push_back(std::move(e));
    }
    fr.mean = mean_report(metrics);
    fr.proposal_dsc = proposal_sum / static_cast<double>(held_out.size());
    if (o.log) o.log("fold mean dsc " + std::to_string(fr.mean.dsc));
    report.sides[si].folds[static_cast<std::size_t>(fold)] = std::move(fr);
  });

  for (auto& s : report.sides) {
    std::vector<MetricReport> per_fold;
    double proposal_sum = 0.0;
    for (const auto& f : s.folds) {
      per_fold.push_back(f.mean);
      proposal_sum += f.proposal_dsc;
    }
    s.mean = mean_report(per_fold);
    s.proposal_dsc = proposal_sum / static_cast<double>(s.folds.size());
  }
  return report;
}

}  // namespace hipseg
