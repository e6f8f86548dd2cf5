#include "faceprior/cli.hpp"

#include "faceprior/corpus_io.hpp"
#include "faceprior/kernels.hpp"
#include "faceprior/model_io.hpp"
#include "faceprior/synth.hpp"
#include "faceprior/tracking.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace faceprior::cli {

namespace fs = std::filesystem;
using json::Json;

namespace {

struct Options {
  std::uint64_t seed = 1;
  std::string config;
  int threads = 0;

  std::string input;
  std::string out;
  std::string out_dir;
  std::string model;
  std::string frontal_model;
  std::string measurement_model;
  std::string tracked;
  std::string truth;

  // gen-data
  int n = 2000;
  std::vector<double> pose_deg;
  double pair_noise = 0.0;
  int sequences = 0;
  int length = 20;
  double noise = 0.05;
  double outlier_frame_prob = 0.1;
  double sequence_pose_deg = 0.0;
  int calibration_sequences = 50;

  // model sizes and training
  int hidden1 = 50;
  int hidden2 = 25;
  int factors = 32;
  int hidden_k = 20;
  double init_std = 0.1;
  int epochs = 500;
  double learning_rate = 0.01;
  int batch_size = 32;
  int cd_k = 1;
  double momentum = 0.5;
  double weight_decay = 1e-4;

  // sampling and fusion
  int samples = 100;
  int sweeps = 2;
  bool chained = false;
  std::string fusion = "gaussian";
  bool diagonal_sigma = false;

  // correct
  std::string corrupt = "outlier";
  double magnitude = 0.5;
  std::vector<int> targets;
  int trials = 100;
  int calibration_trials = 200;

  // track
  std::string mode = "fused";
  double q = 1e-4;
  double r = 0.0;  // 0 = derived from sigma_l
};

class Timer {
 public:
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    laps_.emplace_back(stage, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }
  Json to_json() const {
    Json doc;
    for (const auto& [stage, seconds] : laps_) doc[stage] = seconds;
    return doc;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, double>> laps_;
};

Json echo_config(const std::string& command, const Options& o) {
  Json c;
  c["command"] = command;
  c["seed"] = o.seed;
  c["input"] = o.input;
  c["out"] = o.out;
  c["out_dir"] = o.out_dir;
  c["model"] = o.model;
  c["frontal_model"] = o.frontal_model;
  c["measurement_model"] = o.measurement_model;
  c["tracked"] = o.tracked;
  c["truth"] = o.truth;
  c["n"] = o.n;
  c["pose_deg"] = o.pose_deg;
  c["pair_noise"] = o.pair_noise;
  c["sequences"] = o.sequences;
  c["length"] = o.length;
  c["noise"] = o.noise;
  c["outlier_frame_prob"] = o.outlier_frame_prob;
  c["sequence_pose_deg"] = o.sequence_pose_deg;
  c["calibration_sequences"] = o.calibration_sequences;
  c["hidden1"] = o.hidden1;
  c["hidden2"] = o.hidden2;
  c["factors"] = o.factors;
  c["hidden_k"] = o.hidden_k;
  c["init_std"] = o.init_std;
  c["epochs"] = o.epochs;
  c["learning_rate"] = o.learning_rate;
  c["batch_size"] = o.batch_size;
  c["cd_k"] = o.cd_k;
  c["momentum"] = o.momentum;
  c["weight_decay"] = o.weight_decay;
  c["samples"] = o.samples;
  c["sweeps"] = o.sweeps;
  c["chained"] = o.chained;
  c["fusion"] = o.fusion;
  c["diagonal_sigma"] = o.diagonal_sigma;
  c["corrupt"] = o.corrupt;
  c["magnitude"] = o.magnitude;
  c["targets"] = o.targets;
  c["trials"] = o.trials;
  c["calibration_trials"] = o.calibration_trials;
  c["mode"] = o.mode;
  c["q"] = o.q;
  c["r"] = o.r;
  return c;
}

std::uint64_t stage(const Options& o, const char* name) { return Rng::stage_seed(o.seed, name); }

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

fs::path out_dir(const Options& o) {
  require_path(o.out_dir, "--out-dir");
  fs::create_directories(o.out_dir);
  return o.out_dir;
}

void write_summary(const fs::path& path, const std::string& command, const Options& o,
                   Json results) {
  Json doc;
  doc["format_version"] = json::kFormatVersion;
  doc["command"] = command;
  doc["seed"] = o.seed;
  doc["config"] = echo_config(command, o);
  doc["results"] = std::move(results);
  json::write_file(path, doc);
}

// Wall-clock timings live beside the reports so the reports stay reproducible.
void write_timings(const fs::path& path, const Timer& timer) {
  json::write_file(path, timer.to_json());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_csv(const fs::path& path, const char* header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << header << '\n';
  return out;
}

TrainConfig train_config(const Options& o, const char* stage_name) {
  TrainConfig cfg;
  cfg.cd_steps = o.cd_k;
  cfg.learning_rate = o.learning_rate;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.momentum = o.momentum;
  cfg.weight_decay = o.weight_decay;
  cfg.rng_seed = stage(o, stage_name);
  cfg.validate();
  return cfg;
}

SamplerConfig sampler_config(const Options& o) {
  SamplerConfig s{o.sweeps, o.samples, !o.chained};
  s.validate();
  return s;
}

// Component means plus overall, one row per method.
Json error_table(const std::array<double, 4>& components, double overall) {
  Json t;
  for (std::size_t c = 0; c < 4; ++c) {
    t[std::string(component_name(kComponents[c]))] = components[c];
  }
  t["overall"] = overall;
  return t;
}

// Shape or pair corpus; pairs contribute their posed shape.
std::vector<ShapeRecord> read_shape_corpus(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string first;
  std::getline(in, first);
  in.close();
  if (first.find("\"posed\"") == std::string::npos) return read_shapes(path);
  std::vector<ShapeRecord> out;
  for (auto& p : read_pairs(path)) {
    out.push_back({p.id, p.expression_label, p.pose_deg, p.posed});
  }
  return out;
}

bool is_sequence_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string first;
  std::getline(in, first);
  return first.find("\"sequence_id\"") != std::string::npos;
}

Json model_doc_with_training(const ShapePrior& model, const std::string& command,
                             const Options& o) {
  Json doc = model_to_json(model);
  Json training;
  training["seed"] = o.seed;
  training["config"] = echo_config(command, o);
  doc["training"] = std::move(training);
  return doc;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const Options& o) {
  Timer timer;
  const fs::path dir = out_dir(o);
  DatasetOptions d;
  d.n = o.n;
  d.poses_deg = o.pose_deg;
  d.pair_noise = o.pair_noise;
  d.sequences = o.sequences;
  d.sequence_length = o.length;
  d.measurement_noise = o.noise;
  d.outlier_frame_prob = o.outlier_frame_prob;
  d.sequence_pose_deg = o.sequence_pose_deg;
  d.validate();
  Rng rng(stage(o, "gen-data"));
  const Dataset ds = make_dataset(d, rng);
  timer.lap("generate");

  Json results;
  write_shapes(dir / "shapes.jsonl", ds.frontal);
  results["shapes"] = ds.frontal.size();
  if (!ds.pairs.empty()) {
    write_pairs(dir / "pairs.jsonl", ds.pairs);
    results["pairs"] = ds.pairs.size();
  }
  if (!ds.sequences.empty()) {
    write_sequences(dir / "sequences.jsonl", ds.sequences);
    results["sequences"] = ds.sequences.size();
    // The simulator knows its noise process, so it calibrates sigma_l on an
    // independent set of sequences drawn from the same process.
    DatasetOptions cal = d;
    cal.n = 1;
    cal.poses_deg.clear();
    cal.sequences = o.calibration_sequences;
    if (cal.sequences < 1) throw ConfigError("--calibration-sequences must be >= 1");
    Rng cal_rng(stage(o, "gen-data/calibration"));
    std::vector<std::pair<Vector, Vector>> diffs;
    for (const auto& seq : make_dataset(cal, cal_rng).sequences) {
      for (const auto& f : seq.frames) {
        diffs.emplace_back(f.measurement.coords(), f.ground_truth->coords());
      }
    }
    const MeasurementModel mm = estimate_sigma_l(diffs, 1e-6, o.diagonal_sigma);
    json::write_file(dir / "measurement_model.json", measurement_to_json(mm));
    results["calibration_frames"] = diffs.size();
  }
  write_summary(dir / "summary.json", "gen-data", o, results);
  timer.lap("write");
  write_timings(dir / "timings.json", timer);
  std::cout << "gen-data: " << ds.frontal.size() << " shapes, " << ds.pairs.size() << " pairs, "
            << ds.sequences.size() << " sequences -> " << dir.string() << '\n';
  return 0;
}

int cmd_train_frontal(const Options& o) {
  Timer timer;
  require_path(o.input, "--input");
  require_path(o.out, "--out");
  std::vector<ShapeVector> shapes;
  for (auto& r : read_shapes(o.input)) shapes.push_back(std::move(r.coords));
  timer.lap("load");
  const FrontalSizes sizes{o.hidden1, o.hidden2};
  const FrontalPriorModel model = train_frontal(shapes, sizes, train_config(o, "train-frontal"));
  timer.lap("train");
  json::write_file(o.out, model_doc_with_training(model, "train-frontal", o));
  write_timings(o.out + ".timings.json", timer);
  std::cout << "train-frontal: " << shapes.size() << " shapes, H1=" << model.hidden1()
            << " H2=" << model.hidden2() << " -> " << o.out << '\n';
  return 0;
}

int cmd_train_pose(const Options& o) {
  Timer timer;
  require_path(o.input, "--input");
  require_path(o.out, "--out");
  require_path(o.frontal_model, "--frontal-model");
  const ShapePrior loaded = load_model(o.frontal_model);
  const auto* frontal = std::get_if<FrontalPriorModel>(&loaded);
  if (!frontal) throw ConfigError("--frontal-model must hold a frontal model");
  const auto pairs = read_pairs(o.input);
  timer.lap("load");
  const ThreeWaySizes sizes{o.hidden_k, o.factors, o.init_std};
  const PosePriorModel model =
      train_pose_prior(*frontal, pairs, sizes, train_config(o, "train-pose"));
  timer.lap("train");
  json::write_file(o.out, model_doc_with_training(model, "train-pose", o));
  write_timings(o.out + ".timings.json", timer);
  std::cout << "train-pose: " << pairs.size() << " pairs, K=" << o.hidden_k
            << " F=" << o.factors << " -> " << o.out << '\n';
  return 0;
}

int cmd_sample(const Options& o) {
  Timer timer;
  require_path(o.model, "--model");
  require_path(o.input, "--input");
  require_path(o.out, "--out");
  const ShapePrior model = load_model(o.model);
  const auto inputs = read_shape_corpus(o.input);
  const SamplerConfig sampler = sampler_config(o);
  timer.lap("load");
  const std::uint64_t base = stage(o, "sample");
  std::vector<std::vector<ShapeVector>> drawn(inputs.size());
  kernels::parallel_for(static_cast<Index>(inputs.size()), [&](Index i) {
    Rng rng(Rng::derive_seed(base, static_cast<std::uint64_t>(i)));
    const auto slot = static_cast<std::size_t>(i);
    drawn[slot] = sample_prior(model, inputs[slot].coords, sampler, rng);
  });
  timer.lap("sample");
  std::vector<ShapeRecord> out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t d = 0; d < drawn[i].size(); ++d) {
      char suffix[32];
      std::snprintf(suffix, sizeof(suffix), "/sample-%03zu", d);
      out.push_back({inputs[i].id + suffix, inputs[i].expression_label, inputs[i].pose_deg,
                     drawn[i][d]});
    }
  }
  write_shapes(o.out, out);
  write_timings(o.out + ".timings.json", timer);
  std::cout << "sample: " << out.size() << " samples -> " << o.out << '\n';
  return 0;
}

CorruptionSpec corruption_for_trial(const Options& o, Rng& rng) {
  CorruptionSpec spec;
  spec.mode = parse_corruption(o.corrupt);
  spec.magnitude = o.magnitude;
  for (int t : o.targets) spec.targets.push_back(t);
  // Without explicit targets a single outlier lands on a random landmark.
  if (spec.mode == CorruptionMode::outlier_point && spec.targets.empty()) {
    spec.targets.push_back(static_cast<Index>(rng.below(kLandmarks)));
  }
  spec.validate();
  return spec;
}

MeasurementModel load_or_estimate(const Options& o,
                                  const std::function<std::vector<std::pair<Vector, Vector>>()>&
                                      calibrate,
                                  std::string& source) {
  if (!o.measurement_model.empty()) {
    source = "file";
    return measurement_from_json(json::read_file(o.measurement_model));
  }
  source = "estimated";
  return estimate_sigma_l(calibrate(), 1e-6, o.diagonal_sigma);
}

int cmd_correct(const Options& o) {
  Timer timer;
  require_path(o.model, "--model");
  require_path(o.input, "--input");
  const fs::path dir = out_dir(o);
  const ShapePrior model = load_model(o.model);
  const auto truth = read_shape_corpus(o.input);
  if (truth.empty()) throw ConfigError("--input holds no shapes");
  if (o.trials < 1) throw ConfigError("--trials must be >= 1");
  if (o.calibration_trials < 2) throw ConfigError("--calibration-trials must be >= 2");
  const SamplerConfig sampler = sampler_config(o);
  timer.lap("load");

  // sigma_l is the covariance of the corruption itself, calibrated on
  // corruption draws independent of the evaluated ones.
  std::string sigma_source;
  FusionOptions fusion;
  fusion.method = parse_fusion(o.fusion);
  fusion.measurement = load_or_estimate(
      o,
      [&] {
        Rng cal(stage(o, "correct/calibration"));
        std::vector<std::pair<Vector, Vector>> diffs;
        for (int i = 0; i < o.calibration_trials; ++i) {
          const auto& t = truth[static_cast<std::size_t>(i) % truth.size()].coords;
          const CorruptionSpec spec = corruption_for_trial(o, cal);
          diffs.emplace_back(corrupt(t, spec, cal).coords(), t.coords());
        }
        return diffs;
      },
      sigma_source);
  timer.lap("calibrate");

  const auto trials = static_cast<std::size_t>(o.trials);
  std::vector<ShapeVector> measured(trials);
  std::vector<ShapeVector> corrected(trials);
  std::vector<std::vector<Index>> affected(trials);
  const std::uint64_t base = stage(o, "correct");
  kernels::parallel_for(static_cast<Index>(trials), [&](Index i) {
    const auto slot = static_cast<std::size_t>(i);
    Rng rng(Rng::derive_seed(base, slot));
    const auto& t = truth[slot % truth.size()].coords;
    const CorruptionSpec spec = corruption_for_trial(o, rng);
    affected[slot] = spec.affected_landmarks();
    measured[slot] = corrupt(t, spec, rng);
    corrected[slot] = correct_shape(model, measured[slot], sampler, fusion, rng);
  });
  timer.lap("correct");

  std::vector<ShapeRecord> corrected_records;
  std::vector<ShapeRecord> measured_records;
  std::vector<ShapeRecord> truth_records;
  auto csv = open_csv(dir / "corrections.csv", "trial,point,corrupted,baseline_error,corrected_error");
  double corrupted_before = 0.0;
  double corrupted_after = 0.0;
  double all_before = 0.0;
  double all_after = 0.0;
  std::size_t corrupted_count = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const ShapeRecord& t = truth[i % truth.size()];
    char id[32];
    std::snprintf(id, sizeof(id), "trial-%06zu", i);
    corrected_records.push_back({id, t.expression_label, t.pose_deg, corrected[i]});
    measured_records.push_back({id, t.expression_label, t.pose_deg, measured[i]});
    truth_records.push_back({id, t.expression_label, t.pose_deg, t.coords});
    const Vector before = interocular_error(measured[i], t.coords);
    const Vector after = interocular_error(corrected[i], t.coords);
    std::vector<bool> hit(kLandmarks, false);
    for (Index p : affected[i]) hit[static_cast<std::size_t>(p)] = true;
    for (Index p = 0; p < kLandmarks; ++p) {
      const bool h = hit[static_cast<std::size_t>(p)];
      csv << i << ',' << p << ',' << (h ? 1 : 0) << ',' << fmt(before(p)) << ','
          << fmt(after(p)) << '\n';
      if (h) {
        corrupted_before += before(p);
        corrupted_after += after(p);
        ++corrupted_count;
      }
    }
    all_before += before.sum();
    all_after += after.sum();
  }
  write_shapes(dir / "corrected.jsonl", corrected_records);
  write_shapes(dir / "measured.jsonl", measured_records);
  write_shapes(dir / "truth.jsonl", truth_records);

  const double n_all = static_cast<double>(trials * kLandmarks);
  const double cb = corrupted_count ? corrupted_before / static_cast<double>(corrupted_count) : 0.0;
  const double ca = corrupted_count ? corrupted_after / static_cast<double>(corrupted_count) : 0.0;
  Json results;
  results["trials"] = trials;
  results["sigma_l_source"] = sigma_source;
  results["corrupted_points"] = corrupted_count;
  results["corrupted_error_before"] = cb;
  results["corrupted_error_after"] = ca;
  results["corrupted_reduction_percent"] = cb > 0.0 ? 100.0 * (cb - ca) / cb : 0.0;
  results["all_points_error_before"] = all_before / n_all;
  results["all_points_error_after"] = all_after / n_all;
  write_summary(dir / "summary.json", "correct", o, results);
  timer.lap("write");
  write_timings(dir / "timings.json", timer);
  std::printf("correct: corrupted-point error %.4f -> %.4f (%.1f%% reduction) over %zu trials\n",
              cb, ca, cb > 0.0 ? 100.0 * (cb - ca) / cb : 0.0, trials);
  return 0;
}

int cmd_track(const Options& o) {
  Timer timer;
  require_path(o.input, "--input");
  const fs::path dir = out_dir(o);
  const auto sequences = read_sequences(o.input);
  TrackOptions options;
  if (o.mode == "fused") {
    options.mode = TrackMode::fused;
  } else if (o.mode == "measurement") {
    options.mode = TrackMode::measurement_only;
  } else {
    throw ConfigError("--mode must be fused or measurement, got '" + o.mode + "'");
  }
  ShapePrior model;
  std::string sigma_source = "none";
  if (options.mode == TrackMode::fused) {
    require_path(o.model, "--model");
    model = load_model(o.model);
    options.sampler = sampler_config(o);
    options.fusion.method = parse_fusion(o.fusion);
    options.fusion.measurement = load_or_estimate(
        o,
        [&] {
          std::vector<std::pair<Vector, Vector>> diffs;
          for (const auto& seq : sequences) {
            for (const auto& f : seq.frames) {
              if (f.ground_truth) diffs.emplace_back(f.measurement.coords(), f.ground_truth->coords());
            }
          }
          if (diffs.size() < 2) {
            throw ConfigError("no --measurement-model and too few ground-truth frames to estimate one");
          }
          return diffs;
        },
        sigma_source);
    options.process_noise_q = o.q;
    if (o.r < 0.0) throw ConfigError("--r must be >= 0");
    if (o.r > 0.0) options.measurement_noise_r = o.r;
  }
  timer.lap("load");

  const auto reports = track_sequences(sequences, model, options, stage(o, "track"));
  timer.lap("track");

  std::vector<ShapeSequence> tracked;
  auto csv = open_csv(dir / "errors.csv", "sequence,frame,point,error,baseline_error");
  std::map<int, std::pair<double, double>> curve;
  std::map<int, int> curve_count;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    const auto& rep = reports[s];
    ShapeSequence out{seq.id, {}};
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      SequenceFrame frame = seq.frames[f];
      frame.measurement = rep.tracked[f];
      out.frames.push_back(std::move(frame));
    }
    tracked.push_back(std::move(out));
    for (std::size_t row = 0; row < rep.errors.size(); ++row) {
      const int frame = rep.frame_index[row];
      for (Index p = 0; p < kLandmarks; ++p) {
        csv << seq.id << ',' << frame << ',' << p << ',' << fmt(rep.errors[row](p)) << ','
            << fmt(rep.baseline[row](p)) << '\n';
      }
      auto& c = curve[frame];
      c.first += rep.errors[row].mean();
      c.second += rep.baseline[row].mean();
      ++curve_count[frame];
    }
  }
  write_sequences(dir / "tracked.jsonl", tracked);
  auto curve_csv = open_csv(dir / "curve.csv", "frame,error,baseline_error");
  for (const auto& [frame, sums] : curve) {
    const double n = curve_count[frame];
    curve_csv << frame << ',' << fmt(sums.first / n) << ',' << fmt(sums.second / n) << '\n';
  }

  const TrackReport merged = merge_reports(reports);
  Json results;
  results["sequences"] = sequences.size();
  results["frames_with_truth"] = merged.errors.size();
  results["sigma_l_source"] = sigma_source;
  results["measurement_only"] =
      error_table(merged.baseline_component_mean, merged.baseline_overall);
  results["proposed"] = error_table(merged.component_mean, merged.overall);
  results["overall_improvement_percent"] = merged.improvement_percent;
  write_summary(dir / "summary.json", "track", o, results);
  timer.lap("write");
  write_timings(dir / "timings.json", timer);
  std::printf("track: overall error %.4f (measurement-only %.4f, improvement %.1f%%)\n",
              merged.overall, merged.baseline_overall, merged.improvement_percent);
  return 0;
}

int cmd_eval(const Options& o) {
  Timer timer;
  require_path(o.tracked, "--tracked");
  require_path(o.truth, "--truth");
  const fs::path dir = out_dir(o);

  // Sequence files compare the tracked file's measurements with the truth
  // file's ground truth (or its measurements when a frame has none).
  std::vector<std::string> ids;
  std::vector<ShapeVector> estimates;
  std::vector<ShapeVector> references;
  if (is_sequence_file(o.tracked)) {
    const auto tracked = read_sequences(o.tracked);
    const auto truth = read_sequences(o.truth);
    if (tracked.size() != truth.size()) throw ConfigError("sequence counts differ");
    for (std::size_t s = 0; s < tracked.size(); ++s) {
      if (tracked[s].id != truth[s].id || tracked[s].frames.size() != truth[s].frames.size()) {
        throw ConfigError("sequence '" + tracked[s].id + "' does not match the truth file");
      }
      for (std::size_t f = 0; f < tracked[s].frames.size(); ++f) {
        const auto& tf = truth[s].frames[f];
        ids.push_back(tracked[s].id + "/" + std::to_string(f));
        estimates.push_back(tracked[s].frames[f].measurement);
        references.push_back(tf.ground_truth ? *tf.ground_truth : tf.measurement);
      }
    }
  } else {
    const auto tracked = read_shape_corpus(o.tracked);
    const auto truth = read_shape_corpus(o.truth);
    if (tracked.size() != truth.size()) throw ConfigError("record counts differ");
    for (std::size_t i = 0; i < tracked.size(); ++i) {
      if (tracked[i].id != truth[i].id) {
        throw ConfigError("record '" + tracked[i].id + "' does not match truth '" + truth[i].id + "'");
      }
      ids.push_back(tracked[i].id);
      estimates.push_back(tracked[i].coords);
      references.push_back(truth[i].coords);
    }
  }
  timer.lap("load");

  TrackReport report;
  auto csv = open_csv(dir / "errors.csv", "record,point,error");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Vector err = interocular_error(estimates[i], references[i]);
    for (Index p = 0; p < kLandmarks; ++p) csv << ids[i] << ',' << p << ',' << fmt(err(p)) << '\n';
    report.errors.push_back(err);
    report.baseline.push_back(err);
  }
  report.summarize();
  Json results;
  results["records"] = ids.size();
  results["errors"] = error_table(report.component_mean, report.overall);
  write_summary(dir / "summary.json", "eval", o, results);
  timer.lap("write");
  write_timings(dir / "timings.json", timer);
  std::printf("eval: overall error %.6f over %zu records\n", report.overall, ids.size());
  return 0;
}

// ---------------------------------------------------------------------------

std::string json_scalar(const Json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number()) return fmt(v.get<double>());
  throw ConfigError("config key '" + key + "' must be a scalar or an array of scalars");
}

// Values from the config file fill only options not given on the command line.
void apply_config_file(CLI::App& sub, const std::string& path) {
  const Json doc = json::read_file(path);
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "format_version") continue;
    if (key == "config") throw ConfigError("config files cannot nest --config");
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt) {
      throw ConfigError("unknown config key '" + key + "' for command " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& e : value) opt->add_result(json_scalar(e, key));
    } else {
      opt->add_result(json_scalar(value, key));
    }
    opt->run_callback();
  }
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Master seed; every stage derives its own stream");
  sub->add_option("--config", o.config, "JSON config file; command-line flags override it");
  sub->add_option("--threads", o.threads, "OpenMP threads (0 = runtime default)");
}

void add_training(CLI::App* sub, Options& o) {
  sub->add_option("--epochs", o.epochs);
  sub->add_option("--learning-rate", o.learning_rate);
  sub->add_option("--batch-size", o.batch_size);
  sub->add_option("--cd-k", o.cd_k, "Gibbs steps in the CD negative phase");
  sub->add_option("--momentum", o.momentum);
  sub->add_option("--weight-decay", o.weight_decay);
}

void add_sampling(CLI::App* sub, Options& o) {
  sub->add_option("--samples", o.samples, "Local prior samples D");
  sub->add_option("--sweeps", o.sweeps, "Gibbs sweeps S per sample");
  sub->add_flag("--chained", o.chained, "One chain recording every S-th state");
}

void add_fusion(CLI::App* sub, Options& o) {
  add_sampling(sub, o);
  sub->add_option("--fusion", o.fusion, "gaussian | kde")
      ->check(CLI::IsMember({"gaussian", "kde"}));
  sub->add_option("--measurement-model", o.measurement_model, "sigma_l JSON file");
  sub->add_flag("--diagonal-sigma", o.diagonal_sigma, "Keep only the diagonal of an estimated sigma_l");
}

}  // namespace

int run(int argc, char** argv) {
  Options o;
  CLI::App app{"RBM face-shape priors: generate, train, correct, track, evaluate"};
  app.name("faceprior");
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "Generate synthetic shapes, pairs and sequences");
  add_common(gen, o);
  gen->add_option("--out-dir", o.out_dir);
  gen->add_option("--n", o.n, "Frontal shapes");
  gen->add_option("--pose-deg", o.pose_deg, "Pose angles for (frontal, posed) pairs");
  gen->add_option("--pair-noise", o.pair_noise);
  gen->add_option("--sequences", o.sequences, "Number of onset-apex sequences");
  gen->add_option("--length", o.length, "Frames per sequence");
  gen->add_option("--noise", o.noise, "Measurement noise std (interocular units)");
  gen->add_option("--outlier-frame-prob", o.outlier_frame_prob);
  gen->add_option("--sequence-pose-deg", o.sequence_pose_deg);
  gen->add_option("--calibration-sequences", o.calibration_sequences);
  gen->add_flag("--diagonal-sigma", o.diagonal_sigma);

  auto* tf = app.add_subcommand("train-frontal", "Train the frontal two-layer prior");
  add_common(tf, o);
  tf->add_option("--input", o.input, "Shape corpus (JSON Lines)");
  tf->add_option("--out", o.out, "Model JSON");
  tf->add_option("--hidden1", o.hidden1);
  tf->add_option("--hidden2", o.hidden2, "0 trains a single layer");
  add_training(tf, o);

  auto* tp = app.add_subcommand("train-pose", "Train the frontal-to-posed three-way RBM");
  add_common(tp, o);
  tp->add_option("--input", o.input, "Pair corpus (JSON Lines)");
  tp->add_option("--frontal-model", o.frontal_model);
  tp->add_option("--out", o.out, "Model JSON");
  tp->add_option("--factors", o.factors);
  tp->add_option("--hidden-k", o.hidden_k);
  tp->add_option("--init-std", o.init_std, "Factor weight initialization std");
  add_training(tp, o);

  auto* sm = app.add_subcommand("sample", "Draw local prior samples around each input shape");
  add_common(sm, o);
  sm->add_option("--model", o.model);
  sm->add_option("--input", o.input);
  sm->add_option("--out", o.out);
  add_sampling(sm, o);

  auto* cr = app.add_subcommand("correct", "Corrupt shapes, correct them with the prior, report");
  add_common(cr, o);
  cr->add_option("--model", o.model);
  cr->add_option("--input", o.input, "Truth shapes or pairs (posed side)");
  cr->add_option("--out-dir", o.out_dir);
  cr->add_option("--corrupt", o.corrupt, "outlier | half | noise")
      ->check(CLI::IsMember({"outlier", "half", "noise"}));
  cr->add_option("--magnitude", o.magnitude, "Displacement (outlier) or std (half, noise)");
  cr->add_option("--targets", o.targets, "Corrupted landmarks; default random (outlier) or left half");
  cr->add_option("--trials", o.trials);
  cr->add_option("--calibration-trials", o.calibration_trials);
  add_fusion(cr, o);

  auto* tr = app.add_subcommand("track", "Track sequences with Kalman filtering and prior fusion");
  add_common(tr, o);
  tr->add_option("--model", o.model);
  tr->add_option("--input", o.input, "Sequence corpus (JSON Lines)");
  tr->add_option("--out-dir", o.out_dir);
  tr->add_option("--mode", o.mode, "fused | measurement")
      ->check(CLI::IsMember({"fused", "measurement"}));
  tr->add_option("--q", o.q, "Kalman process noise");
  tr->add_option("--r", o.r, "Kalman measurement noise; trace(sigma_l)/52 by default");
  add_fusion(tr, o);

  auto* ev = app.add_subcommand("eval", "Interocular error of tracked shapes against truth");
  add_common(ev, o);
  ev->add_option("--tracked", o.tracked);
  ev->add_option("--truth", o.truth);
  ev->add_option("--out-dir", o.out_dir);

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (!o.config.empty()) apply_config_file(*sub, o.config);
    if (o.threads < 0) throw ConfigError("--threads must be >= 0");
    if (o.threads > 0) omp_set_num_threads(o.threads);

    const std::string name = sub->get_name();
    if (name == "gen-data") return cmd_gen_data(o);
    if (name == "train-frontal") return cmd_train_frontal(o);
    if (name == "train-pose") return cmd_train_pose(o);
    if (name == "sample") return cmd_sample(o);
    if (name == "correct") return cmd_correct(o);
    if (name == "track") return cmd_track(o);
    return cmd_eval(o);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 3;
  } catch (const DimensionError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace faceprior::cli
