// tdcnn: synthesize data, preprocess, train, cross-validate, evaluate,
// predict, compare hidden topologies, and run the gradient self-check.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "tdcnn/checkpoint.hpp"
#include "tdcnn/dataset.hpp"
#include "tdcnn/gradcheck.hpp"
#include "tdcnn/pgm.hpp"
#include "tdcnn/reports.hpp"
#include "tdcnn/synth.hpp"
#include "tdcnn/train.hpp"

namespace fs = std::filesystem;
using namespace tdcnn;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

// Raised for argument combinations CLI11 cannot express.
struct UsageError : Error {
  using Error::Error;
};

struct PrepFlags {
  std::size_t input_size = 300;
  bool no_denoise = false;
  bool no_enhance = false;

  PreprocessOptions options() const { return {input_size, input_size, !no_denoise, !no_enhance}; }
};

struct TrainFlags {
  std::string manifest;
  std::string out = "run";
  std::string arch = "recto-triangular";
  int precision = 32;
  TrainConfig cfg;
  PrepFlags prep;
};

void add_prep_flags(CLI::App* cmd, PrepFlags& p, bool from_checkpoint = false) {
  if (from_checkpoint) {
    p.input_size = 0;
    cmd->add_option("--input-size", p.input_size, "Square side images are resized to (0 = checkpoint input)");
  } else {
    cmd->add_option("--input-size", p.input_size, "Square side images are resized to")->check(CLI::PositiveNumber);
  }
  cmd->add_flag("--no-denoise", p.no_denoise, "Skip the 3x3 median filter");
  cmd->add_flag("--no-enhance", p.no_enhance, "Skip the Laplacian sharpening");
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--manifest", f.manifest, "Training manifest CSV")->required();
  cmd->add_option("--arch", f.arch, "Hidden topology")
      ->check(CLI::IsMember({"triangular", "rectangular", "recto-triangular"}));
  cmd->add_option("--epochs", f.cfg.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", f.cfg.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.cfg.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  cmd->add_option("--gamma", f.cfg.gamma, "Focal loss focusing parameter")->check(CLI::NonNegativeNumber);
  cmd->add_option("--class-weights", f.cfg.class_weights, "Per-class loss weights, healthy,tumor")
      ->delimiter(',')
      ->expected(2);
  cmd->add_option("--seed", f.cfg.seed, "Random seed");
  cmd->add_option("--precision", f.precision, "Floating-point width")->check(CLI::IsMember({32, 64}));
  cmd->add_option("--patience", f.cfg.patience, "Early-stopping patience in epochs (0 = off)");
  cmd->add_option("--val-fraction", f.cfg.val_fraction, "Share of training data held out for validation curves")
      ->check(CLI::Range(0.0, 0.99));
  cmd->add_flag("--augment", f.cfg.augment, "Add rotations and flip of each training image");
  cmd->add_option("--out", f.out, "Output directory");
  add_prep_flags(cmd, f.prep);
}

TrainConfig resolved(const TrainFlags& f) {
  TrainConfig cfg = f.cfg;
  cfg.precision = f.precision == 64 ? Precision::F64 : Precision::F32;
  return cfg;
}

void print_config(const CLI::App* cmd) {
  fmt::print("[{}]\n{}\n", cmd->get_name(), cmd->config_to_str(true, false));
  std::fflush(stdout);
}

LabeledSet load_training_set(const std::string& manifest, const PrepFlags& prep) {
  const auto m = load_manifest(manifest);
  std::size_t counts[2] = {0, 0};
  for (const auto& s : m.samples) ++counts[s.label];
  if (counts[kHealthy] == 0 || counts[kTumor] == 0) {
    throw DataError(manifest + ": training needs at least one healthy and one tumor sample");
  }
  fmt::print("loaded {} images ({} healthy, {} tumor) from {}\n", m.samples.size(), counts[kHealthy], counts[kTumor],
             manifest);
  return load_dataset(m, prep.options());
}

void print_epoch(const std::string& prefix, const EpochLog& l) {
  std::string val;
  if (l.has_validation) val = fmt::format("  val_loss {:.5f}  val_acc {:.5f}", l.val_loss, l.val_accuracy);
  fmt::print("{}epoch {:3}  loss {:.5f}  acc {:.5f}{}  ({:.1f}s)\n", prefix, l.epoch, l.train_loss, l.train_accuracy,
             val, l.seconds);
  std::fflush(stdout);
}

void print_report(const MetricsReport& r) {
  fmt::print("TP {}  TN {}  FP {}  FN {}\n", r.cm.tp, r.cm.tn, r.cm.fp, r.cm.fn);
  fmt::print("accuracy {:.5f}  precision {:.5f}{}  recall {:.5f}{}  f1 {:.5f}{}\n", r.accuracy, r.precision,
             r.precision_undefined ? " (undefined)" : "", r.recall, r.recall_undefined ? " (undefined)" : "", r.f1,
             r.f1_undefined ? " (undefined)" : "");
}

// ---- synth ----

int run_synth(SynthConfig cfg, std::size_t size, const std::string& out) {
  cfg.height = cfg.width = size;
  fs::create_directories(out);
  const auto m = generate_synthetic(cfg, out);
  fmt::print("wrote {} images and manifest.csv to {}\n", m.samples.size(), out);
  return kOk;
}

// ---- preprocess ----

int run_preprocess(const std::string& manifest, const std::string& out, const PrepFlags& prep) {
  const auto m = load_manifest(manifest);
  fs::create_directories(out);
  Manifest result;
  result.source = "preprocessed from " + manifest;
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    const auto& s = m.samples[i];
    const auto dst = fs::path(out) / fmt::format("pre_{:05}.pgm", i);
    write_pgm(preprocess(read_pgm(s.path), prep.options()), dst);
    result.samples.push_back({dst, s.label, s.subject_id});
  }
  write_manifest(result, fs::path(out) / "manifest.csv");
  fmt::print("wrote {} preprocessed images and manifest.csv to {}\n", result.samples.size(), out);
  return kOk;
}

// ---- train ----

template <typename T>
int train_impl(const TrainFlags& f) {
  const auto cfg = resolved(f);
  const auto set = load_training_set(f.manifest, f.prep);
  Model<T> model(ModelSpec::for_arch(parse_arch(f.arch), f.prep.input_size, f.prep.input_size), cfg.seed);
  fmt::print("model: {} parameters\n", model.param_count());
  const auto logs = fit(model, set, cfg, [](const EpochLog& l) { print_epoch("", l); });
  fs::create_directories(f.out);
  const fs::path out(f.out);
  save_checkpoint(model, out / "model.ckpt");
  write_text(epoch_log_csv(logs), out / "epochs.csv");
  write_curves_svg(logs, out / "curves.svg");
  fmt::print("wrote {}, {}, {}\n", (out / "model.ckpt").string(), (out / "epochs.csv").string(),
             (out / "curves.svg").string());
  return kOk;
}

int run_train(const TrainFlags& f) {
  resolved(f).validate();
  return f.precision == 64 ? train_impl<double>(f) : train_impl<float>(f);
}

// ---- crossval ----

struct CrossvalFlags {
  TrainFlags train;
  std::size_t folds = 10;
  std::string mode = "random";
};

template <typename T>
int crossval_impl(const CrossvalFlags& f) {
  const auto cfg = resolved(f.train);
  const auto set = load_training_set(f.train.manifest, f.train.prep);
  const auto spec = ModelSpec::for_arch(parse_arch(f.train.arch), f.train.prep.input_size, f.train.prep.input_size);
  const auto plan = split_kfold(set.subjects, f.folds, parse_fold_mode(f.mode), cfg.seed);
  CrossValHooks<T> hooks;
  hooks.on_epoch = [](std::size_t fold, const EpochLog& l) { print_epoch(fmt::format("fold {:2}  ", fold + 1), l); };
  const auto res = cross_validate<T>(spec, set, cfg, plan, hooks);
  for (std::size_t i = 0; i < res.folds.size(); ++i) {
    const auto& r = res.folds[i];
    fmt::print("fold {:2}: accuracy {:.5f}  precision {:.5f}  recall {:.5f}  f1 {:.5f}\n", i + 1, r.accuracy,
               r.precision, r.recall, r.f1);
  }
  const auto& s = res.summary;
  fmt::print("mean accuracy {:.5f} ± {:.5f}  precision {:.5f} ± {:.5f}  recall {:.5f} ± {:.5f}  f1 {:.5f} ± {:.5f}\n",
             s.accuracy.mean, s.accuracy.stddev, s.precision.mean, s.precision.stddev, s.recall.mean,
             s.recall.stddev, s.f1.mean, s.f1.stddev);
  fs::create_directories(f.train.out);
  const auto path = fs::path(f.train.out) / "metrics.csv";
  write_metrics_csv(res.folds, path);
  fmt::print("wrote {}\n", path.string());
  return kOk;
}

int run_crossval(const CrossvalFlags& f) {
  resolved(f.train).validate();
  return f.train.precision == 64 ? crossval_impl<double>(f) : crossval_impl<float>(f);
}

// ---- evaluate / predict ----

struct EvalFlags {
  std::string checkpoint;
  std::string manifest;
  std::string out;
  PrepFlags prep;
};

PreprocessOptions checkpoint_prep(const ModelSpec& spec, const PrepFlags& prep) {
  auto opts = prep.options();
  if (prep.input_size != 0 && (prep.input_size != spec.input_height || prep.input_size != spec.input_width)) {
    throw UsageError(fmt::format("--input-size {} does not match the checkpoint input {}x{}", prep.input_size,
                                 spec.input_height, spec.input_width));
  }
  opts.height = spec.input_height;
  opts.width = spec.input_width;
  fmt::print(stderr, "input size {}x{} from checkpoint\n", opts.height, opts.width);
  return opts;
}

int run_evaluate(const EvalFlags& f) {
  const auto any = load_checkpoint(f.checkpoint);
  return std::visit(
      [&](const auto& model) {
        const auto set = load_dataset(load_manifest(f.manifest), checkpoint_prep(model.spec(), f.prep));
        if (set.empty()) throw DataError(f.manifest + ": no samples to evaluate");
        const auto ev = score(model, set);
        const auto report = metrics(ev.cm);
        print_report(report);
        if (!f.out.empty()) {
          const std::vector<MetricsReport> one{report};
          write_metrics_csv(one, f.out);
          fmt::print("wrote {}\n", f.out);
        }
        return static_cast<int>(kOk);
      },
      any);
}

struct PredictFlags {
  std::string checkpoint;
  std::vector<std::string> images;
  PrepFlags prep;
};

int run_predict(const PredictFlags& f) {
  const auto any = load_checkpoint(f.checkpoint);
  return std::visit(
      [&](const auto& model) {
        using T = typename std::decay_t<decltype(model)>::value_type;
        const auto opts = checkpoint_prep(model.spec(), f.prep);
        int code = kOk;
        for (const auto& path : f.images) {
          GrayImage img;
          try {
            img = preprocess(read_pgm(path), opts);
          } catch (const DataError& e) {
            fmt::print(stderr, "warning: skipping {}: {}\n", path, e.what());
            code = kData;
            continue;
          }
          const auto probs = model_forward(model, normalize<T>(img).reshaped({1, 1, img.height, img.width}), false).probs;
          const int cls = probs(0, 1) > probs(0, 0) ? kTumor : kHealthy;
          fmt::print("{}\t{}\t{:.5f}\n", path, label_name(cls), static_cast<double>(probs(0, cls)));
        }
        return code;
      },
      any);
}

// ---- compare-archs ----

struct CompareFlags {
  TrainFlags train;
  std::string test_manifest;
  double test_fraction = 0.2;
  std::string csv = "comparison.csv";
};

template <typename T>
int compare_impl(const CompareFlags& f) {
  const auto cfg = resolved(f.train);
  auto set = load_training_set(f.train.manifest, f.train.prep);
  LabeledSet test;
  if (!f.test_manifest.empty()) {
    test = load_dataset(load_manifest(f.test_manifest), f.train.prep.options());
  } else {
    std::tie(set, test) = holdout_split(set, f.test_fraction, cfg.seed ^ 0x5bd1e995ULL);
  }
  fmt::print("train {} / test {} images\n", set.size(), test.size());
  const auto results = compare_archs<T>(set, test, f.train.prep.input_size, f.train.prep.input_size, cfg,
                                        [](HiddenArch a, const EpochLog& l) {
                                          print_epoch(fmt::format("{:<17} ", arch_name(a)), l);
                                        });
  fmt::print("\n{:<17} {:>9} {:>9} {:>9} {:>9}\n", "arch", "accuracy", "precision", "recall", "f1");
  for (const auto& r : results) {
    fmt::print("{:<17} {:>9.5f} {:>9.5f} {:>9.5f} {:>9.5f}\n", arch_name(r.arch), r.report.accuracy,
               r.report.precision, r.report.recall, r.report.f1);
  }
  const fs::path csv(f.csv);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  write_comparison_csv(results, csv);
  fmt::print("wrote {}\n", f.csv);
  return kOk;
}

int run_compare(const CompareFlags& f) {
  resolved(f.train).validate();
  return f.train.precision == 64 ? compare_impl<double>(f) : compare_impl<float>(f);
}

// ---- gradcheck ----

int run_gradcheck_cmd(const GradcheckOptions& opts) {
  bool ok = true;
  for (const auto& e : run_gradcheck(opts)) {
    fmt::print("{:<14} max rel error {:.3e}  (threshold {:.0e})  {}\n", e.name, e.max_rel_error, e.threshold,
               e.passed ? "ok" : "FAIL");
    ok = ok && e.passed;
  }
  fmt::print("{}\n", ok ? "gradcheck passed" : "gradcheck FAILED");
  return ok ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brain-tumor MRI classifier: data synthesis, preprocessing, training and evaluation"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  SynthConfig synth;
  std::size_t synth_size = 64;
  std::string synth_out;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic labeled image set");
  c_synth->add_option("--out", synth_out, "Output directory")->required();
  c_synth->add_option("--size", synth_size, "Image side in pixels")->check(CLI::PositiveNumber);
  c_synth->add_option("--healthy", synth.healthy, "Healthy image count");
  c_synth->add_option("--tumor", synth.tumor, "Tumor image count");
  c_synth->add_option("--noise", synth.noise_stddev, "Gaussian noise stddev")->check(CLI::NonNegativeNumber);
  c_synth->add_option("--delta", synth.tumor_delta, "Tumor intensity increase");
  c_synth->add_option("--radius-min", synth.radius_min, "Smallest tumor semi-axis")->check(CLI::PositiveNumber);
  c_synth->add_option("--radius-max", synth.radius_max, "Largest tumor semi-axis")->check(CLI::PositiveNumber);
  c_synth->add_option("--subject-block", synth.subject_block, "Images per subject id")->check(CLI::PositiveNumber);
  c_synth->add_option("--seed", synth.seed, "Random seed");

  std::string pre_manifest, pre_out;
  PrepFlags pre_flags;
  auto* c_pre = app.add_subcommand("preprocess", "Denoise, sharpen and resize every image of a manifest");
  c_pre->add_option("--manifest", pre_manifest, "Input manifest CSV")->required();
  c_pre->add_option("--out", pre_out, "Output directory")->required();
  add_prep_flags(c_pre, pre_flags);

  TrainFlags train;
  auto* c_train = app.add_subcommand("train", "Train one model and save a checkpoint");
  add_train_flags(c_train, train);

  CrossvalFlags cv;
  auto* c_cv = app.add_subcommand("crossval", "k-fold cross-validation");
  add_train_flags(c_cv, cv.train);
  c_cv->add_option("--folds", cv.folds, "Number of folds")->check(CLI::Range(2, 1000));
  c_cv->add_option("--cv-mode", cv.mode, "Fold assignment")->check(CLI::IsMember({"random", "subject"}));

  EvalFlags ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score a checkpoint on a labeled manifest");
  c_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  c_eval->add_option("--manifest", ev.manifest, "Labeled manifest CSV")->required();
  c_eval->add_option("--out", ev.out, "Optional metrics CSV");
  add_prep_flags(c_eval, ev.prep, true);

  PredictFlags pred;
  auto* c_pred = app.add_subcommand("predict", "Classify images with a checkpoint");
  c_pred->add_option("--checkpoint", pred.checkpoint, "Checkpoint file")->required();
  c_pred->add_option("images", pred.images, "PGM images")->required();
  add_prep_flags(c_pred, pred.prep, true);

  CompareFlags cmp;
  auto* c_cmp = app.add_subcommand("compare-archs", "Train all three hidden topologies and compare");
  add_train_flags(c_cmp, cmp.train);
  c_cmp->add_option("--test-manifest", cmp.test_manifest, "Test manifest (default: hold out --test-fraction)");
  c_cmp->add_option("--test-fraction", cmp.test_fraction, "Held-out share when no test manifest is given")
      ->check(CLI::Range(0.01, 0.99));
  c_cmp->add_option("--csv", cmp.csv, "Comparison CSV path");

  GradcheckOptions gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of every backward pass");
  c_gc->add_option("--seed", gc.seed, "Random seed");
  c_gc->add_flag("--perturb-conv-backward", gc.perturb_conv_backward)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const CLI::App* cmd = app.get_subcommands().front();
  print_config(cmd);
  try {
    if (cmd == c_synth) return run_synth(synth, synth_size, synth_out);
    if (cmd == c_pre) return run_preprocess(pre_manifest, pre_out, pre_flags);
    if (cmd == c_train) return run_train(train);
    if (cmd == c_cv) return run_crossval(cv);
    if (cmd == c_eval) return run_evaluate(ev);
    if (cmd == c_pred) return run_predict(pred);
    if (cmd == c_cmp) return run_compare(cmp);
    if (cmd == c_gc) return run_gradcheck_cmd(gc);
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const InvalidArgument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const NumericError& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kNumeric;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kData;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kData;
  }
  return kUsage;
}
