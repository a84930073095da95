#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "test_support.hpp"
#include "tdcnn/synth.hpp"
#include "tdcnn/train.hpp"

using namespace tdcnn;

namespace {

ModelSpec small_spec() {
  auto s = ModelSpec::for_arch(HiddenArch::RectoTriangular, 32, 32);
  s.conv_filters = {4, 4, 4, 4, 4};
  s.hidden = {8, 8};
  s.head_width = 8;
  return s;
}

// In-memory synthetic set, subjects in blocks of 10.
LabeledSet synth_set(std::size_t n, std::size_t side, std::uint64_t seed, double delta = 80.0) {
  SynthConfig cfg;
  cfg.height = cfg.width = side;
  cfg.tumor_delta = delta;
  cfg.radius_min = 2.0;
  cfg.radius_max = 4.0;
  LabeledSet set;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    set.push_back(synth_image(cfg, label, seed ^ i), label, "s" + std::to_string(i / 10));
  }
  return set;
}

std::vector<std::string> subjects_of(std::size_t n, std::size_t block) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back("s" + std::to_string(i / block));
  return s;
}

}  // namespace

TEST_CASE("k-fold examples") {
  auto plan = split_kfold(subjects_of(100, 1), 10, FoldMode::Random, 1);
  REQUIRE(plan.folds.size() == 10);
  for (const auto& f : plan.folds) CHECK(f.size() == 10);

  plan = split_kfold(subjects_of(23, 1), 10, FoldMode::Random, 1);
  std::vector<std::size_t> sizes;
  for (const auto& f : plan.folds) sizes.push_back(f.size());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{2, 2, 2, 2, 2, 2, 2, 3, 3, 3});

  plan = split_kfold(subjects_of(100, 10), 10, FoldMode::SubjectWise, 1);
  const auto subj = subjects_of(100, 10);
  for (const auto& f : plan.folds) {
    std::set<std::string> ids;
    for (auto i : f) ids.insert(subj[i]);
    CHECK(ids.size() == 1);
    CHECK(f.size() == 10);
  }

  CHECK_THROWS_AS(split_kfold(subjects_of(9, 1), 10, FoldMode::Random, 1), InvalidArgument);
  CHECK_THROWS_AS(split_kfold(subjects_of(90, 10), 10, FoldMode::SubjectWise, 1), InvalidArgument);
  CHECK(parse_fold_mode("subject") == FoldMode::SubjectWise);
  CHECK_THROWS_AS(parse_fold_mode("loo"), InvalidArgument);
}

TEST_CASE("k-fold partitions exactly and keeps subjects together") {
  SeededRng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(9);
    std::vector<std::string> subj;
    const std::size_t n_subj = k + rng.uniform_index(30);
    for (std::size_t s = 0; s < n_subj; ++s) {
      const std::size_t reps = 1 + rng.uniform_index(7);
      for (std::size_t r = 0; r < reps; ++r) subj.push_back("p" + std::to_string(s));
    }
    rng.shuffle(subj);
    for (auto mode : {FoldMode::Random, FoldMode::SubjectWise}) {
      const auto plan = split_kfold(subj, k, mode, rng.next_u64());
      std::vector<int> seen(subj.size(), 0);
      std::size_t lo = subj.size(), hi = 0;
      for (const auto& f : plan.folds) {
        CHECK(std::is_sorted(f.begin(), f.end()));
        for (auto i : f) ++seen[i];
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
      }
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
      if (mode == FoldMode::Random) {
        CHECK(hi - lo <= 1);
      } else {
        std::map<std::string, std::set<std::size_t>> where;
        for (std::size_t f = 0; f < plan.folds.size(); ++f)
          for (auto i : plan.folds[f]) where[subj[i]].insert(f);
        for (const auto& [s, folds] : where) CHECK(folds.size() == 1);
      }
      const auto train = plan.training_indices(0);
      CHECK(train.size() + plan.folds[0].size() == subj.size());
    }
  }
}

TEST_CASE("k-fold is deterministic") {
  const auto subj = subjects_of(57, 3);
  for (auto mode : {FoldMode::Random, FoldMode::SubjectWise}) {
    CHECK(split_kfold(subj, 5, mode, 9).folds == split_kfold(subj, 5, mode, 9).folds);
    CHECK(split_kfold(subj, 5, mode, 9).folds != split_kfold(subj, 5, mode, 10).folds);
  }
}

TEST_CASE("metrics examples") {
  auto r = metrics({25, 25, 25, 25});
  CHECK(r.accuracy == 0.5);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);

  r = metrics({50, 40, 5, 5});
  CHECK(std::abs(r.accuracy - 0.9) < 1e-12);
  CHECK(std::abs(r.precision - 50.0 / 55.0) < 1e-12);
  CHECK(std::abs(r.recall - 50.0 / 55.0) < 1e-12);
  CHECK(std::abs(r.f1 - 50.0 / 55.0) < 1e-12);

  r = metrics({0, 10, 0, 5});
  CHECK(r.precision == 0.0);
  CHECK(r.precision_undefined);
  CHECK_FALSE(r.recall_undefined);
  CHECK(r.f1_undefined);

  CHECK_THROWS_AS(metrics({}), InvalidArgument);
}

TEST_CASE("metrics satisfy their defining formulas") {
  SeededRng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    ConfusionMatrix cm{rng.uniform_index(50), rng.uniform_index(50), rng.uniform_index(50), rng.uniform_index(50)};
    if (cm.total() == 0) continue;
    const auto r = metrics(cm);
    const double tp = cm.tp, tn = cm.tn, fp = cm.fp, fn = cm.fn;
    CHECK(std::abs(r.accuracy - (tp + tn) / (tp + tn + fp + fn)) <= 1e-12);
    if (tp + fp > 0) CHECK(std::abs(r.precision - tp / (tp + fp)) <= 1e-12);
    if (tp + fn > 0) CHECK(std::abs(r.recall - tp / (tp + fn)) <= 1e-12);
    if (r.precision > 0 && r.recall > 0) {
      CHECK(std::abs(r.f1 - 2 * r.precision * r.recall / (r.precision + r.recall)) <= 1e-12);
    }
    for (double v : {r.accuracy, r.precision, r.recall, r.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(r.cm == cm);
  }
}

TEST_CASE("summary statistics") {
  const std::vector<MetricsReport> reps{metrics({9, 1, 0, 0}), metrics({5, 3, 1, 1}), metrics({4, 4, 1, 1})};
  const auto s = summarize(reps);
  CHECK(std::abs(s.accuracy.mean - (1.0 + 0.8 + 0.8) / 3) <= 1e-12);
  const double m = s.accuracy.mean;
  const double var = ((1.0 - m) * (1.0 - m) + 2 * (0.8 - m) * (0.8 - m)) / 2.0;
  CHECK(std::abs(s.accuracy.stddev - std::sqrt(var)) <= 1e-12);
  CHECK(summarize(std::vector<MetricsReport>{metrics({1, 1, 0, 0})}).f1.stddev == 0.0);
}

TEST_CASE("confusion counts for perfect and inverted predictors") {
  std::vector<int> truth(20), inverted(20);
  for (int i = 0; i < 20; ++i) {
    truth[i] = i < 10;
    inverted[i] = 1 - truth[i];
  }
  CHECK(confusion_from_predictions(truth, truth) == ConfusionMatrix{10, 10, 0, 0});
  CHECK(confusion_from_predictions(truth, inverted) == ConfusionMatrix{0, 0, 10, 10});
}

TEST_CASE("evaluate equals a per-sample recount") {
  const auto set = synth_set(30, 32, 5);
  Model<float> m(small_spec(), 4);
  for (auto& p : m.parameters()) {
    if (p.name == "output.bias") (*p.value)[1] = 0.05f;
  }
  const auto cm = evaluate(m, set);
  ConfusionMatrix oracle;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::size_t idx[] = {i};
    const auto p = model_forward(m, make_batch<float>(set, idx), false).probs;
    const int pred = p(0, 1) > p(0, 0) ? 1 : 0;
    const int truth = set.labels[i];
    if (truth == 1 && pred == 1) ++oracle.tp;
    if (truth == 0 && pred == 0) ++oracle.tn;
    if (truth == 0 && pred == 1) ++oracle.fp;
    if (truth == 1 && pred == 0) ++oracle.fn;
  }
  CHECK(cm == oracle);
  CHECK(cm.total() == 30);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const auto set = synth_set(1, 32, 6);
  Model<float> m(small_spec(), 1);
  const auto before = m;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.lr = 0.0;
  const auto logs = train_model(m, set, nullptr, cfg);
  CHECK(m == before);
  REQUIRE(logs.size() == 1);
  CHECK(logs[0].train_loss >= 0.0);
  CHECK_FALSE(logs[0].has_validation);
}

TEST_CASE("64-bit training is bit-reproducible") {
  const auto set = synth_set(40, 32, 7);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 99;
  cfg.precision = Precision::F64;
  Model<double> a(small_spec(), 3), b(small_spec(), 3);
  const auto la = fit(a, set, cfg);
  const auto lb = fit(b, set, cfg);
  CHECK(a == b);
  REQUIRE(la.size() == lb.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    CHECK(la[i].train_loss == lb[i].train_loss);
    CHECK(la[i].val_loss == lb[i].val_loss);
    CHECK(la[i].train_accuracy == lb[i].train_accuracy);
    CHECK(la[i].has_validation);
    CHECK(la[i].max_row_sum_error <= prob_row_tolerance<double>());
  }
}

TEST_CASE("training loss falls on a separable synthetic set") {
  const auto set = synth_set(200, 32, 8, 120.0);
  TrainConfig cfg;
  cfg.epochs = 10;
  Model<float> m(ModelSpec::for_arch(HiddenArch::RectoTriangular, 32, 32), 8);
  const auto logs = train_model(m, set, nullptr, cfg);
  REQUIRE(logs.size() == 10);
  CHECK(logs.back().train_loss < logs.front().train_loss);
  for (const auto& l : logs) {
    CHECK(std::isfinite(l.train_loss));
    CHECK(l.train_accuracy >= 0.0);
    CHECK(l.train_accuracy <= 1.0);
    CHECK(l.max_row_sum_error <= 1e-5);
  }
}

TEST_CASE("early stopping halts after the patience window") {
  const auto set = synth_set(20, 32, 9);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.lr = 0.0;  // validation loss never improves after epoch 1
  cfg.patience = 2;
  Model<float> m(small_spec(), 2);
  const auto logs = fit(m, set, cfg);
  CHECK(logs.size() == 3);
}

TEST_CASE("invalid training configs are rejected") {
  TrainConfig cfg;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.lr = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.val_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  Model<float> m(small_spec(), 1);
  CHECK_THROWS_AS(train_model(m, LabeledSet{}, nullptr, TrainConfig{}), InvalidArgument);
}

TEST_CASE("holdout and augmentation stay on the training side") {
  const auto set = synth_set(50, 32, 10);
  const auto [train, hold] = holdout_split(set, 0.1, 3);
  CHECK(hold.size() == 5);
  CHECK(train.size() == 45);
  const auto aug = augment_set(train);
  CHECK(aug.size() == 5 * train.size());
  for (const auto& h : hold.images) {
    CHECK(std::find(aug.images.begin(), aug.images.end(), h) == aug.images.end());
  }
  CHECK(holdout_split(set, 0.999, 3).first.size() >= 1);
}

TEST_CASE("cross-validation coverage and aggregation") {
  const auto set = synth_set(20, 32, 11);
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto plan = split_kfold(set.subjects, 2, FoldMode::SubjectWise, 1);
  std::vector<std::size_t> fold_calls;
  CrossValHooks<float> hooks;
  hooks.on_epoch = [&](std::size_t f, const EpochLog&) { fold_calls.push_back(f); };
  const auto res = cross_validate<float>(small_spec(), set, cfg, plan, hooks);
  CHECK(res.folds.size() == 2);
  CHECK(fold_calls == std::vector<std::size_t>{0, 1});
  for (auto c : res.times_validated) CHECK(c == 1);
  const double mean = (res.folds[0].accuracy + res.folds[1].accuracy) / 2;
  CHECK(std::abs(res.summary.accuracy.mean - mean) <= 1e-12);

  const auto bad = split_kfold(subjects_of(19, 1), 2, FoldMode::Random, 1);
  CHECK_THROWS_AS(cross_validate<float>(small_spec(), set, cfg, bad), InvalidArgument);
}

TEST_CASE("a constant predictor scores the majority-class fraction") {
  // 70 healthy, 30 tumor; ten folds of ten.
  SynthConfig sc;
  sc.height = sc.width = 32;
  sc.radius_min = 2;
  sc.radius_max = 4;
  LabeledSet set;
  for (std::size_t i = 0; i < 100; ++i) {
    const int label = i % 10 < 3 ? 1 : 0;
    set.push_back(synth_image(sc, label, i), label, "s" + std::to_string(i));
  }
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.lr = 0.0;
  CrossValHooks<float> hooks;
  hooks.on_model_built = [](Model<float>& m, std::size_t) {
    m.output().weight.fill(0.0f);
    m.output().bias = Tensor<float>({2}, {1.0f, 0.0f});
  };
  const auto plan = split_kfold(set.subjects, 10, FoldMode::Random, 4);
  const auto res = cross_validate<float>(small_spec(), set, cfg, plan, hooks);
  CHECK(std::abs(res.summary.accuracy.mean - 0.7) <= 1e-12);
  for (const auto& r : res.folds) {
    CHECK(r.cm.tp == 0);
    CHECK(r.cm.fp == 0);
  }
}
