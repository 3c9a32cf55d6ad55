#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "axg/checkpoint.h"
#include "axg/classifier.h"
#include "axg/codec.h"
#include "axg/errors.h"
#include "axg/hash.h"
#include "test_support.h"

using namespace axg;

namespace {

LatentGrid random_grid(std::size_t t, std::size_t l, Rng& rng, double offset = 0.0) {
  LatentGrid z(t, l);
  for (auto& v : z.values) v = static_cast<float>(offset + rng.uniform(-1.0, 1.0));
  return z;
}

// Three classes separated by a per-class mean shift on one channel.
LabeledLatentDataset toy_dataset(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  LabeledLatentDataset d;
  d.class_count = 3;
  d.class_names = {"a", "b", "c"};
  for (std::size_t i = 0; i < per_class * 3; ++i) {
    const int label = static_cast<int>(i % 3);
    LatentGrid z = random_grid(6, 4, rng);
    for (std::size_t t = 0; t < z.frames; ++t) z.at(t, static_cast<std::size_t>(label)) += 2.0f;
    d.latents.push_back(std::move(z));
    d.labels.push_back(label);
  }
  return d;
}

TEST(Classifier, SoftmaxSumsToOne) {
  Rng rng(1);
  const ClassifierModel m = init_classifier(6, 4, 8, {"a", "b", "c"}, 2);
  for (int i = 0; i < 20; ++i) {
    const auto p = classify(random_grid(6, 4, rng, 0.0), m);
    ASSERT_EQ(p.size(), 3u);
    double s = 0.0;
    for (float v : p) {
      EXPECT_GT(v, 0.0f);
      EXPECT_LT(v, 1.0f);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-5);
  }
}

TEST(Classifier, ZeroHeadIsUniform) {
  Rng rng(3);
  const ClassifierModel m = zero_classifier(6, 4, 8, {"a", "b", "c", "d"});
  for (float v : classify(random_grid(6, 4, rng, 5.0), m)) EXPECT_NEAR(v, 0.25f, 1e-7);
}

TEST(Classifier, PredictionStable) {
  Rng rng(4);
  const ClassifierModel m = init_classifier(6, 4, 8, {"a", "b", "c"}, 2);
  const LatentGrid z = random_grid(6, 4, rng);
  const int p = predict(z, m);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(predict(z, m), p);
  const auto l = logits(z, m);
  EXPECT_EQ(p, std::max_element(l.begin(), l.end()) - l.begin());
}

TEST(Classifier, ShapeMismatch) {
  Rng rng(5);
  const ClassifierModel m = init_classifier(6, 4, 8, {"a", "b"}, 2);
  EXPECT_THROW(classify(random_grid(5, 4, rng), m), DimensionError);
  EXPECT_THROW(classify(random_grid(6, 3, rng), m), DimensionError);
}

TEST(Classifier, DatasetValidation) {
  LabeledLatentDataset d = toy_dataset(2, 1);
  d.class_count = 1;
  d.class_names = {};
  EXPECT_THROW(train_classifier(d, ClassifierConfig{}, 1), ContractError);
  d = toy_dataset(2, 1);
  d.labels[0] = 7;
  EXPECT_THROW(d.validate(), IndexError);
  d = toy_dataset(2, 1);
  d.latents[1] = LatentGrid(5, 4);
  EXPECT_THROW(d.validate(), DimensionError);
  EXPECT_THROW(LabeledLatentDataset{}.validate(), ContractError);
}

TEST(Classifier, TrainingLearnsAndIsDeterministic) {
  ClassifierConfig cfg;
  cfg.epochs = 15;
  const auto train = toy_dataset(20, 7);
  const ClassifierModel a = train_classifier(train, cfg, 11);
  EXPECT_GT(evaluate_accuracy(train, a), 1.0 / 3.0);
  EXPECT_GE(evaluate_accuracy(toy_dataset(10, 8), a), 0.9);
  const ClassifierModel b = train_classifier(train, cfg, 11);
  EXPECT_EQ(serialize_checkpoint(a.to_checkpoint()), serialize_checkpoint(b.to_checkpoint()));
  const auto& trace = a.metadata.at("loss_trace");
  EXPECT_LT(trace.back().get<double>(), trace.front().get<double>());
}

TEST(Classifier, EncoderUntouchedByTraining) {
  CodecConfig cc;
  const CodecModel codec = init_codec(cc, 1);
  const std::string before = sha256_hex(serialize_checkpoint(codec.to_checkpoint()));
  Rng rng(2);
  LabeledLatentDataset d;
  d.class_count = 2;
  for (int i = 0; i < 8; ++i) {
    std::vector<float> s(1024);
    for (auto& v : s) v = static_cast<float>(rng.uniform(-0.5, 0.5) * (i % 2 ? 1.0 : 0.2));
    d.latents.push_back(encode(AudioClip(s, 16000), codec));
    d.labels.push_back(i % 2);
  }
  ClassifierConfig cfg;
  cfg.epochs = 3;
  train_classifier(d, cfg, 1);
  EXPECT_EQ(sha256_hex(serialize_checkpoint(codec.to_checkpoint())), before);
}

// A model built to always answer class 0 scores the label fraction of class 0.
TEST(Classifier, EvaluateAccuracyExamples) {
  ClassifierModel m = zero_classifier(2, 2, 2, {"x", "y"});
  m.b2.data = {1.0f, 0.0f};
  LabeledLatentDataset all0;
  all0.class_count = 2;
  all0.latents.assign(4, LatentGrid(2, 2));
  all0.labels = {0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(evaluate_accuracy(all0, m), 1.0);
  all0.labels = {1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(evaluate_accuracy(all0, m), 0.0);
  all0.labels = {0, 1, 1, 1};
  EXPECT_DOUBLE_EQ(evaluate_accuracy(all0, m), 0.25);
  EXPECT_THROW(evaluate_accuracy(LabeledLatentDataset{}, m), ContractError);
}

TEST(Classifier, CheckpointRoundTrip) {
  const ClassifierModel m = init_classifier(6, 4, 8, {"a", "b", "c"}, 2);
  const ClassifierModel back = ClassifierModel::from_checkpoint(parse_checkpoint(serialize_checkpoint(m.to_checkpoint())));
  EXPECT_EQ(back.class_names, m.class_names);
  EXPECT_EQ(back.w1.data, m.w1.data);
  EXPECT_EQ(back.b2.data, m.b2.data);
}

}  // namespace
