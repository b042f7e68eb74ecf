#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mlin/dataset.hpp"
#include "mlin/rng.hpp"

namespace mlin {

/// Desk-scale question-answering task over synthetic scenes. A scene holds
/// 3-8 objects, each a (shape, color, position) triple; questions come from
/// four templates whose ground truth a rule-based resolver computes
/// independently of the network. Scenes are constructed so the answer to
/// every question is uniform given the question, which caps what any
/// question-only predictor can score.

constexpr std::size_t kNumColors = 3;     // red, green, blue
constexpr std::size_t kNumShapes = 3;     // circle, square, triangle
constexpr std::size_t kNumQuadrants = 4;  // tl, tr, bl, br
constexpr std::size_t kMaxCount = 3;      // count answers 0..3

/// Answer vocabulary: 3 colors, 3 shapes, counts 0-3, yes, no.
constexpr std::size_t kAnswerClasses = 12;
constexpr std::size_t kAnswerYes = 10;
constexpr std::size_t kAnswerNo = 11;

/// Question token vocabulary: 4 template keywords, 3 colors, 3 shapes,
/// 4 quadrants, 2 filler words. Matches the feature width, so word features
/// are exact one-hot rows.
constexpr std::size_t kTokenVocab = 16;
constexpr std::size_t kSynthFeatureDim = 16;

const std::vector<std::string>& answer_vocab();
const std::vector<std::string>& token_vocab();

inline std::size_t answer_for_color(std::size_t color) { return color; }
inline std::size_t answer_for_shape(std::size_t shape) {
  return kNumColors + shape;
}
inline std::size_t answer_for_count(std::size_t count) {
  return kNumColors + kNumShapes + count;
}

enum class QuestionKind : std::uint8_t {
  count_color,        // how many objects of a color -> 0..3
  exists_shape_color, // is there a (shape, color) object -> yes/no
  color_of_shape,     // color of the unique object of a shape
  shape_at_quadrant,  // shape of the unique object in a quadrant
};

struct SceneObject {
  std::uint8_t shape = 0;
  std::uint8_t color = 0;
  double x = 0.0;  // normalized position in [0, 1), f32-representable
  double y = 0.0;
};

struct SynthScene {
  std::vector<SceneObject> objects;  // 3..8 of them
};

struct SynthQuestion {
  QuestionKind kind = QuestionKind::count_color;
  int color = -1;
  int shape = -1;
  int quadrant = -1;
  std::vector<int> tokens;  // 4..8 token ids, content first then fillers
};

struct SynthSample {
  SynthScene scene;
  SynthQuestion question;
  std::size_t answer = 0;
};

/// Quadrant index of a position: 0 tl, 1 tr, 2 bl, 3 br.
std::size_t quadrant_of(double x, double y);

/// Rule-based ground truth. Throws ConfigError for malformed questions
/// (bad arguments, a count beyond the answer vocabulary, or a non-unique
/// referent for the color-of / shape-at templates).
std::size_t resolve(const SynthScene& scene, const SynthQuestion& question);

struct GeneratorOptions {
  std::size_t min_objects = 3;
  std::size_t max_objects = 8;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 8;
  double noise_sigma = 0.05;
  std::vector<QuestionKind> templates = {
      QuestionKind::count_color, QuestionKind::exists_shape_color,
      QuestionKind::color_of_shape, QuestionKind::shape_at_quadrant};
};

struct SynthDataset {
  std::vector<SynthSample> raw;  // scene/question/answer triples
  Dataset features;              // materialized tensors, same order
  std::vector<std::size_t> class_counts;  // answer histogram, size 12
};

/// Region features: one row per object, [shape one-hot | color one-hot |
/// x y | zero padding] plus Gaussian noise on every component, rounded
/// through f32 so the feature-file round trip is exact.
Tensor scene_features(const SynthScene& scene, double noise_sigma, Rng& rng);

/// Word features: one exact one-hot row per token.
Tensor question_features(const std::vector<int>& tokens);

/// Deterministic under seed. The target answer is drawn uniformly first and
/// the scene constructed to match it, then cross-checked with resolve().
SynthDataset generate(std::uint64_t seed, std::size_t count,
                      const GeneratorOptions& options = {});

/// Train/test splits assigned by a hash of the (scene, question) bytes, so
/// the splits are disjoint by construction.
std::pair<SynthDataset, SynthDataset> generate_split(
    std::uint64_t seed, std::size_t train_count, std::size_t test_count,
    const GeneratorOptions& options = {});

/// Accuracy of the strongest question-only predictor: an answer-frequency
/// table keyed by (template, arguments) built on `train` and argmax-read on
/// `test`. The ceiling any model that ignores the scene can reach.
double blind_baseline_accuracy(const SynthDataset& train,
                               const SynthDataset& test);

}  // namespace mlin
