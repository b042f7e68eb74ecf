#include "mlin/synthetic.hpp"

#include <array>
#include <bit>
#include <map>
#include <stdexcept>
#include <tuple>

#include "mlin/error.hpp"

namespace mlin {

namespace {

// Token layout: 0..3 template keywords, 4..6 colors, 7..9 shapes,
// 10..13 quadrants, 14..15 fillers.
constexpr int kTokKindBase = 0;
constexpr int kTokColorBase = 4;
constexpr int kTokShapeBase = 7;
constexpr int kTokQuadrantBase = 10;
constexpr int kTokFillerBase = 14;

double f32_round(double v) {
  return static_cast<double>(static_cast<float>(v));
}

}  // namespace

const std::vector<std::string>& answer_vocab() {
  static const std::vector<std::string> vocab = {
      "red", "green", "blue", "circle", "square", "triangle",
      "0",   "1",     "2",    "3",      "yes",    "no"};
  return vocab;
}

const std::vector<std::string>& token_vocab() {
  static const std::vector<std::string> vocab = {
      "count",    "exists", "color-of", "shape-at", "red",  "green",
      "blue",     "circle", "square",   "triangle", "tl",   "tr",
      "bl",       "br",     "the",      "object"};
  return vocab;
}

std::size_t quadrant_of(double x, double y) {
  return (y >= 0.5 ? 2u : 0u) + (x >= 0.5 ? 1u : 0u);
}

std::size_t resolve(const SynthScene& scene, const SynthQuestion& question) {
  if (scene.objects.empty()) {
    throw ConfigError("resolve: scene has no objects");
  }
  switch (question.kind) {
    case QuestionKind::count_color: {
      if (question.color < 0 ||
          question.color >= static_cast<int>(kNumColors)) {
        throw ConfigError("resolve: count question needs a valid color");
      }
      std::size_t count = 0;
      for (const SceneObject& obj : scene.objects) {
        if (obj.color == question.color) ++count;
      }
      if (count > kMaxCount) {
        throw ConfigError("resolve: count " + std::to_string(count) +
                          " exceeds the answer vocabulary");
      }
      return answer_for_count(count);
    }
    case QuestionKind::exists_shape_color: {
      if (question.color < 0 || question.color >= static_cast<int>(kNumColors) ||
          question.shape < 0 || question.shape >= static_cast<int>(kNumShapes)) {
        throw ConfigError("resolve: exists question needs a shape and color");
      }
      for (const SceneObject& obj : scene.objects) {
        if (obj.shape == question.shape && obj.color == question.color) {
          return kAnswerYes;
        }
      }
      return kAnswerNo;
    }
    case QuestionKind::color_of_shape: {
      if (question.shape < 0 || question.shape >= static_cast<int>(kNumShapes)) {
        throw ConfigError("resolve: color-of question needs a shape");
      }
      int found = -1;
      for (const SceneObject& obj : scene.objects) {
        if (obj.shape != question.shape) continue;
        if (found >= 0) {
          throw ConfigError("resolve: color-of referent is not unique");
        }
        found = obj.color;
      }
      if (found < 0) {
        throw ConfigError("resolve: color-of referent is absent");
      }
      return answer_for_color(static_cast<std::size_t>(found));
    }
    case QuestionKind::shape_at_quadrant: {
      if (question.quadrant < 0 ||
          question.quadrant >= static_cast<int>(kNumQuadrants)) {
        throw ConfigError("resolve: shape-at question needs a quadrant");
      }
      int found = -1;
      for (const SceneObject& obj : scene.objects) {
        if (quadrant_of(obj.x, obj.y) !=
            static_cast<std::size_t>(question.quadrant)) {
          continue;
        }
        if (found >= 0) {
          throw ConfigError("resolve: shape-at referent is not unique");
        }
        found = obj.shape;
      }
      if (found < 0) {
        throw ConfigError("resolve: shape-at referent is absent");
      }
      return answer_for_shape(static_cast<std::size_t>(found));
    }
  }
  throw ConfigError("resolve: malformed question template");
}

Tensor scene_features(const SynthScene& scene, double noise_sigma, Rng& rng) {
  const std::size_t m = scene.objects.size();
  Tensor features = Tensor::zeros({m, kSynthFeatureDim});
  for (std::size_t i = 0; i < m; ++i) {
    const SceneObject& obj = scene.objects[i];
    double* row = features.mutable_values().data() + i * kSynthFeatureDim;
    row[obj.shape] = 1.0;
    row[kNumShapes + obj.color] = 1.0;
    row[kNumShapes + kNumColors] = obj.x;
    row[kNumShapes + kNumColors + 1] = obj.y;
    for (std::size_t j = 0; j < kSynthFeatureDim; ++j) {
      row[j] = f32_round(row[j] + noise_sigma * rng.normal());
    }
  }
  return features;
}

Tensor question_features(const std::vector<int>& tokens) {
  Tensor features = Tensor::zeros({tokens.size(), kSynthFeatureDim});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int id = tokens[i];
    if (id < 0 || id >= static_cast<int>(kTokenVocab)) {
      throw ConfigError("question token id " + std::to_string(id) +
                        " outside the vocabulary");
    }
    features.at(i, static_cast<std::size_t>(id)) = 1.0;
  }
  return features;
}

namespace {

// Positions are anchored at the four quadrant centers with a small uniform
// jitter. The centers are the vertices of a square, so every quadrant
// occupant is an extreme point of the scene under some linear functional
// with a 0.1 gap; placements also never come near the quadrant boundaries,
// which keeps quadrant membership decodable from the noisy features.
constexpr double kPositionJitter = 0.1;

void place_in_quadrant(SceneObject& obj, std::size_t quadrant, Rng& rng) {
  const double cx = (quadrant & 1u) ? 0.75 : 0.25;
  const double cy = (quadrant & 2u) ? 0.75 : 0.25;
  obj.x = f32_round(cx + rng.uniform(-kPositionJitter, kPositionJitter));
  obj.y = f32_round(cy + rng.uniform(-kPositionJitter, kPositionJitter));
}

SceneObject random_object(Rng& rng) {
  SceneObject obj;
  obj.shape = static_cast<std::uint8_t>(rng.below(kNumShapes));
  obj.color = static_cast<std::uint8_t>(rng.below(kNumColors));
  place_in_quadrant(obj, rng.below(kNumQuadrants), rng);
  return obj;
}

// The i-th value in 0..count-1 excluding `skip`.
std::uint8_t other_of(std::size_t skip, std::size_t i, std::size_t count) {
  std::size_t v = i < skip ? i : i + 1;
  (void)count;
  return static_cast<std::uint8_t>(v);
}

void place_outside_quadrant(SceneObject& obj, std::size_t quadrant, Rng& rng) {
  const std::size_t other = (quadrant + 1 + rng.below(kNumQuadrants - 1)) %
                            kNumQuadrants;
  place_in_quadrant(obj, other, rng);
}

SynthSample make_sample(Rng& rng, const GeneratorOptions& opts) {
  if (opts.templates.empty() || opts.min_objects < 1 ||
      opts.max_objects < opts.min_objects ||
      opts.max_tokens < opts.min_tokens) {
    throw ConfigError("generator options are inconsistent");
  }
  SynthSample sample;
  SynthQuestion& q = sample.question;
  q.kind = opts.templates[rng.below(opts.templates.size())];
  const std::size_t m =
      opts.min_objects + rng.below(opts.max_objects - opts.min_objects + 1);
  std::vector<SceneObject>& objects = sample.scene.objects;
  objects.reserve(m);

  // The answer is drawn uniformly first and the scene built to match it, so
  // the answer carries no information given the question alone.
  switch (q.kind) {
    case QuestionKind::count_color: {
      q.color = static_cast<int>(rng.below(kNumColors));
      // Counting scenes use 5 or 6 objects: the count/M bands
      // {0, 1/6..1/5, 2/6..2/5, 3/6..3/5} stay at least 0.1 apart, so no
      // two counts ever share a color fraction.
      std::vector<std::size_t> sizes;
      for (std::size_t v : {5u, 6u}) {
        if (v >= opts.min_objects && v <= opts.max_objects) sizes.push_back(v);
      }
      const std::size_t m_count =
          sizes.empty() ? m : sizes[rng.below(sizes.size())];
      const std::size_t target = rng.below(std::min(kMaxCount, m_count) + 1);
      for (std::size_t i = 0; i < target; ++i) {
        SceneObject obj = random_object(rng);
        obj.color = static_cast<std::uint8_t>(q.color);
        objects.push_back(obj);
      }
      for (std::size_t i = target; i < m_count; ++i) {
        SceneObject obj = random_object(rng);
        obj.color = other_of(static_cast<std::size_t>(q.color),
                             rng.below(kNumColors - 1), kNumColors);
        objects.push_back(obj);
      }
      sample.answer = answer_for_count(target);
      q.tokens = {kTokKindBase + 0, kTokColorBase + q.color};
      break;
    }
    case QuestionKind::exists_shape_color: {
      q.shape = static_cast<int>(rng.below(kNumShapes));
      q.color = static_cast<int>(rng.below(kNumColors));
      const bool present = rng.below(2) == 1;
      if (present) {
        SceneObject obj = random_object(rng);
        obj.shape = static_cast<std::uint8_t>(q.shape);
        obj.color = static_cast<std::uint8_t>(q.color);
        objects.push_back(obj);
      }
      while (objects.size() < m) {
        SceneObject obj = random_object(rng);
        if (!present && obj.shape == q.shape && obj.color == q.color) continue;
        objects.push_back(obj);
      }
      sample.answer = present ? kAnswerYes : kAnswerNo;
      q.tokens = {kTokKindBase + 1, kTokColorBase + q.color,
                  kTokShapeBase + q.shape};
      break;
    }
    case QuestionKind::color_of_shape: {
      q.shape = static_cast<int>(rng.below(kNumShapes));
      const std::size_t color = rng.below(kNumColors);
      SceneObject unique = random_object(rng);
      unique.shape = static_cast<std::uint8_t>(q.shape);
      unique.color = static_cast<std::uint8_t>(color);
      objects.push_back(unique);
      for (std::size_t i = 1; i < m; ++i) {
        SceneObject obj = random_object(rng);
        obj.shape = other_of(static_cast<std::size_t>(q.shape),
                             rng.below(kNumShapes - 1), kNumShapes);
        objects.push_back(obj);
      }
      sample.answer = answer_for_color(color);
      q.tokens = {kTokKindBase + 2, kTokShapeBase + q.shape};
      break;
    }
    case QuestionKind::shape_at_quadrant: {
      q.quadrant = static_cast<int>(rng.below(kNumQuadrants));
      const std::size_t shape = rng.below(kNumShapes);
      SceneObject occupant = random_object(rng);
      occupant.shape = static_cast<std::uint8_t>(shape);
      place_in_quadrant(occupant, static_cast<std::size_t>(q.quadrant), rng);
      objects.push_back(occupant);
      for (std::size_t i = 1; i < m; ++i) {
        SceneObject obj = random_object(rng);
        place_outside_quadrant(obj, static_cast<std::size_t>(q.quadrant), rng);
        objects.push_back(obj);
      }
      sample.answer = answer_for_shape(shape);
      q.tokens = {kTokKindBase + 3, kTokQuadrantBase + q.quadrant};
      break;
    }
  }

  for (std::size_t i = objects.size(); i > 1; --i) {
    std::swap(objects[i - 1], objects[rng.below(i)]);
  }

  const std::size_t token_target =
      std::max(opts.min_tokens, q.tokens.size() + 1) +
      rng.below(opts.max_tokens - opts.min_tokens + 1);
  while (q.tokens.size() < token_target) {
    q.tokens.push_back(kTokFillerBase + static_cast<int>(rng.below(2)));
  }

  if (resolve(sample.scene, q) != sample.answer) {
    throw std::logic_error("synthetic generator produced an inconsistent sample");
  }
  return sample;
}

std::uint64_t sample_hash(const SynthSample& sample) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ULL;
    }
  };
  mix(sample.scene.objects.size(), 1);
  for (const SceneObject& obj : sample.scene.objects) {
    mix(obj.shape, 1);
    mix(obj.color, 1);
    mix(std::bit_cast<std::uint32_t>(static_cast<float>(obj.x)), 4);
    mix(std::bit_cast<std::uint32_t>(static_cast<float>(obj.y)), 4);
  }
  mix(static_cast<std::uint64_t>(sample.question.kind), 1);
  mix(sample.question.tokens.size(), 1);
  for (int tok : sample.question.tokens) {
    mix(static_cast<std::uint64_t>(tok), 1);
  }
  return h;
}

void append_sample(SynthDataset& data, SynthSample sample,
                   const GeneratorOptions& opts, Rng& rng) {
  Sample features;
  features.regions = scene_features(sample.scene, opts.noise_sigma, rng);
  features.words = question_features(sample.question.tokens);
  features.label = sample.answer;
  data.class_counts[sample.answer] += 1;
  data.raw.push_back(std::move(sample));
  data.features.push_back(std::move(features));
}

}  // namespace

SynthDataset generate(std::uint64_t seed, std::size_t count,
                      const GeneratorOptions& options) {
  if (count == 0) throw ConfigError("generate: count must be >= 1");
  SynthDataset data;
  data.class_counts.assign(kAnswerClasses, 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    append_sample(data, make_sample(rng, options), options, rng);
  }
  return data;
}

std::pair<SynthDataset, SynthDataset> generate_split(
    std::uint64_t seed, std::size_t train_count, std::size_t test_count,
    const GeneratorOptions& options) {
  if (train_count == 0 || test_count == 0) {
    throw ConfigError("generate_split: both split sizes must be >= 1");
  }
  SynthDataset train, test;
  train.class_counts.assign(kAnswerClasses, 0);
  test.class_counts.assign(kAnswerClasses, 0);
  Rng rng(seed);
  while (train.raw.size() < train_count || test.raw.size() < test_count) {
    SynthSample sample = make_sample(rng, options);
    const bool to_train = sample_hash(sample) % 6 < 5;
    if (to_train && train.raw.size() < train_count) {
      append_sample(train, std::move(sample), options, rng);
    } else if (!to_train && test.raw.size() < test_count) {
      append_sample(test, std::move(sample), options, rng);
    }
  }
  return {std::move(train), std::move(test)};
}

double blind_baseline_accuracy(const SynthDataset& train,
                               const SynthDataset& test) {
  if (train.raw.empty() || test.raw.empty()) {
    throw std::invalid_argument("blind baseline needs nonempty splits");
  }
  using Key = std::tuple<int, int, int, int>;
  auto key_of = [](const SynthQuestion& q) {
    return Key{static_cast<int>(q.kind), q.color, q.shape, q.quadrant};
  };
  std::map<Key, std::array<std::size_t, kAnswerClasses>> table;
  std::array<std::size_t, kAnswerClasses> global{};
  for (const SynthSample& s : train.raw) {
    table[key_of(s.question)][s.answer] += 1;
    global[s.answer] += 1;
  }
  auto best_of = [](const std::array<std::size_t, kAnswerClasses>& counts) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < counts.size(); ++a) {
      if (counts[a] > counts[best]) best = a;
    }
    return best;
  };
  std::size_t correct = 0;
  for (const SynthSample& s : test.raw) {
    auto it = table.find(key_of(s.question));
    const std::size_t guess =
        it != table.end() ? best_of(it->second) : best_of(global);
    if (guess == s.answer) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.raw.size());
}

}  // namespace mlin
