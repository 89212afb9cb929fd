#pragma once

// Skip-gram with negative sampling over hashtag sentences. Every ordered
// pair of distinct positions in a sentence is a (center, context) example;
// each example draws `negatives` noise words from unigram^0.75.
//
// Per-example loss, with v = input vector of the center word, u_c = output
// vector of the context word and u_n the output vectors of the noise words:
//
//   L = -log sigma(u_c . v) - sum_n log sigma(-u_n . v)

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <ranges>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hashscope/error.hpp"
#include "hashscope/rng.hpp"
#include "hashscope/unicode.hpp"
#include "hashscope/vocabulary.hpp"

namespace hashscope {

struct EmbeddingConfig {
  std::size_t dim = 300;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_lr = 0.025;
  std::uint64_t min_count = 5;
  std::uint64_t seed = 0;
  double subsample = 0.0;   // word2vec-style frequent-word threshold; 0 disables
  std::size_t threads = 1;  // 1 = deterministic

  void validate() const {
    if (dim < 1) throw Error(Errc::invalid_argument, "dim must be at least 1");
    if (negatives < 1) throw Error(Errc::invalid_argument, "negatives must be at least 1");
    if (!(initial_lr > 0.0)) throw Error(Errc::invalid_argument, "initial_lr must be positive");
    if (min_count < 1) throw Error(Errc::invalid_argument, "min_count must be at least 1");
    if (epochs < 1) throw Error(Errc::invalid_argument, "epochs must be at least 1");
    if (subsample < 0.0) throw Error(Errc::invalid_argument, "subsample must be non-negative");
  }
};

/// Vocabulary ordered by frequency (descending, ties lexicographic) with
/// the noise distribution P(w) ∝ count(w)^0.75.
struct SkipGramVocab {
  Vocabulary vocab;
  std::vector<std::uint64_t> counts;
  std::vector<double> noise;             // probabilities, sums to 1
  std::vector<double> noise_cumulative;  // running sum, last entry forced to 1
  std::uint64_t total_count = 0;

  WordId draw_noise(SplitMix64& rng) const {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(noise_cumulative.begin(), noise_cumulative.end(), u);
    const auto id = static_cast<std::size_t>(it - noise_cumulative.begin());
    return static_cast<WordId>(std::min(id, noise_cumulative.size() - 1));
  }
};

inline SkipGramVocab vocab_from_counts(const std::unordered_map<std::string, std::uint64_t>& frequency,
                                       std::uint64_t min_count) {
  if (min_count < 1) throw Error(Errc::invalid_argument, "min_count must be at least 1");
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [token, n] : frequency)
    if (n >= min_count) kept.emplace_back(token, n);
  if (kept.empty()) throw Error(Errc::empty_corpus, "no token reaches min_count " + std::to_string(min_count));
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });

  SkipGramVocab out;
  double norm = 0.0;
  for (const auto& [token, n] : kept) {
    out.vocab.add(token);
    out.counts.push_back(n);
    out.total_count += n;
    out.noise.push_back(std::pow(static_cast<double>(n), 0.75));
    norm += out.noise.back();
  }
  double running = 0.0;
  for (double& p : out.noise) {
    p /= norm;
    running += p;
    out.noise_cumulative.push_back(running);
  }
  out.noise_cumulative.back() = 1.0;
  return out;
}

/// Sentences are ranges of hashtag strings (one per tweet).
template <std::ranges::input_range Sentences>
SkipGramVocab build_vocab(Sentences&& sentences, std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> frequency;
  for (const auto& sentence : sentences)
    for (const auto& token : sentence) ++frequency[std::string(token)];
  return vocab_from_counts(frequency, min_count);
}

/// Tokens to ids, dropping out-of-vocabulary tokens and sentences left with
/// fewer than two tokens (they yield no training pairs).
template <std::ranges::input_range Sentences>
std::vector<std::vector<WordId>> encode_sentences(Sentences&& sentences, const Vocabulary& vocab) {
  std::vector<std::vector<WordId>> out;
  for (const auto& sentence : sentences) {
    std::vector<WordId> ids;
    for (const auto& token : sentence)
      if (const auto id = vocab.find(std::string(token))) ids.push_back(*id);
    if (ids.size() >= 2) out.push_back(std::move(ids));
  }
  return out;
}

/// Input (center) and output (context) vectors, row-major V x d.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(Vocabulary vocab, std::size_t dim)
      : vocab_(std::move(vocab)),
        dim_(dim),
        input_(vocab_.size() * dim, 0.0f),
        output_(vocab_.size() * dim, 0.0f) {}

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<float> input(WordId w) { return {input_.data() + w * dim_, dim_}; }
  std::span<const float> input(WordId w) const { return {input_.data() + w * dim_, dim_}; }
  std::span<float> output(WordId w) { return {output_.data() + w * dim_, dim_}; }
  std::span<const float> output(WordId w) const { return {output_.data() + w * dim_, dim_}; }

  std::vector<float>& input_data() noexcept { return input_; }
  const std::vector<float>& input_data() const noexcept { return input_; }
  std::vector<float>& output_data() noexcept { return output_; }
  const std::vector<float>& output_data() const noexcept { return output_; }

  bool all_finite() const {
    const auto finite = [](float x) { return std::isfinite(x); };
    return std::all_of(input_.begin(), input_.end(), finite) && std::all_of(output_.begin(), output_.end(), finite);
  }

 private:
  Vocabulary vocab_;
  std::size_t dim_ = 0;
  std::vector<float> input_;
  std::vector<float> output_;
};

template <typename Real>
Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

template <typename Real>
Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

/// d(-log sigma(label ? s : -s)) / ds = sigma(s) - label. Shared by the
/// analytic gradient and the SGD update.
template <typename Real>
Real sgns_score_gradient(Real score, bool positive) {
  return sigmoid(score) - (positive ? Real(1) : Real(0));
}

template <typename Real>
Real sgns_loss(std::span<const Real> center, std::span<const Real> context,
               const std::vector<std::span<const Real>>& negatives) {
  Real loss = -std::log(sigmoid(dot(context, center)));
  for (const auto& noise : negatives) loss -= std::log(sigmoid(-dot(noise, center)));
  return loss;
}

template <typename Real>
struct SgnsGradient {
  std::vector<Real> center;
  std::vector<Real> context;
  std::vector<std::vector<Real>> negatives;
};

/// Analytic gradient of sgns_loss with respect to every vector involved.
template <typename Real>
SgnsGradient<Real> sgns_gradient(std::span<const Real> center, std::span<const Real> context,
                                 const std::vector<std::span<const Real>>& negatives) {
  const std::size_t d = center.size();
  SgnsGradient<Real> g{std::vector<Real>(d, 0), std::vector<Real>(d, 0), {}};
  const Real gc = sgns_score_gradient(dot(context, center), true);
  for (std::size_t i = 0; i < d; ++i) {
    g.center[i] += gc * context[i];
    g.context[i] = gc * center[i];
  }
  for (const auto& noise : negatives) {
    const Real gn = sgns_score_gradient(dot(noise, center), false);
    std::vector<Real> row(d);
    for (std::size_t i = 0; i < d; ++i) {
      g.center[i] += gn * noise[i];
      row[i] = gn * center[i];
    }
    g.negatives.push_back(std::move(row));
  }
  return g;
}

namespace detail {

/// Relaxed atomic access for the shared-vector parallel mode; plain access
/// otherwise. On x86 both compile to ordinary loads and stores.
template <bool Shared>
struct VectorAccess {
  static float load(float& x) {
    if constexpr (Shared) return std::atomic_ref<float>(x).load(std::memory_order_relaxed);
    else return x;
  }
  static void store(float& x, float v) {
    if constexpr (Shared) std::atomic_ref<float>(x).store(v, std::memory_order_relaxed);
    else x = v;
  }
};

struct TrainingShard {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::uint64_t seed = 0;
};

template <bool Shared>
class SgnsWorker {
 public:
  SgnsWorker(EmbeddingMatrix& matrix, const SkipGramVocab& vocab, const std::vector<std::vector<WordId>>& sentences,
             const EmbeddingConfig& config, std::atomic<std::uint64_t>& processed, std::uint64_t total_examples)
      : matrix_(matrix),
        vocab_(vocab),
        sentences_(sentences),
        config_(config),
        processed_(processed),
        total_(static_cast<double>(total_examples)),
        hidden_error_(config.dim) {}

  void run(const TrainingShard& shard, std::size_t epoch) {
    SplitMix64 rng(derive_seed(shard.seed, epoch));
    std::vector<WordId> kept;
    const double total_words = static_cast<double>(vocab_.total_count);
    for (std::size_t s = shard.begin; s < shard.end; ++s) {
      const auto& sentence = sentences_[s];
      kept.clear();
      for (const WordId w : sentence) {
        if (config_.subsample > 0.0) {
          const double threshold = config_.subsample * total_words;
          const double f = static_cast<double>(vocab_.counts[w]);
          const double keep = (std::sqrt(f / threshold) + 1.0) * threshold / f;
          if (keep < rng.uniform01()) continue;
        }
        kept.push_back(w);
      }
      const std::uint64_t pairs = kept.size() < 2 ? 0 : kept.size() * (kept.size() - 1);
      const double progress = static_cast<double>(processed_.fetch_add(pairs, std::memory_order_relaxed)) / total_;
      const double lr = config_.initial_lr * std::max(1e-4, 1.0 - std::min(progress, 1.0) * (1.0 - 1e-4));
      for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = 0; j < kept.size(); ++j)
          if (i != j) train_pair(kept[i], kept[j], static_cast<float>(lr), rng);
    }
  }

 private:
  using Access = VectorAccess<Shared>;

  void train_pair(WordId center, WordId context, float lr, SplitMix64& rng) {
    const std::size_t d = config_.dim;
    auto v = matrix_.input(center);
    std::fill(hidden_error_.begin(), hidden_error_.end(), 0.0f);
    double loss = 0.0;
    for (std::size_t n = 0; n <= config_.negatives; ++n) {
      WordId target = context;
      bool positive = true;
      if (n > 0) {
        target = vocab_.draw_noise(rng);
        positive = false;
        if (target == context) continue;
      }
      auto u = matrix_.output(target);
      float score = 0.0f;
      for (std::size_t i = 0; i < d; ++i) score += Access::load(v[i]) * Access::load(u[i]);
      const float step = -lr * sgns_score_gradient(score, positive);
      loss -= std::log(sigmoid(static_cast<double>(positive ? score : -score)));
      for (std::size_t i = 0; i < d; ++i) {
        const float ui = Access::load(u[i]);
        hidden_error_[i] += step * ui;
        Access::store(u[i], ui + step * Access::load(v[i]));
      }
    }
    for (std::size_t i = 0; i < d; ++i) Access::store(v[i], Access::load(v[i]) + hidden_error_[i]);
    if (!std::isfinite(loss))
      throw Error(Errc::numeric_divergence, "non-finite SGNS loss; lower initial_lr");
  }

  EmbeddingMatrix& matrix_;
  const SkipGramVocab& vocab_;
  const std::vector<std::vector<WordId>>& sentences_;
  const EmbeddingConfig& config_;
  std::atomic<std::uint64_t>& processed_;
  double total_;
  std::vector<float> hidden_error_;
};

}  // namespace detail

/// Total (center, context) examples over all epochs, before subsampling.
inline std::uint64_t count_examples(const std::vector<std::vector<WordId>>& sentences, std::size_t epochs) {
  std::uint64_t pairs = 0;
  for (const auto& s : sentences) pairs += s.size() < 2 ? 0 : s.size() * (s.size() - 1);
  return pairs * epochs;
}

/// Trains on id-encoded sentences. With threads == 1 the result is
/// bit-identical for a fixed seed; with more threads, workers update shared
/// vectors without locks and the result depends on scheduling.
inline EmbeddingMatrix train_skipgram(const std::vector<std::vector<WordId>>& sentences, const SkipGramVocab& vocab,
                                      const EmbeddingConfig& config) {
  config.validate();
  if (vocab.vocab.empty()) throw Error(Errc::empty_corpus, "empty vocabulary");
  EmbeddingMatrix matrix(vocab.vocab, config.dim);

  SplitMix64 init(config.seed);
  const float scale = 1.0f / static_cast<float>(config.dim);
  for (float& x : matrix.input_data()) x = (static_cast<float>(init.uniform01()) - 0.5f) * scale;

  const std::uint64_t total = std::max<std::uint64_t>(count_examples(sentences, config.epochs), 1);
  std::atomic<std::uint64_t> processed{0};
  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, std::max<std::size_t>(sentences.size(), 1));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (threads == 1) {
      detail::SgnsWorker<false> worker(matrix, vocab, sentences, config, processed, total);
      worker.run({0, sentences.size(), derive_seed(config.seed, 1)}, epoch);
      continue;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            detail::SgnsWorker<true> worker(matrix, vocab, sentences, config, processed, total);
            const std::size_t begin = sentences.size() * t / threads;
            const std::size_t end = sentences.size() * (t + 1) / threads;
            worker.run({begin, end, derive_seed(config.seed, t + 1)}, epoch);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  if (!matrix.all_finite()) throw Error(Errc::numeric_divergence, "non-finite embedding entries after training");
  return matrix;
}

/// Builds the vocabulary and trains in one call. Sentences are ranges of
/// hashtag strings and are traversed twice, so pass a container.
template <std::ranges::forward_range Sentences>
EmbeddingMatrix train_skipgram(const Sentences& sentences, const EmbeddingConfig& config) {
  const auto vocab = build_vocab(sentences, config.min_count);
  return train_skipgram(encode_sentences(sentences, vocab.vocab), vocab, config);
}

template <typename Real>
Real norm(std::span<const Real> v) {
  return std::sqrt(dot(v, v));
}

inline double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw Error(Errc::invalid_argument, "cosine of vectors with different lengths");
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += static_cast<double>(u[i]) * v[i];
    uu += static_cast<double>(u[i]) * u[i];
    vv += static_cast<double>(v[i]) * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw Error(Errc::zero_vector, "cosine of a zero vector");
  return std::clamp(uv / std::sqrt(uu * vv), -1.0, 1.0);
}

/// Vocabulary entries within edit distance 2 of `query`, closest first.
inline std::vector<std::string> spelling_hints(const Vocabulary& vocab, const std::string& query,
                                               std::size_t limit = 5) {
  std::vector<std::pair<std::size_t, std::string>> near;
  for (const auto& token : vocab.tokens()) {
    const auto length_gap = token.size() > query.size() ? token.size() - query.size() : query.size() - token.size();
    if (length_gap > 8) continue;  // byte gap > 8 cannot be 2 code-point edits
    if (const auto d = unicode::edit_distance(token, query); d <= 2) near.emplace_back(d, token);
  }
  std::sort(near.begin(), near.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < near.size() && i < limit; ++i) out.push_back(near[i].second);
  return out;
}

/// k nearest tokens to `query` by cosine of input vectors, excluding the
/// query and `exclude`. Ties are broken lexicographically.
inline std::vector<std::pair<std::string, double>> most_similar(const EmbeddingMatrix& matrix, const std::string& query,
                                                                std::size_t k,
                                                                const std::unordered_set<std::string>& exclude = {}) {
  if (k == 0) throw Error(Errc::invalid_argument, "k must be at least 1");
  const auto& vocab = matrix.vocabulary();
  const auto qid = vocab.find(query);
  if (!qid) {
    auto hints = spelling_hints(vocab, query);
    std::string message = "'" + query + "' is not in the vocabulary";
    if (!hints.empty()) {
      message += "; did you mean";
      for (const auto& h : hints) message += " " + h;
    }
    throw Error(Errc::oov, message, std::move(hints));
  }
  const auto q = matrix.input(*qid);
  std::vector<std::pair<std::string, double>> scored;
  for (WordId w = 0; w < matrix.size(); ++w) {
    if (w == *qid) continue;
    const auto& token = vocab.token(w);
    if (exclude.contains(token)) continue;
    const auto v = matrix.input(w);
    if (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; })) continue;
    scored.emplace_back(token, cosine(q, v));
  }
  const auto keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
  scored.resize(keep);
  return scored;
}

// HSVEC1 binary format (all integers and floats little-endian):
//
//   "HSVEC1" | u32 V | u32 d | V x ( u32 byte length | UTF-8 token | d x f32 )
//
// Only input vectors are stored; a loaded matrix has zero output vectors.

inline constexpr std::string_view kVectorMagic = "HSVEC1";

namespace detail {
inline void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw Error(Errc::malformed, "HSVEC1: truncated file");
  return static_cast<std::uint32_t>(bytes[0]) | static_cast<std::uint32_t>(bytes[1]) << 8 |
         static_cast<std::uint32_t>(bytes[2]) << 16 | static_cast<std::uint32_t>(bytes[3]) << 24;
}
}  // namespace detail

inline void save_vectors_binary(std::ostream& out, const EmbeddingMatrix& matrix) {
  out.write(kVectorMagic.data(), static_cast<std::streamsize>(kVectorMagic.size()));
  detail::write_u32(out, static_cast<std::uint32_t>(matrix.size()));
  detail::write_u32(out, static_cast<std::uint32_t>(matrix.dim()));
  for (WordId w = 0; w < matrix.size(); ++w) {
    const auto& token = matrix.vocabulary().token(w);
    detail::write_u32(out, static_cast<std::uint32_t>(token.size()));
    out.write(token.data(), static_cast<std::streamsize>(token.size()));
    for (const float x : matrix.input(w)) detail::write_u32(out, std::bit_cast<std::uint32_t>(x));
  }
}

inline EmbeddingMatrix load_vectors_binary(std::istream& in) {
  char magic[6];
  if (!in.read(magic, 6) || std::string_view(magic, 6) != kVectorMagic) throw Error(Errc::malformed, "HSVEC1: bad magic");
  const auto size = detail::read_u32(in);
  const auto dim = detail::read_u32(in);
  if (dim == 0) throw Error(Errc::malformed, "HSVEC1: zero dimension");
  std::vector<std::string> tokens;
  std::vector<float> values;
  values.reserve(std::min<std::size_t>(static_cast<std::size_t>(size) * dim, std::size_t{1} << 24));
  for (std::uint32_t w = 0; w < size; ++w) {
    const auto length = detail::read_u32(in);
    std::string token(length, '\0');
    if (!in.read(token.data(), length)) throw Error(Errc::malformed, "HSVEC1: truncated token");
    tokens.push_back(std::move(token));
    for (std::uint32_t i = 0; i < dim; ++i) values.push_back(std::bit_cast<float>(detail::read_u32(in)));
  }
  Vocabulary vocab;
  for (const auto& t : tokens) vocab.add(t);
  if (vocab.size() != tokens.size()) throw Error(Errc::malformed, "HSVEC1: duplicate token");
  EmbeddingMatrix matrix(std::move(vocab), dim);
  matrix.input_data() = std::move(values);
  return matrix;
}

/// One line per token: the token then d decimal floats, space separated.
inline void save_vectors_text(std::ostream& out, const EmbeddingMatrix& matrix) {
  char buffer[32];
  for (WordId w = 0; w < matrix.size(); ++w) {
    out << matrix.vocabulary().token(w);
    for (const float x : matrix.input(w)) {
      const auto r = std::to_chars(buffer, buffer + sizeof buffer, x);
      out << ' ' << std::string_view(buffer, static_cast<std::size_t>(r.ptr - buffer));
    }
    out << '\n';
  }
}

inline EmbeddingMatrix load_vectors_text(std::istream& in) {
  Vocabulary vocab;
  std::vector<float> values;
  std::size_t dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<float> row;
    for (float x; fields >> x;) row.push_back(x);
    if (!fields.eof()) throw Error(Errc::malformed, "vector text: bad number on line for '" + token + "'");
    if (dim == 0) dim = row.size();
    if (row.empty() || row.size() != dim) throw Error(Errc::malformed, "vector text: inconsistent dimension");
    if (vocab.contains(token)) throw Error(Errc::malformed, "vector text: duplicate token '" + token + "'");
    vocab.add(token);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (vocab.empty()) throw Error(Errc::malformed, "vector text: no vectors");
  EmbeddingMatrix matrix(std::move(vocab), dim);
  matrix.input_data() = std::move(values);
  return matrix;
}

}  // namespace hashscope
