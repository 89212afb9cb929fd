#pragma once

// Hashtag-only LDA: one document per tweet with at least five hashtags,
// fit by collapsed Gibbs sampling, scored with document-level NPMI
// coherence, and K chosen where the coherence curve levels off.
//
// Collapsed conditional for token i of document d with word w:
//
//   p(z_i = k | z_-i) ∝ (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)
//
// where every count excludes token i itself.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <ranges>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hashscope/corpus.hpp"
#include "hashscope/csv.hpp"
#include "hashscope/error.hpp"
#include "hashscope/rng.hpp"
#include "hashscope/vocabulary.hpp"

namespace hashscope {

inline constexpr std::size_t kMinDocumentTags = 5;

struct HashtagDocument {
  std::vector<WordId> tokens;
  std::size_t source = 0;  // index of the tweet in the input stream
};

struct DocumentSet {
  std::vector<HashtagDocument> documents;
  Vocabulary vocabulary;
};

/// One document per tweet with at least `min_tags` hashtags. Tokens whose
/// corpus frequency (over all tweets) is below `frequency_floor` are dropped
/// before the length test. Vocabulary ids follow first appearance among the
/// surviving documents.
template <std::ranges::input_range Records>
DocumentSet build_documents(Records&& records, std::size_t min_tags = kMinDocumentTags,
                            std::uint64_t frequency_floor = 1) {
  if (min_tags == 0) throw Error(Errc::invalid_argument, "min_tags must be at least 1");
  std::unordered_map<std::string, std::uint64_t> frequency;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> candidates;
  std::size_t index = 0;
  for (const auto& record : records) {
    if (frequency_floor > 1)
      for (const auto& tag : record.hashtags) ++frequency[tag];
    if (record.hashtags.size() >= min_tags) candidates.emplace_back(index, record.hashtags);
    ++index;
  }

  DocumentSet set;
  for (auto& [source, tags] : candidates) {
    if (frequency_floor > 1) {
      std::erase_if(tags, [&](const std::string& tag) { return frequency[tag] < frequency_floor; });
      if (tags.size() < min_tags) continue;
    }
    HashtagDocument doc{{}, source};
    doc.tokens.reserve(tags.size());
    for (const auto& tag : tags) doc.tokens.push_back(set.vocabulary.add(tag));
    set.documents.push_back(std::move(doc));
  }
  if (set.documents.empty())
    throw Error(Errc::empty_corpus, "no tweet has " + std::to_string(min_tags) + " or more hashtags");
  return set;
}

enum class LdaEstimator {
  final_state,     // phi from the counts after the last sweep
  posterior_mean,  // phi averaged over the sweeps after burn-in
};

struct LdaConfig {
  std::size_t topics = 20;
  std::optional<double> alpha;  // unset: 50 / topics
  double beta = 0.01;
  std::size_t sweeps = 1000;
  std::uint64_t seed = 0;
  LdaEstimator estimator = LdaEstimator::final_state;
  std::size_t burn_in = 0;

  double resolved_alpha() const { return alpha.value_or(50.0 / static_cast<double>(topics)); }
};

/// Count state of a collapsed Gibbs chain. Matrices are row-major:
/// topic_word_counts is K x V, doc_topic_counts is D x K.
struct LdaModel {
  std::size_t topics = 0;
  std::size_t vocab_size = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t sweeps = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> topic_word_counts;
  std::vector<std::uint32_t> doc_topic_counts;
  std::vector<std::uint64_t> topic_totals;
  std::vector<std::vector<std::uint32_t>> assignments;
  std::vector<double> phi_mean;  // K x V, only for the posterior-mean estimator

  std::size_t documents() const noexcept { return assignments.size(); }

  std::uint32_t topic_word(std::size_t k, WordId w) const { return topic_word_counts[k * vocab_size + w]; }
  std::uint32_t doc_topic(std::size_t d, std::size_t k) const { return doc_topic_counts[d * topics + k]; }

  double phi(std::size_t k, WordId w) const {
    if (!phi_mean.empty()) return phi_mean[k * vocab_size + w];
    return (static_cast<double>(topic_word(k, w)) + beta) /
           (static_cast<double>(topic_totals[k]) + static_cast<double>(vocab_size) * beta);
  }

  double theta(std::size_t d, std::size_t k) const {
    return (static_cast<double>(doc_topic(d, k)) + alpha) /
           (static_cast<double>(assignments[d].size()) + static_cast<double>(topics) * alpha);
  }

  /// Throws Errc::invariant when any count identity is broken. Document-side
  /// checks are skipped for a model loaded from disk (no documents).
  void check_invariants() const {
    const auto fail = [](const std::string& what) { throw Error(Errc::invariant, what); };
    if (topic_word_counts.size() != topics * vocab_size) fail("topic_word_counts has the wrong shape");
    std::uint64_t grand_total = 0;
    for (std::size_t k = 0; k < topics; ++k) {
      std::uint64_t row = 0;
      for (std::size_t w = 0; w < vocab_size; ++w) row += topic_word_counts[k * vocab_size + w];
      if (row != topic_totals[k]) fail("topic_totals[" + std::to_string(k) + "] != row sum");
      grand_total += row;
    }
    if (assignments.empty()) return;
    if (doc_topic_counts.size() != documents() * topics) fail("doc_topic_counts has the wrong shape");
    std::uint64_t tokens = 0;
    for (std::size_t d = 0; d < documents(); ++d) {
      std::uint64_t row = 0;
      for (std::size_t k = 0; k < topics; ++k) row += doc_topic(d, k);
      if (row != assignments[d].size()) fail("doc_topic row " + std::to_string(d) + " != document length");
      tokens += assignments[d].size();
    }
    if (grand_total != tokens) fail("sum of topic_totals != token count");
  }
};

/// Sequential collapsed Gibbs chain over borrowed documents (they must
/// outlive the sampler).
class GibbsSampler {
 public:
  GibbsSampler(std::span<const HashtagDocument> documents, std::size_t vocab_size, const LdaConfig& config)
      : documents_(documents), config_(config), rng_(config.seed) {
    if (config.topics < 1) throw Error(Errc::invalid_argument, "K must be at least 1");
    model_.alpha = config.resolved_alpha();
    model_.beta = config.beta;
    if (!(model_.alpha > 0.0) || !(model_.beta > 0.0))
      throw Error(Errc::invalid_argument, "alpha and beta must be positive");
    if (vocab_size == 0) throw Error(Errc::empty_corpus, "empty vocabulary");

    std::size_t tokens = 0;
    for (const auto& doc : documents_) {
      tokens += doc.tokens.size();
      for (const WordId w : doc.tokens)
        if (w >= vocab_size) throw Error(Errc::invalid_argument, "word id beyond vocabulary");
    }
    if (config.topics > tokens)
      throw Error(Errc::degenerate, "K = " + std::to_string(config.topics) + " exceeds the token count " +
                                        std::to_string(tokens));

    const std::size_t K = config.topics;
    model_.topics = K;
    model_.vocab_size = vocab_size;
    model_.seed = config.seed;
    model_.topic_word_counts.assign(K * vocab_size, 0);
    model_.doc_topic_counts.assign(documents_.size() * K, 0);
    model_.topic_totals.assign(K, 0);
    model_.assignments.resize(documents_.size());
    weights_.resize(K);

    for (std::size_t d = 0; d < documents_.size(); ++d) {
      auto& z = model_.assignments[d];
      z.resize(documents_[d].tokens.size());
      for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = static_cast<std::uint32_t>(rng_.uniform_index(K));
        increment(d, documents_[d].tokens[i], z[i]);
      }
    }
  }

  void sweep() {
    const std::size_t K = model_.topics;
    const double alpha = model_.alpha;
    const double beta = model_.beta;
    const double vbeta = static_cast<double>(model_.vocab_size) * beta;
    for (std::size_t d = 0; d < documents_.size(); ++d) {
      const auto& tokens = documents_[d].tokens;
      auto& z = model_.assignments[d];
      const std::uint32_t* doc_row = &model_.doc_topic_counts[d * K];
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const WordId w = tokens[i];
        decrement(d, w, z[i]);
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          total += (doc_row[k] + alpha) * (model_.topic_word_counts[k * model_.vocab_size + w] + beta) /
                   (static_cast<double>(model_.topic_totals[k]) + vbeta);
          weights_[k] = total;
        }
        if (!std::isfinite(total) || total <= 0.0)
          throw Error(Errc::numeric, "non-finite sampling weight in document " + std::to_string(d));
        const double u = rng_.uniform01() * total;
        std::size_t k = 0;
        while (k + 1 < K && weights_[k] <= u) ++k;
        z[i] = static_cast<std::uint32_t>(k);
        increment(d, w, z[i]);
      }
    }
    ++model_.sweeps;
    if (config_.estimator == LdaEstimator::posterior_mean && model_.sweeps > config_.burn_in) accumulate_phi();
  }

  const LdaModel& model() const noexcept { return model_; }

  LdaModel release() && {
    if (phi_samples_ > 0) {
      model_.phi_mean = std::move(phi_sum_);
      for (double& p : model_.phi_mean) p /= static_cast<double>(phi_samples_);
    }
    return std::move(model_);
  }

 private:
  void increment(std::size_t d, WordId w, std::uint32_t k) {
    ++model_.topic_word_counts[k * model_.vocab_size + w];
    ++model_.doc_topic_counts[d * model_.topics + k];
    ++model_.topic_totals[k];
  }

  void decrement(std::size_t d, WordId w, std::uint32_t k) {
    --model_.topic_word_counts[k * model_.vocab_size + w];
    --model_.doc_topic_counts[d * model_.topics + k];
    --model_.topic_totals[k];
  }

  void accumulate_phi() {
    phi_sum_.resize(model_.topics * model_.vocab_size, 0.0);
    for (std::size_t k = 0; k < model_.topics; ++k)
      for (WordId w = 0; w < model_.vocab_size; ++w) phi_sum_[k * model_.vocab_size + w] += model_.phi(k, w);
    ++phi_samples_;
  }

  std::span<const HashtagDocument> documents_;
  LdaConfig config_;
  SplitMix64 rng_;
  LdaModel model_;
  std::vector<double> weights_;
  std::vector<double> phi_sum_;
  std::size_t phi_samples_ = 0;
};

/// Called after every sweep with the 1-based sweep number.
using SweepObserver = std::function<void(const LdaModel&, std::size_t)>;

inline LdaModel train_lda(std::span<const HashtagDocument> documents, std::size_t vocab_size, const LdaConfig& config,
                          const SweepObserver& observer = {}) {
  if (config.sweeps < 1) throw Error(Errc::invalid_argument, "sweeps must be at least 1");
  GibbsSampler sampler(documents, vocab_size, config);
  for (std::size_t s = 1; s <= config.sweeps; ++s) {
    sampler.sweep();
    if (observer) observer(sampler.model(), s);
  }
  return std::move(sampler).release();
}

/// Word ids of topic t ordered by phi descending, ties by token.
inline std::vector<WordId> topic_ranking(const LdaModel& model, const Vocabulary& vocab, std::size_t t, std::size_t m) {
  if (t >= model.topics) throw Error(Errc::invalid_argument, "topic id out of range");
  std::vector<WordId> ids(model.vocab_size);
  for (WordId w = 0; w < ids.size(); ++w) ids[w] = w;
  const auto keep = std::min(m, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end(), [&](WordId a, WordId b) {
    const double pa = model.phi(t, a);
    const double pb = model.phi(t, b);
    return pa != pb ? pa > pb : vocab.token(a) < vocab.token(b);
  });
  ids.resize(keep);
  return ids;
}

inline std::vector<std::pair<std::string, double>> topic_top_words(const LdaModel& model, const Vocabulary& vocab,
                                                                   std::size_t t, std::size_t m) {
  if (m == 0) throw Error(Errc::invalid_argument, "m must be at least 1");
  std::vector<std::pair<std::string, double>> out;
  for (const WordId w : topic_ranking(model, vocab, t, m)) out.emplace_back(vocab.token(w), model.phi(t, w));
  return out;
}

inline constexpr double kNpmiEpsilon = 1e-12;

/// Normalized PMI from document counts. A pair that never co-occurs scores
/// -1; a pair present in every document scores 1.
inline double npmi(std::uint64_t joint, std::uint64_t count_a, std::uint64_t count_b, std::uint64_t documents) {
  if (joint == 0 || documents == 0) return -1.0;
  if (joint == documents) return 1.0;
  const double n = static_cast<double>(documents);
  const double p_ab = static_cast<double>(joint) / n + kNpmiEpsilon;
  const double p_a = static_cast<double>(count_a) / n;
  const double p_b = static_cast<double>(count_b) / n;
  return std::log(p_ab / (p_a * p_b)) / -std::log(p_ab);
}

/// Mean over topics of the mean pairwise NPMI among each topic's top-m
/// words. Co-occurrence is boolean per document.
inline double coherence(const LdaModel& model, std::span<const HashtagDocument> documents, const Vocabulary& vocab,
                        std::size_t m = 10) {
  if (m < 2) throw Error(Errc::invalid_argument, "coherence needs m >= 2");
  if (model.vocab_size < 2) throw Error(Errc::insufficient_data, "coherence needs at least two words");

  std::vector<std::vector<WordId>> top(model.topics);
  std::unordered_map<WordId, std::vector<std::uint32_t>> postings;
  for (std::size_t t = 0; t < model.topics; ++t) {
    top[t] = topic_ranking(model, vocab, t, m);
    for (const WordId w : top[t]) postings.try_emplace(w);
  }
  for (std::size_t d = 0; d < documents.size(); ++d) {
    auto tokens = documents[d].tokens;
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (const WordId w : tokens)
      if (auto it = postings.find(w); it != postings.end()) it->second.push_back(static_cast<std::uint32_t>(d));
  }

  const auto joint_count = [](const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::uint64_t n = 0;
    for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
      if (*i < *j) {
        ++i;
      } else if (*j < *i) {
        ++j;
      } else {
        ++n;
        ++i;
        ++j;
      }
    }
    return n;
  };

  double sum = 0.0;
  for (const auto& words : top) {
    double topic_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        const auto& a = postings[words[i]];
        const auto& b = postings[words[j]];
        topic_sum += npmi(joint_count(a, b), a.size(), b.size(), documents.size());
        ++pairs;
      }
    }
    sum += topic_sum / static_cast<double>(pairs);
  }
  return sum / static_cast<double>(model.topics);
}

struct CoherencePoint {
  std::size_t k = 0;
  double coherence = 0.0;
};

using CoherenceCurve = std::vector<CoherencePoint>;

struct KSelection {
  std::size_t k = 0;
  bool converged = true;  // false: no plateau found, k is the argmax
};

/// Smallest K whose next `lookahead` grid points each change coherence by
/// less than `rel_eps` relative to c(K). Falls back to the argmax (first on
/// ties) with converged = false.
inline KSelection select_k(const CoherenceCurve& curve, double rel_eps = 0.02, std::size_t lookahead = 2) {
  if (curve.size() < lookahead + 1)
    throw Error(Errc::insufficient_data, "select_k needs at least lookahead + 1 curve points");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].k <= curve[i - 1].k) throw Error(Errc::invalid_argument, "coherence curve K values must increase");

  for (std::size_t i = 0; i + lookahead < curve.size(); ++i) {
    const double base = curve[i].coherence;
    const double scale = std::max(std::abs(base), 1e-9);
    bool flat = true;
    for (std::size_t j = i + 1; j <= i + lookahead; ++j) {
      if (std::abs(curve[j].coherence - base) / scale >= rel_eps) {
        flat = false;
        break;
      }
    }
    if (flat) return {curve[i].k, true};
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].coherence > curve[best].coherence) best = i;
  return {curve[best].k, false};
}

struct SweepConfig {
  LdaConfig lda;  // `topics` is overwritten per grid point; alpha unset -> 50/K
  std::size_t coherence_top_m = 10;
  std::size_t threads = 1;
  SweepObserver observer;  // shared by every chain, may run concurrently
};

struct SweepResult {
  std::size_t k = 0;
  double coherence = 0.0;
  LdaModel model;
};

/// Per-K chain seed: derive_seed(config.lda.seed, K).
inline std::vector<SweepResult> sweep_k(std::span<const HashtagDocument> documents, const Vocabulary& vocab,
                                        std::span<const std::size_t> k_grid, const SweepConfig& config) {
  if (k_grid.empty()) throw Error(Errc::invalid_argument, "empty K grid");
  for (std::size_t i = 1; i < k_grid.size(); ++i)
    if (k_grid[i] <= k_grid[i - 1]) throw Error(Errc::invalid_argument, "K grid must be strictly ascending");

  std::vector<std::optional<SweepResult>> slots(k_grid.size());
  std::vector<std::exception_ptr> errors(k_grid.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < k_grid.size(); i = next++) {
      try {
        LdaConfig lda = config.lda;
        lda.topics = k_grid[i];
        lda.seed = derive_seed(config.lda.seed, k_grid[i]);
        auto model = train_lda(documents, vocab.size(), lda, config.observer);
        const double c = coherence(model, documents, vocab, config.coherence_top_m);
        slots[i] = SweepResult{k_grid[i], c, std::move(model)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, k_grid.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<SweepResult> out;
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

inline CoherenceCurve to_curve(const std::vector<SweepResult>& results) {
  CoherenceCurve curve;
  for (const auto& r : results) curve.push_back({r.k, r.coherence});
  return curve;
}

inline std::vector<std::size_t> k_grid(std::size_t kmin, std::size_t kmax, std::size_t kstep) {
  if (kmin < 1 || kstep < 1 || kmax < kmin) throw Error(Errc::invalid_argument, "invalid K grid bounds");
  std::vector<std::size_t> grid;
  for (std::size_t k = kmin; k <= kmax; k += kstep) grid.push_back(k);
  return grid;
}

// HSLDA1 text format:
//
//   HSLDA1
//   topics <K>
//   vocab_size <V>
//   alpha <a>
//   beta <b>
//   sweeps <n>
//   seed <s>
//   triples <T>
//   <topic> <word-id> <count>      (T lines, nonzero counts only)
//   vocabulary <V>
//   <token>                        (V lines, id order)

inline constexpr std::string_view kLdaMagic = "HSLDA1";

inline void save_lda(std::ostream& out, const LdaModel& model, const Vocabulary& vocab) {
  if (vocab.size() != model.vocab_size) throw Error(Errc::invalid_argument, "vocabulary does not match the model");
  std::size_t triples = 0;
  for (const auto c : model.topic_word_counts) triples += c != 0;
  out << kLdaMagic << '\n'
      << "topics " << model.topics << '\n'
      << "vocab_size " << model.vocab_size << '\n'
      << "alpha " << csv::number(model.alpha) << '\n'
      << "beta " << csv::number(model.beta) << '\n'
      << "sweeps " << model.sweeps << '\n'
      << "seed " << model.seed << '\n'
      << "triples " << triples << '\n';
  for (std::size_t k = 0; k < model.topics; ++k)
    for (WordId w = 0; w < model.vocab_size; ++w)
      if (const auto c = model.topic_word(k, w); c != 0) out << k << ' ' << w << ' ' << c << '\n';
  out << "vocabulary " << vocab.size() << '\n';
  for (const auto& token : vocab.tokens()) out << token << '\n';
}

inline std::pair<LdaModel, Vocabulary> load_lda(std::istream& in) {
  const auto fail = [](const std::string& what) -> void { throw Error(Errc::malformed, "HSLDA1: " + what); };
  std::string line;
  if (!std::getline(in, line) || line != kLdaMagic) fail("bad magic");
  const auto header = [&](const std::string& key) {
    std::string name, value;
    if (!std::getline(in, line)) fail("truncated header");
    std::istringstream fields(line);
    fields >> name >> value;
    if (name != key || value.empty()) fail("expected '" + key + "'");
    return value;
  };
  const auto count = [&](const std::string& key) -> std::uint64_t {
    const auto value = header(key);
    std::uint64_t out = 0;
    const auto r = std::from_chars(value.data(), value.data() + value.size(), out);
    if (r.ec != std::errc{} || r.ptr != value.data() + value.size()) fail("bad value for '" + key + "'");
    return out;
  };
  const auto real = [&](const std::string& key) -> double {
    const auto value = header(key);
    double out = 0;
    const auto r = std::from_chars(value.data(), value.data() + value.size(), out);
    if (r.ec != std::errc{} || r.ptr != value.data() + value.size()) fail("bad value for '" + key + "'");
    return out;
  };
  LdaModel model;
  model.topics = count("topics");
  model.vocab_size = count("vocab_size");
  model.alpha = real("alpha");
  model.beta = real("beta");
  model.sweeps = count("sweeps");
  model.seed = count("seed");
  const auto triples = count("triples");
  model.topic_word_counts.assign(model.topics * model.vocab_size, 0);
  model.topic_totals.assign(model.topics, 0);
  for (std::size_t i = 0; i < triples; ++i) {
    std::size_t k, w;
    std::uint32_t c;
    if (!std::getline(in, line)) fail("truncated triples");
    std::istringstream fields(line);
    if (!(fields >> k >> w >> c) || k >= model.topics || w >= model.vocab_size) fail("bad triple '" + line + "'");
    model.topic_word_counts[k * model.vocab_size + w] = c;
    model.topic_totals[k] += c;
  }
  const auto vocab_count = count("vocabulary");
  if (vocab_count != model.vocab_size) fail("vocabulary size mismatch");
  Vocabulary vocab;
  for (std::size_t i = 0; i < vocab_count; ++i) {
    if (!std::getline(in, line)) fail("truncated vocabulary");
    vocab.add(line);
  }
  if (vocab.size() != model.vocab_size) fail("duplicate vocabulary entries");
  return {std::move(model), std::move(vocab)};
}

}  // namespace hashscope
