#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lmbr/lattice.hpp"
#include "lmbr/mbr.hpp"
#include "lmbr/posteriors.hpp"
#include "lmbr/scorer.hpp"

namespace lmbr {

inline constexpr std::size_t kDefaultBeam = 20;
inline constexpr std::size_t kDefaultTopK = 100;
inline constexpr double kExhaustiveLimit = 1e6;

struct DecodeConfig {
  std::size_t beam = kDefaultBeam;
  /// Cap on output tokens before EOS; 0 means 2 * |source| + 5.
  std::size_t max_len = 0;
  CombinationConfig combination;
  /// 0 expands every candidate token; otherwise each hypothesis expands the
  /// `candidate_cap` best tokens of the scorer plus all lattice tokens.
  std::size_t candidate_cap = 0;
  /// When set, hypotheses must follow paths of this lattice and may only
  /// end in its final states.
  const Lattice* constrain_to = nullptr;
};

struct DecodeResult {
  /// Finished hypotheses, best first; ties by token sequence.
  std::vector<Hypothesis> hypotheses;
  /// The best hypothesis was closed by the length cap, not by choosing EOS.
  bool truncated = false;
};

std::size_t effective_max_len(const DecodeConfig& cfg, std::size_t source_len);

/// Sorted union of the scorer vocabulary, the table's unigram tokens and EOS.
std::vector<TokenId> candidate_vocab(std::span<const TokenId> scorer_vocab, const PosteriorTable* table);

/// Beam search over evidence + lambda * log P_scorer using the stepwise gain.
/// Each step expands every live hypothesis with every candidate token and
/// keeps the `beam` best expansions; expansions ending in EOS retire to the
/// result pool. Hypotheses reaching max_len are closed with the EOS score
/// and flagged incomplete. Search stops early once no live hypothesis can
/// beat the best finished one even with the largest possible future gains.
DecodeResult beam_decode(std::span<const TokenId> source, Scorer& scorer, const DecodeConfig& cfg);

/// Scores every candidate sequence of length <= max_len (closed by EOS) and
/// returns the best under the same ordering as beam_decode. Throws DataError
/// when the space exceeds kExhaustiveLimit sequences.
Hypothesis exhaustive_decode(std::span<const TokenId> source, Scorer& scorer, const DecodeConfig& cfg);

/// Best of an explicit hypothesis list under evidence + lambda * log P.
/// Ties go to the earlier entry.
std::size_t rescore(const std::vector<std::vector<TokenId>>& hypotheses, std::span<const TokenId> source,
                    Scorer& scorer, const CombinationConfig& cfg);

/// Strict weak ordering used for results: higher score first, then
/// lexicographically smaller token sequence.
bool better(const Hypothesis& a, const Hypothesis& b);

}  // namespace lmbr
