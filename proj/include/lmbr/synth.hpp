#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lmbr/nbest.hpp"
#include "lmbr/symbols.hpp"

namespace lmbr {

/// Knobs for the toy monotone translation task.
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t size = 200;         // parallel sentences
  std::size_t vocab = 20;         // target (and source) vocabulary size
  double noise = 0.3;             // SMT score noise and reference drop rate
  std::size_t nbest_size = 1000;  // n-best entries generated per sentence
  std::size_t lm_corpus_size = 3000;  // parallel training pairs
  std::size_t min_len = 3;
  std::size_t max_len = 12;
  double swap_rate = 0.15;        // source-side local reorderings
  double decay = 0.05;            // n-best score step (nats) per rank
};

/// Sources and references come from a sparse bigram grammar over target
/// words (w0, w1, ...) read through a two-to-one substitution cipher with
/// adjacent swaps (source words f0, f1, ...), so each source word has two
/// possible translations. Each n-best list holds distinct noisy
/// variants of the reference (partner substitutions, random substitutions,
/// swaps, deletions) ranked by a noisy edit cost; the entry at rank k gets
/// score decay * k, so probability decays geometrically with rank. With
/// probability `noise` the reference itself is withheld.
struct SynthTask {
  SymbolTable symbols;
  std::vector<std::vector<TokenId>> sources;
  std::vector<std::vector<TokenId>> references;
  std::vector<std::vector<NbestEntry>> nbest;  // best first
  std::vector<std::vector<TokenId>> lm_corpus;      // target side of the training data
  std::vector<std::vector<TokenId>> train_sources;  // aligned with lm_corpus
};

/// Deterministic for a given config (same seed, same bytes).
SynthTask synth_generate(const SynthConfig& cfg);

/// Moves the first `n` sentences of `task` into a second task sharing its
/// grammar, symbols and training data; returns (head, rest).
std::pair<SynthTask, SynthTask> split_task(const SynthTask& task, std::size_t n);

/// Writes sources.txt, references.txt, nbest.txt, lm_corpus.txt,
/// train_sources.txt and symbols.txt into `dir` (created if needed).
void write_synth_task(const SynthTask& task, const std::string& dir);
SynthTask read_synth_task(const std::string& dir);

}  // namespace lmbr
