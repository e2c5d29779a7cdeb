#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "lmbr/decoder.hpp"
#include "lmbr/synth.hpp"

namespace lmbr {

inline const std::vector<std::string> kAllModes{"smt-baseline", "pure-scorer", "nbest-rescore", "lattice-rescore",
                                                "mbr-decode"};

struct CompareConfig {
  std::vector<std::string> modes = kAllModes;
  std::vector<std::size_t> nbest_sizes{1, 10, 100, 1000};
  /// lambda candidates; a single entry disables tuning.
  std::vector<double> lambda_grid{0.1, 0.3, 1.0, 3.0};
  MbrWeights weights;
  double alpha = 0.1;
  double beta = 1.0;
  int max_order = 4;
  std::size_t beam = kDefaultBeam;
  std::size_t max_len = 0;
  /// Paths enumerated per lattice for lattice-rescore and novelty checks.
  std::size_t max_paths = 100'000;
};

struct ReportRow {
  std::string mode;
  std::size_t nbest_size = 0;
  double bleu = 0.0;
  double novel_fraction = 0.0;
  double runtime = 0.0;  // seconds, excluding tuning
  double lambda = 0.0;
};

struct EvalReport {
  CompareConfig config;
  std::vector<ReportRow> rows;
};

using ScorerFactory = std::function<std::shared_ptr<Scorer>()>;

/// Stand-in for a neural translation model: product of an NgramLM trained
/// on the task's target corpus and, when the task has training sources, a
/// LexicalScorer trained on the parallel pairs. Read-only after training,
/// so one instance can serve every worker.
std::shared_ptr<Scorer> task_scorer(const SynthTask& task, int lm_order = 3, double lm_k = 0.1);

/// Smallest lambda with the highest value of `dev_bleu`. Throws DataError
/// on an empty grid.
double tune_lambda(const std::vector<double>& grid, const std::function<double(double)>& dev_bleu);

/// Dev-set tuning for mbr-decode: each sentence decodes against the
/// posterior table of its own lattice.
double tune_lambda(const std::vector<std::vector<TokenId>>& sources,
                   const std::vector<std::vector<TokenId>>& references, const std::vector<PosteriorTable>& tables,
                   const std::vector<double>& grid, Scorer& scorer, const DecodeConfig& cfg);

/// Fraction of outputs whose token sequence is not a path of the
/// corresponding lattice. Tokens rejected by `known` are compared as UNK.
double novel_fraction(const std::vector<std::vector<TokenId>>& outputs, const std::vector<Lattice>& lattices,
                      const std::function<bool(TokenId)>& known, std::size_t max_paths);

/// First `n` entries of each list, compiled and normalised.
std::vector<Lattice> compile_lattices(const std::vector<std::vector<NbestEntry>>& nbest, std::size_t n, double beta);

/// Runs every mode at every n-best size on `test`. Lambda is tuned per
/// mode and size on `dev` when given and the grid has several entries.
/// `make_scorer` is called once per worker thread.
EvalReport run_comparison(const SynthTask& test, const SynthTask* dev, const ScorerFactory& make_scorer,
                          const CompareConfig& cfg);

void write_report_csv(std::ostream& out, const EvalReport& report);

}  // namespace lmbr
