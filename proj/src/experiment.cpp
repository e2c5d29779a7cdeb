#include "lmbr/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <set>
#include <unordered_set>

#include <omp.h>

#include "lmbr/bleu.hpp"
#include "lmbr/errors.hpp"
#include "lmbr/lexical_scorer.hpp"
#include "lmbr/nbest.hpp"
#include "lmbr/ngram_lm.hpp"

namespace lmbr {

std::shared_ptr<Scorer> task_scorer(const SynthTask& task, int lm_order, double lm_k) {
  auto lm = std::make_shared<NgramLM>(NgramLM::train(task.lm_corpus, lm_order, lm_k));
  if (task.train_sources.empty()) return lm;
  auto tm = std::make_shared<LexicalScorer>(LexicalScorer::train(task.train_sources, task.lm_corpus, lm->vocabulary()));
  return std::make_shared<EnsembleScorer>(std::vector<std::shared_ptr<Scorer>>{lm, tm});
}

double tune_lambda(const std::vector<double>& grid, const std::function<double(double)>& dev_bleu) {
  if (grid.empty()) throw DataError("lambda grid is empty");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double best = sorted.front();
  double best_bleu = -1.0;
  for (double lambda : sorted) {
    const double b = dev_bleu(lambda);
    if (b > best_bleu) {
      best_bleu = b;
      best = lambda;
    }
  }
  return best;
}

double tune_lambda(const std::vector<std::vector<TokenId>>& sources,
                   const std::vector<std::vector<TokenId>>& references, const std::vector<PosteriorTable>& tables,
                   const std::vector<double>& grid, Scorer& scorer, const DecodeConfig& cfg) {
  if (sources.size() != tables.size()) throw DataError("one posterior table per dev sentence is required");
  return tune_lambda(grid, [&](double lambda) {
    std::vector<std::vector<TokenId>> outputs;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      DecodeConfig c = cfg;
      c.combination.lambda = lambda;
      c.combination.table = &tables[i];
      auto result = beam_decode(sources[i], scorer, c);
      outputs.push_back(result.hypotheses.empty() ? std::vector<TokenId>{} : result.hypotheses.front().tokens);
    }
    return corpus_bleu(outputs, references);
  });
}

double novel_fraction(const std::vector<std::vector<TokenId>>& outputs, const std::vector<Lattice>& lattices,
                      const std::function<bool(TokenId)>& known, std::size_t max_paths) {
  if (outputs.size() != lattices.size()) throw DataError("one lattice per output is required");
  if (outputs.empty()) return 0.0;
  auto map = [&](std::vector<TokenId> toks) {
    for (auto& t : toks)
      if (!known(t)) t = kUnk;
    return toks;
  };
  std::size_t novel = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    std::set<std::vector<TokenId>> paths;
    for (auto& p : enumerate_paths(lattices[i], max_paths)) paths.insert(map(std::move(p.tokens)));
    if (!paths.count(map(outputs[i]))) ++novel;
  }
  return static_cast<double>(novel) / static_cast<double>(outputs.size());
}

std::vector<Lattice> compile_lattices(const std::vector<std::vector<NbestEntry>>& nbest, std::size_t n, double beta) {
  std::vector<Lattice> out(nbest.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    try {
      if (nbest[i].empty()) throw DataError("sentence " + std::to_string(i) + " has an empty n-best list");
      std::vector<NbestEntry> head(nbest[i].begin(),
                                   nbest[i].begin() + static_cast<std::ptrdiff_t>(std::min(n, nbest[i].size())));
      out[i] = normalize_posterior(nbest_to_lattice(head), beta);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Per-size inputs for one data set.
struct Prepared {
  const SynthTask* task = nullptr;
  std::vector<Lattice> lattices;
  std::vector<PosteriorTable> tables;
  double table_seconds = 0.0;
};

Prepared prepare(const SynthTask& task, std::size_t n, const CompareConfig& cfg) {
  Prepared p;
  p.task = &task;
  p.lattices = compile_lattices(task.nbest, n, cfg.beta);
  const auto t0 = Clock::now();
  p.tables.resize(p.lattices.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < p.lattices.size(); ++i) {
    try {
      p.tables[i] = compute_posterior_table(p.lattices[i], cfg.max_order, cfg.alpha, cfg.beta);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  p.table_seconds = seconds_since(t0);
  return p;
}

std::vector<TokenId> decode_one(const std::string& mode, std::size_t i, std::size_t n, double lambda,
                                const Prepared& p, Scorer& scorer, const CompareConfig& cfg) {
  const SynthTask& task = *p.task;
  const auto& source = task.sources[i];
  const auto& nbest = task.nbest[i];
  if (mode == "smt-baseline") return nbest.front().tokens;
  if (mode == "nbest-rescore") {
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t k = 0; k < std::min(n, nbest.size()); ++k) {
      const double s = -nbest[k].score + lambda * sequence_logprob(scorer, source, nbest[k].tokens);
      if (k == 0 || s > best_score) {
        best = k;
        best_score = s;
      }
    }
    return nbest[best].tokens;
  }
  if (mode == "lattice-rescore") {
    std::vector<std::vector<TokenId>> paths;
    for (auto& path : enumerate_paths(p.lattices[i], cfg.max_paths)) paths.push_back(std::move(path.tokens));
    CombinationConfig c{lambda, cfg.weights, &p.tables[i]};
    return paths[rescore(paths, source, scorer, c)];
  }
  DecodeConfig dc;
  dc.beam = cfg.beam;
  dc.max_len = cfg.max_len;
  if (mode == "pure-scorer") {
    dc.combination.lambda = 1.0;
    dc.combination.weights.theta0 = 0.0;
    dc.combination.weights.theta.fill(0.0);
  } else if (mode == "mbr-decode") {
    dc.combination = CombinationConfig{lambda, cfg.weights, &p.tables[i]};
  } else {
    throw DataError("unknown mode '" + mode + "'");
  }
  auto result = beam_decode(source, scorer, dc);
  return result.hypotheses.empty() ? std::vector<TokenId>{} : result.hypotheses.front().tokens;
}

std::vector<std::vector<TokenId>> decode_all(const std::string& mode, std::size_t n, double lambda, const Prepared& p,
                                             const ScorerFactory& make_scorer, const CompareConfig& cfg) {
  const std::size_t count = p.task->sources.size();
  std::vector<std::vector<TokenId>> outputs(count);
  std::exception_ptr error;
#pragma omp parallel
  {
    std::shared_ptr<Scorer> scorer;
    try {
      scorer = make_scorer();
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
#pragma omp for schedule(dynamic)
    for (std::size_t i = 0; i < count; ++i) {
      if (!scorer) continue;
      try {
        outputs[i] = decode_one(mode, i, n, lambda, p, *scorer, cfg);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return outputs;
}

bool uses_lambda(const std::string& mode) {
  return mode == "nbest-rescore" || mode == "lattice-rescore" || mode == "mbr-decode";
}

}  // namespace

EvalReport run_comparison(const SynthTask& test, const SynthTask* dev, const ScorerFactory& make_scorer,
                          const CompareConfig& cfg) {
  for (const auto& m : cfg.modes)
    if (std::find(kAllModes.begin(), kAllModes.end(), m) == kAllModes.end())
      throw DataError("unknown mode '" + m + "'");
  if (cfg.lambda_grid.empty()) throw DataError("lambda grid is empty");
  if (test.sources.size() != test.references.size() || test.sources.size() != test.nbest.size())
    throw DataError("task has mismatched sources, references and n-best lists");

  std::unordered_set<TokenId> vocab;
  for (auto t : make_scorer()->vocabulary()) vocab.insert(t);
  auto known = [&](TokenId t) { return vocab.empty() || vocab.count(t) != 0; };

  EvalReport report;
  report.config = cfg;
  for (std::size_t n : cfg.nbest_sizes) {
    if (n == 0) throw DataError("n-best sizes must be positive");
    const Prepared tp = prepare(test, n, cfg);
    Prepared dp;
    const bool tune = dev && cfg.lambda_grid.size() > 1;
    if (tune) dp = prepare(*dev, n, cfg);
    for (const auto& mode : cfg.modes) {
      double lambda = uses_lambda(mode) ? cfg.lambda_grid.front() : 1.0;
      if (tune && uses_lambda(mode))
        lambda = tune_lambda(cfg.lambda_grid, [&](double l) {
          return corpus_bleu(decode_all(mode, n, l, dp, make_scorer, cfg), dev->references);
        });
      const auto t0 = Clock::now();
      const auto outputs = decode_all(mode, n, lambda, tp, make_scorer, cfg);
      double runtime = seconds_since(t0);
      if (mode == "lattice-rescore" || mode == "mbr-decode") runtime += tp.table_seconds;
      ReportRow row;
      row.mode = mode;
      row.nbest_size = n;
      row.bleu = corpus_bleu(outputs, test.references);
      row.novel_fraction = novel_fraction(outputs, tp.lattices, known, cfg.max_paths);
      row.runtime = runtime;
      row.lambda = lambda;
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "mode,nbest_size,bleu,novel_fraction,runtime\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.3f\n", r.mode.c_str(), r.nbest_size, r.bleu,
                  r.novel_fraction, r.runtime);
    out << buf;
  }
}

}  // namespace lmbr
