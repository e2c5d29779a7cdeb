#include "lmbr/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "lmbr/errors.hpp"

namespace lmbr {

namespace {

struct Grammar {
  std::vector<TokenId> target;             // word ids, index = word number
  std::vector<TokenId> source;             // cipher image of each word
  std::vector<std::vector<std::size_t>> successors;
  std::vector<double> end_prob;
  std::vector<std::size_t> partner;        // systematic SMT confusion
};

constexpr std::array<double, 3> kSuccessorProbs{0.6, 0.3, 0.1};

std::vector<std::size_t> sample_sentence(const Grammar& g, std::mt19937_64& rng, std::size_t min_len,
                                         std::size_t max_len) {
  const std::size_t v = g.target.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (true) {
    std::vector<std::size_t> words;
    std::size_t w = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    words.push_back(w);
    while (words.size() < max_len) {
      if (words.size() >= min_len && unit(rng) < g.end_prob[w]) break;
      const double r = unit(rng);
      std::size_t k = r < kSuccessorProbs[0] ? 0 : (r < kSuccessorProbs[0] + kSuccessorProbs[1] ? 1 : 2);
      w = g.successors[w][k];
      words.push_back(w);
    }
    if (words.size() >= min_len) return words;
  }
}

std::vector<TokenId> to_tokens(const std::vector<std::size_t>& words, const std::vector<TokenId>& ids) {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (auto w : words) out.push_back(ids[w]);
  return out;
}

}  // namespace

SynthTask synth_generate(const SynthConfig& cfg) {
  if (cfg.vocab < 4) throw DataError("synthetic vocabulary must have at least 4 words");
  if (cfg.min_len < 1 || cfg.max_len < cfg.min_len) throw DataError("bad synthetic length range");
  if (cfg.nbest_size < 1) throw DataError("n-best size must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SynthTask task;
  Grammar g;
  const std::size_t v = cfg.vocab;
  for (std::size_t i = 0; i < v; ++i) g.target.push_back(task.symbols.intern("w" + std::to_string(i)));
  const std::size_t nsrc = (v + 1) / 2;
  std::vector<TokenId> source_words;
  for (std::size_t i = 0; i < nsrc; ++i) source_words.push_back(task.symbols.intern("f" + std::to_string(i)));
  std::vector<std::size_t> perm(v);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < v; ++i) g.source.push_back(source_words[perm[i] / 2]);

  std::vector<std::size_t> others(v);
  std::iota(others.begin(), others.end(), 0);
  for (std::size_t i = 0; i < v; ++i) {
    std::vector<std::size_t> pool;
    for (auto j : others)
      if (j != i) pool.push_back(j);
    std::shuffle(pool.begin(), pool.end(), rng);
    g.successors.emplace_back(pool.begin(), pool.begin() + 3);
    g.partner.push_back(pool[3]);
  }
  std::vector<std::size_t> enders(v);
  std::iota(enders.begin(), enders.end(), 0);
  std::shuffle(enders.begin(), enders.end(), rng);
  g.end_prob.assign(v, 0.05);
  for (std::size_t i = 0; i < v / 4; ++i) g.end_prob[enders[i]] = 0.7;

  auto encipher = [&](const std::vector<std::size_t>& words) {
    std::vector<TokenId> src = to_tokens(words, g.source);
    for (std::size_t i = 0; i + 1 < src.size(); ++i)
      if (unit(rng) < cfg.swap_rate) {
        std::swap(src[i], src[i + 1]);
        ++i;
      }
    return src;
  };
  for (std::size_t i = 0; i < cfg.lm_corpus_size; ++i) {
    const auto words = sample_sentence(g, rng, cfg.min_len, cfg.max_len);
    task.lm_corpus.push_back(to_tokens(words, g.target));
    task.train_sources.push_back(encipher(words));
  }

  const double sd = 2.0 * cfg.noise;
  for (std::size_t s = 0; s < cfg.size; ++s) {
    const auto words = sample_sentence(g, rng, cfg.min_len, cfg.max_len);
    task.references.push_back(to_tokens(words, g.target));
    task.sources.push_back(encipher(words));

    // Candidate pool of distinct variants with their edit costs.
    std::map<std::vector<std::size_t>, double> pool;
    const bool keep_reference = !(unit(rng) < cfg.noise);
    if (keep_reference) pool.emplace(words, sd * std::abs(gauss(rng)));
    const std::size_t attempts = 60 * cfg.nbest_size;
    for (std::size_t a = 0; a < attempts && pool.size() < cfg.nbest_size; ++a) {
      std::vector<std::size_t> variant = words;
      double cost = 0.0;
      std::size_t edits = 1;
      while (unit(rng) < 0.55 && edits < 2 * words.size()) ++edits;
      for (std::size_t e = 0; e < edits; ++e) {
        const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, variant.size() - 1)(rng);
        const double r = unit(rng);
        if (r < 0.5) {
          variant[pos] = g.partner[variant[pos]];
          cost += 1.0;
        } else if (r < 0.7) {
          variant[pos] = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
          cost += 2.0;
        } else if (r < 0.9) {
          if (variant.size() > 1) {
            const std::size_t p = std::min(pos, variant.size() - 2);
            std::swap(variant[p], variant[p + 1]);
          }
          cost += 1.5;
        } else {
          if (variant.size() > 1) variant.erase(variant.begin() + static_cast<std::ptrdiff_t>(pos));
          cost += 2.0;
        }
      }
      if (variant == words) continue;
      const double score = cost + sd * gauss(rng);
      auto [it, fresh] = pool.emplace(std::move(variant), score);
      if (!fresh) it->second = std::min(it->second, score);
    }
    std::vector<NbestEntry> entries;
    for (const auto& [variant, score] : pool) entries.push_back({to_tokens(variant, g.target), score});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const NbestEntry& a, const NbestEntry& b) { return a.score < b.score; });
    for (std::size_t k = 0; k < entries.size(); ++k) entries[k].score = cfg.decay * static_cast<double>(k);
    task.nbest.push_back(std::move(entries));
  }
  return task;
}

std::pair<SynthTask, SynthTask> split_task(const SynthTask& task, std::size_t n) {
  if (n > task.sources.size()) throw DataError("cannot split off more sentences than the task has");
  SynthTask head, rest;
  for (auto* part : {&head, &rest}) {
    part->symbols = task.symbols;
    part->lm_corpus = task.lm_corpus;
    part->train_sources = task.train_sources;
  }
  for (std::size_t i = 0; i < task.sources.size(); ++i) {
    SynthTask& part = i < n ? head : rest;
    part.sources.push_back(task.sources[i]);
    part.references.push_back(task.references[i]);
    part.nbest.push_back(task.nbest[i]);
  }
  return {std::move(head), std::move(rest)};
}

namespace {

void write_lines(const std::string& path, const std::vector<std::vector<TokenId>>& lines, const SymbolTable& symbols) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& l : lines) out << symbols.join(l) << '\n';
}

std::vector<std::vector<TokenId>> read_lines(const std::string& path, SymbolTable& symbols) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<std::vector<TokenId>> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(symbols.intern_all(split_tokens(line)));
  return out;
}

}  // namespace

void write_synth_task(const SynthTask& task, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_lines(dir + "/sources.txt", task.sources, task.symbols);
  write_lines(dir + "/references.txt", task.references, task.symbols);
  write_lines(dir + "/lm_corpus.txt", task.lm_corpus, task.symbols);
  write_lines(dir + "/train_sources.txt", task.train_sources, task.symbols);
  std::vector<NbestList> lists;
  for (std::size_t i = 0; i < task.nbest.size(); ++i) lists.push_back({std::to_string(i), task.nbest[i]});
  std::ofstream nb(dir + "/nbest.txt");
  if (!nb) throw DataError("cannot write " + dir + "/nbest.txt");
  write_nbest(nb, lists, task.symbols);
  std::ofstream sym(dir + "/symbols.txt");
  task.symbols.write(sym);
}

SynthTask read_synth_task(const std::string& dir) {
  SynthTask task;
  if (std::filesystem::exists(dir + "/symbols.txt")) {
    std::ifstream sym(dir + "/symbols.txt");
    task.symbols = SymbolTable::read(sym);
  }
  SymbolTable& symbols = task.symbols;
  // Allow new tokens in user-supplied files.
  SymbolTable open;
  for (std::size_t i = 3; i < symbols.size(); ++i) open.intern(symbols.symbol(static_cast<TokenId>(i)));
  task.symbols = open;
  task.sources = read_lines(dir + "/sources.txt", task.symbols);
  task.references = read_lines(dir + "/references.txt", task.symbols);
  if (std::filesystem::exists(dir + "/lm_corpus.txt")) task.lm_corpus = read_lines(dir + "/lm_corpus.txt", task.symbols);
  if (std::filesystem::exists(dir + "/train_sources.txt"))
    task.train_sources = read_lines(dir + "/train_sources.txt", task.symbols);
  std::ifstream nb(dir + "/nbest.txt");
  if (!nb) throw DataError("cannot read " + dir + "/nbest.txt");
  const auto lists = read_nbest(nb, task.symbols);
  task.nbest.assign(task.sources.size(), {});
  for (const auto& list : lists) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(list.id);
    } catch (const std::exception&) {
      throw DataError("n-best id '" + list.id + "' is not a sentence index");
    }
    if (idx >= task.nbest.size()) throw DataError("n-best id " + list.id + " has no source sentence");
    task.nbest[idx] = list.entries;
    std::stable_sort(task.nbest[idx].begin(), task.nbest[idx].end(),
                     [](const NbestEntry& a, const NbestEntry& b) { return a.score < b.score; });
  }
  if (task.references.size() != task.sources.size())
    throw DataError("sources and references differ in length");
  return task;
}

}  // namespace lmbr
