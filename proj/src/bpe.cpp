#include "lmbr/bpe.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "lmbr/errors.hpp"

namespace lmbr {

std::vector<std::string> utf8_chars(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto lead = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    len = std::min(len, word.size() - i);
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

BpeModel::BpeModel(std::vector<MergePair> merges) : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) rank_.emplace(merges_[i], i);
}

std::vector<std::string> BpeModel::segment(std::string_view word) const {
  std::vector<std::string> units = utf8_chars(word);
  while (units.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < units.size(); ++i) {
      auto it = rank_.find({units[i], units[i + 1]});
      if (it != rank_.end() && it->second < best_rank) {
        best_rank = it->second;
      }
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    // Merge every left-to-right occurrence of the chosen pair.
    const MergePair& pair = merges_[best_rank];
    std::vector<std::string> merged;
    for (std::size_t i = 0; i < units.size();) {
      if (i + 1 < units.size() && units[i] == pair.first && units[i + 1] == pair.second) {
        merged.push_back(units[i] + units[i + 1]);
        i += 2;
      } else {
        merged.push_back(units[i++]);
      }
    }
    units = std::move(merged);
  }
  for (std::size_t i = 0; i + 1 < units.size(); ++i) units[i] += kContinuation;
  return units;
}

BpeModel BpeModel::read(std::istream& in) {
  std::vector<MergePair> merges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tokens(line);
    if (fields.size() != 2) throw DataError("BPE model line " + std::to_string(lineno) + ": expected 'left right'");
    merges.emplace_back(fields[0], fields[1]);
  }
  return BpeModel(std::move(merges));
}

void BpeModel::write(std::ostream& out) const {
  for (const auto& [l, r] : merges_) out << l << ' ' << r << '\n';
}

BpeModel learn_bpe(const std::map<std::string, std::size_t>& word_counts, std::size_t num_merges) {
  if (word_counts.empty()) throw DataError("cannot learn BPE from an empty corpus");
  std::vector<std::pair<std::vector<std::string>, std::size_t>> words;
  for (const auto& [w, c] : word_counts) words.emplace_back(utf8_chars(w), c);

  std::vector<MergePair> merges;
  while (merges.size() < num_merges) {
    std::map<MergePair, std::size_t> pair_counts;
    for (const auto& [units, count] : words)
      for (std::size_t i = 0; i + 1 < units.size(); ++i) pair_counts[{units[i], units[i + 1]}] += count;
    if (pair_counts.empty()) break;
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
      if (it->second > best->second) best = it;
    const MergePair pair = best->first;
    merges.push_back(pair);
    for (auto& [units, count] : words) {
      std::vector<std::string> merged;
      for (std::size_t i = 0; i < units.size();) {
        if (i + 1 < units.size() && units[i] == pair.first && units[i + 1] == pair.second) {
          merged.push_back(units[i] + units[i + 1]);
          i += 2;
        } else {
          merged.push_back(units[i++]);
        }
      }
      units = std::move(merged);
    }
  }
  return BpeModel(std::move(merges));
}

std::vector<std::string> join_subwords(const std::vector<std::string>& units) {
  std::vector<std::string> words;
  std::string pending;
  bool open = false;
  for (const auto& u : units) {
    if (u.size() >= kContinuation.size() && u.compare(u.size() - kContinuation.size(), kContinuation.size(), kContinuation) == 0) {
      pending += u.substr(0, u.size() - kContinuation.size());
      open = true;
    } else {
      words.push_back(pending + u);
      pending.clear();
      open = false;
    }
  }
  if (open) words.push_back(pending);
  return words;
}

Lattice convert_lattice(const Lattice& word_lattice, const BpeModel& model, SymbolTable& symbols) {
  validate(word_lattice);
  Lattice out;
  for (std::size_t s = 0; s < word_lattice.num_states(); ++s) out.add_state();
  out.set_start(word_lattice.start());
  for (const auto& [s, w] : word_lattice.finals()) out.set_final(s, w);
  for (const auto& a : word_lattice.arcs()) {
    if (a.label == kUnk || a.label == kEos) {
      out.add_arc(a.src, a.dst, a.label, a.weight);
      continue;
    }
    const auto units = model.segment(symbols.symbol(a.label));
    StateId from = a.src;
    for (std::size_t i = 0; i < units.size(); ++i) {
      const bool last = i + 1 == units.size();
      const StateId to = last ? a.dst : out.add_state();
      out.add_arc(from, to, symbols.intern(units[i]), i == 0 ? a.weight : 0.0);
      from = to;
    }
  }
  return out;
}

}  // namespace lmbr
