#include "lmbr/nbest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

#include "lmbr/errors.hpp"
#include "lmbr/lattice_io.hpp"

namespace lmbr {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (true) {
    const auto next = line.find("|||", pos);
    if (next == std::string::npos) {
      fields.push_back(trim(line.substr(pos)));
      break;
    }
    fields.push_back(trim(line.substr(pos, next - pos)));
    pos = next + 3;
  }
  return fields;
}

std::vector<NbestList> read_nbest(std::istream& in, SymbolTable& symbols) {
  std::vector<NbestList> lists;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_fields(line);
    if (fields.size() != 3)
      throw DataError("n-best line " + std::to_string(lineno) + ": expected 'id ||| tokens ||| score'");
    char* end = nullptr;
    const double score = std::strtod(fields[2].c_str(), &end);
    if (fields[2].empty() || end != fields[2].c_str() + fields[2].size() || !std::isfinite(score))
      throw DataError("n-best line " + std::to_string(lineno) + ": bad score '" + fields[2] + "'");
    auto [it, fresh] = index.emplace(fields[0], lists.size());
    if (fresh) lists.push_back(NbestList{fields[0], {}});
    lists[it->second].entries.push_back(NbestEntry{symbols.intern_all(split_tokens(fields[1])), score});
  }
  return lists;
}

void write_nbest(std::ostream& out, const std::vector<NbestList>& lists, const SymbolTable& symbols) {
  for (const auto& list : lists)
    for (const auto& e : list.entries)
      out << list.id << " ||| " << symbols.join(e.tokens) << " ||| " << format_weight(e.score) << '\n';
}

namespace {

struct TrieNode {
  std::map<TokenId, std::size_t> children;  // ordered by label for determinism
  double final_weight = kInfWeight;
  double potential = 0.0;
};

}  // namespace

Lattice nbest_to_lattice(const std::vector<NbestEntry>& entries, std::vector<std::string>* warnings) {
  if (entries.empty()) throw DataError("empty n-best list");

  std::vector<TrieNode> trie(1);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.tokens.empty()) throw DataError("empty hypothesis at n-best position " + std::to_string(i));
    if (!std::isfinite(e.score)) throw DataError("non-finite score at n-best position " + std::to_string(i));
    std::size_t node = 0;
    for (TokenId t : e.tokens) {
      auto it = trie[node].children.find(t);
      if (it == trie[node].children.end()) {
        trie.emplace_back();
        it = trie[node].children.emplace(t, trie.size() - 1).first;
      }
      node = it->second;
    }
    if (trie[node].final_weight != kInfWeight) {
      if (warnings)
        warnings->push_back("duplicate hypothesis at n-best position " + std::to_string(i) +
                            "; keeping score " + format_weight(std::min(trie[node].final_weight, e.score)));
      trie[node].final_weight = std::min(trie[node].final_weight, e.score);
    } else {
      trie[node].final_weight = e.score;
    }
  }

  // Children always have larger indices than parents, so a reverse sweep is
  // a post-order. Tropical potentials: best suffix weight from each node.
  for (std::size_t n = trie.size(); n-- > 0;) {
    double best = trie[n].final_weight;
    for (const auto& [label, child] : trie[n].children) best = std::min(best, trie[child].potential);
    trie[n].potential = best;
  }

  // Pushed arc weight into child c of n: potential[c] - potential[n]; the
  // root potential is folded into the root's arcs and final weight.
  auto arc_weight = [&](std::size_t parent, std::size_t child) {
    const double w = trie[child].potential - trie[parent].potential;
    return parent == 0 ? w + trie[0].potential : w;
  };
  auto pushed_final = [&](std::size_t n) {
    if (trie[n].final_weight == kInfWeight) return kInfWeight;
    const double w = trie[n].final_weight - trie[n].potential;
    return n == 0 ? w + trie[0].potential : w;
  };

  // Merge nodes whose (final, outgoing label/weight/class) signatures agree.
  using Signature = std::tuple<double, std::vector<std::tuple<TokenId, double, std::size_t>>>;
  std::map<Signature, std::size_t> classes;
  std::vector<std::size_t> cls(trie.size());
  for (std::size_t n = trie.size(); n-- > 0;) {
    Signature sig;
    std::get<0>(sig) = pushed_final(n);
    for (const auto& [label, child] : trie[n].children)
      std::get<1>(sig).emplace_back(label, arc_weight(n, child), cls[child]);
    if (n == 0) {
      cls[n] = classes.size();  // root never merges
      continue;
    }
    auto [it, fresh] = classes.emplace(std::move(sig), classes.size());
    cls[n] = it->second;
  }

  // Emit representatives in depth-first discovery order from the root.
  Lattice lat;
  std::unordered_map<std::size_t, StateId> state_of;
  std::vector<std::size_t> stack{0};
  state_of[cls[0]] = lat.add_state();
  lat.set_start(0);
  std::vector<std::size_t> order;
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    order.push_back(n);
    const StateId s = state_of.at(cls[n]);
    if (trie[n].final_weight != kInfWeight) lat.set_final(s, pushed_final(n));
    std::vector<std::size_t> fresh_children;
    for (const auto& [label, child] : trie[n].children) {
      auto [it, fresh] = state_of.emplace(cls[child], 0);
      if (fresh) {
        it->second = lat.add_state();
        fresh_children.push_back(child);
      }
      lat.add_arc(s, it->second, label, arc_weight(n, child));
    }
    for (auto it = fresh_children.rbegin(); it != fresh_children.rend(); ++it) stack.push_back(*it);
  }
  return lat;
}

}  // namespace lmbr
