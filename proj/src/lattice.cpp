#include "lmbr/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "lmbr/errors.hpp"

namespace lmbr {

StateId Lattice::add_state() {
  out_.emplace_back();
  return static_cast<StateId>(out_.size() - 1);
}

void Lattice::ensure_state(StateId id) {
  if (id < 0) throw DataError("negative state id " + std::to_string(id));
  if (static_cast<std::size_t>(id) >= out_.size()) out_.resize(static_cast<std::size_t>(id) + 1);
}

void Lattice::add_arc(StateId src, StateId dst, TokenId label, double weight) {
  ensure_state(src);
  ensure_state(dst);
  out_[static_cast<std::size_t>(src)].push_back(arcs_.size());
  arcs_.push_back(Arc{src, dst, label, weight});
}

void Lattice::set_start(StateId s) {
  ensure_state(s);
  start_ = s;
}

void Lattice::set_final(StateId s, double weight) {
  ensure_state(s);
  finals_[s] = weight;
}

std::span<const std::size_t> Lattice::out_arcs(StateId s) const {
  return out_[static_cast<std::size_t>(s)];
}

double Lattice::final_weight(StateId s) const {
  auto it = finals_.find(s);
  return it == finals_.end() ? kInfWeight : it->second;
}

std::vector<TokenId> Lattice::vocabulary() const {
  std::vector<TokenId> v;
  v.reserve(arcs_.size());
  for (const auto& a : arcs_) v.push_back(a.label);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool operator==(const Lattice& a, const Lattice& b) {
  if (a.num_states() != b.num_states() || a.start_ != b.start_ || a.finals_ != b.finals_) return false;
  auto key = [](const Arc& x) { return std::tie(x.src, x.dst, x.label, x.weight); };
  auto sorted = [&](std::vector<Arc> v) {
    std::sort(v.begin(), v.end(), [&](const Arc& l, const Arc& r) { return key(l) < key(r); });
    return v;
  };
  return sorted(a.arcs_) == sorted(b.arcs_);
}

double neglog_add(double a, double b) {
  if (a == kInfWeight) return b;
  if (b == kInfWeight) return a;
  const double lo = std::min(a, b), hi = std::max(a, b);
  return lo - std::log1p(std::exp(lo - hi));
}

namespace {

std::string back_edge_message(const Lattice& lat) {
  // Iterative DFS colouring; a grey successor closes a cycle.
  const std::size_t n = lat.num_states();
  std::vector<int> colour(n, 0);
  std::vector<std::pair<StateId, std::size_t>> stack;
  for (std::size_t root = 0; root < n; ++root) {
    if (colour[root]) continue;
    stack.emplace_back(static_cast<StateId>(root), 0);
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [s, next] = stack.back();
      auto outs = lat.out_arcs(s);
      if (next == outs.size()) {
        colour[static_cast<std::size_t>(s)] = 2;
        stack.pop_back();
        continue;
      }
      const Arc& a = lat.arc(outs[next++]);
      const auto d = static_cast<std::size_t>(a.dst);
      if (colour[d] == 1)
        return "cycle detected: back-edge " + std::to_string(a.src) + " -> " + std::to_string(a.dst);
      if (colour[d] == 0) {
        colour[d] = 1;
        stack.emplace_back(a.dst, 0);
      }
    }
  }
  return "cycle detected";
}

}  // namespace

std::vector<StateId> topological_order(const Lattice& lat) {
  const std::size_t n = lat.num_states();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& a : lat.arcs()) ++indegree[static_cast<std::size_t>(a.dst)];
  std::priority_queue<StateId, std::vector<StateId>, std::greater<>> ready;
  for (std::size_t s = 0; s < n; ++s)
    if (indegree[s] == 0) ready.push(static_cast<StateId>(s));
  std::vector<StateId> order;
  order.reserve(n);
  while (!ready.empty()) {
    StateId s = ready.top();
    ready.pop();
    order.push_back(s);
    for (auto ai : lat.out_arcs(s)) {
      auto d = static_cast<std::size_t>(lat.arc(ai).dst);
      if (--indegree[d] == 0) ready.push(static_cast<StateId>(d));
    }
  }
  if (order.size() != n) throw DataError(back_edge_message(lat));
  return order;
}

void validate(const Lattice& lat) {
  if (lat.num_states() == 0) throw DataError("lattice has no states");
  if (lat.finals().empty()) throw DataError("lattice has no final state");
  for (const auto& a : lat.arcs()) {
    if (!std::isfinite(a.weight))
      throw DataError("non-finite weight on arc " + std::to_string(a.src) + " -> " + std::to_string(a.dst));
    if (a.label == kEpsilon)
      throw DataError("epsilon arc " + std::to_string(a.src) + " -> " + std::to_string(a.dst));
  }
  for (const auto& [s, w] : lat.finals())
    if (!std::isfinite(w)) throw DataError("non-finite final weight on state " + std::to_string(s));
  topological_order(lat);
}

Lattice trim(const Lattice& lat) {
  const std::size_t n = lat.num_states();
  if (n == 0) throw DataError("lattice has no states");
  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::vector<StateId> work{lat.start()};
  fwd[static_cast<std::size_t>(lat.start())] = 1;
  while (!work.empty()) {
    StateId s = work.back();
    work.pop_back();
    for (auto ai : lat.out_arcs(s)) {
      auto d = static_cast<std::size_t>(lat.arc(ai).dst);
      if (!fwd[d]) {
        fwd[d] = 1;
        work.push_back(static_cast<StateId>(d));
      }
    }
  }
  std::vector<std::vector<StateId>> in(n);
  for (const auto& a : lat.arcs()) in[static_cast<std::size_t>(a.dst)].push_back(a.src);
  for (const auto& [s, w] : lat.finals()) {
    if (!bwd[static_cast<std::size_t>(s)]) {
      bwd[static_cast<std::size_t>(s)] = 1;
      work.push_back(s);
    }
  }
  while (!work.empty()) {
    StateId s = work.back();
    work.pop_back();
    for (StateId p : in[static_cast<std::size_t>(s)]) {
      if (!bwd[static_cast<std::size_t>(p)]) {
        bwd[static_cast<std::size_t>(p)] = 1;
        work.push_back(p);
      }
    }
  }
  if (!bwd[static_cast<std::size_t>(lat.start())])
    throw DataError("disconnected lattice: no final state reachable from start");

  std::vector<StateId> remap(n, -1);
  Lattice out;
  for (std::size_t s = 0; s < n; ++s)
    if (fwd[s] && bwd[s]) remap[s] = out.add_state();
  out.set_start(remap[static_cast<std::size_t>(lat.start())]);
  for (const auto& a : lat.arcs()) {
    auto s = remap[static_cast<std::size_t>(a.src)], d = remap[static_cast<std::size_t>(a.dst)];
    if (s >= 0 && d >= 0) out.add_arc(s, d, a.label, a.weight);
  }
  for (const auto& [s, w] : lat.finals())
    if (remap[static_cast<std::size_t>(s)] >= 0) out.set_final(remap[static_cast<std::size_t>(s)], w);
  return out;
}

Lattice normalize_posterior(const Lattice& lat, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DataError("posterior scale beta must be positive");
  validate(lat);
  Lattice trimmed = trim(lat);
  const auto order = topological_order(trimmed);
  const std::size_t n = trimmed.num_states();

  // potential[s] = -log of the scaled mass of all s-to-final suffixes.
  std::vector<double> potential(n, kInfWeight);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const StateId s = *it;
    double acc = kInfWeight;
    if (trimmed.is_final(s)) acc = beta * trimmed.final_weight(s);
    for (auto ai : trimmed.out_arcs(s)) {
      const Arc& a = trimmed.arc(ai);
      acc = neglog_add(acc, beta * a.weight + potential[static_cast<std::size_t>(a.dst)]);
    }
    potential[static_cast<std::size_t>(s)] = acc;
  }
  for (double p : potential)
    if (!std::isfinite(p)) throw DataError("degenerate lattice weights: total mass is zero or overflows");

  Lattice out;
  for (std::size_t s = 0; s < n; ++s) out.add_state();
  out.set_start(trimmed.start());
  for (const auto& a : trimmed.arcs())
    out.add_arc(a.src, a.dst, a.label,
                beta * a.weight + potential[static_cast<std::size_t>(a.dst)] -
                    potential[static_cast<std::size_t>(a.src)]);
  for (const auto& [s, w] : trimmed.finals()) out.set_final(s, beta * w - potential[static_cast<std::size_t>(s)]);
  return out;
}

double count_paths(const Lattice& lat) {
  const auto order = topological_order(lat);
  std::vector<double> suffix(lat.num_states(), 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    double c = lat.is_final(*it) ? 1.0 : 0.0;
    for (auto ai : lat.out_arcs(*it)) c += suffix[static_cast<std::size_t>(lat.arc(ai).dst)];
    suffix[static_cast<std::size_t>(*it)] = c;
  }
  return suffix[static_cast<std::size_t>(lat.start())];
}

std::vector<Path> enumerate_paths(const Lattice& lat, std::size_t max_paths) {
  const double total = count_paths(lat);
  if (total > static_cast<double>(max_paths))
    throw DataError("lattice has " + std::to_string(static_cast<long double>(total)) +
                    " paths, more than the limit of " + std::to_string(max_paths));
  std::vector<Path> paths;
  std::vector<TokenId> prefix;
  std::function<void(StateId, double)> walk = [&](StateId s, double weight) {
    if (lat.is_final(s)) paths.push_back(Path{prefix, std::exp(-(weight + lat.final_weight(s)))});
    for (auto ai : lat.out_arcs(s)) {
      const Arc& a = lat.arc(ai);
      prefix.push_back(a.label);
      walk(a.dst, weight + a.weight);
      prefix.pop_back();
    }
  };
  walk(lat.start(), 0.0);
  return paths;
}

}  // namespace lmbr
