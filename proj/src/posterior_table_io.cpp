#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lmbr/errors.hpp"
#include "lmbr/posteriors.hpp"

namespace lmbr {

void write_posterior_table(std::ostream& out, const PosteriorTable& table, const SymbolTable& symbols) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, table.source_hash());
  out << "# alpha=" << table.alpha() << '\n'
      << "# beta=" << table.beta() << '\n'
      << "# max_order=" << table.max_order() << '\n'
      << "# lattice=" << hash << '\n';
  char value[32];
  for (const auto& [g, p] : table.sorted_entries()) {
    for (int i = 0; i < g.order(); ++i) out << (i ? " " : "") << symbols.symbol(g[i]);
    std::snprintf(value, sizeof value, "%.9f", p);
    out << '\t' << value << '\n';
  }
}

PosteriorTable read_posterior_table(std::istream& in, SymbolTable& symbols) {
  double alpha = 0.0, beta = 1.0;
  int max_order = kMaxOrder;
  std::uint64_t hash = 0;
  std::vector<std::pair<Ngram, double>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string kv;
      header >> kv;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      try {
        if (key == "alpha") alpha = std::stod(val);
        else if (key == "beta") beta = std::stod(val);
        else if (key == "max_order") max_order = std::stoi(val);
        else if (key == "lattice") hash = std::stoull(val, nullptr, 16);
      } catch (const std::exception&) {
        throw DataError("posterior table line " + std::to_string(lineno) + ": bad header value");
      }
      continue;
    }
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw DataError("posterior table line " + std::to_string(lineno) + ": expected tokens<TAB>posterior");
    const auto tokens = symbols.intern_all(split_tokens(line.substr(0, tab)));
    if (tokens.empty() || tokens.size() > static_cast<std::size_t>(kMaxOrder))
      throw DataError("posterior table line " + std::to_string(lineno) + ": bad n-gram length");
    char* end = nullptr;
    const std::string field = line.substr(tab + 1);
    const double p = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || !std::isfinite(p))
      throw DataError("posterior table line " + std::to_string(lineno) + ": bad posterior");
    entries.emplace_back(Ngram(tokens), p);
  }
  PosteriorTable table(max_order, alpha, beta, hash);
  for (const auto& [g, p] : entries) table.set(g, p);
  return table;
}

}  // namespace lmbr
