#include "lmbr/lattice_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lmbr/errors.hpp"

namespace lmbr {

namespace {

[[noreturn]] void fail(std::size_t lineno, const std::string& what) {
  throw DataError("lattice line " + std::to_string(lineno) + ": " + what);
}

StateId parse_state(const std::string& field, std::size_t lineno) {
  StateId v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || v < 0)
    fail(lineno, "bad state id '" + field + "'");
  return v;
}

double parse_weight(const std::string& field, std::size_t lineno) {
  char* end = nullptr;
  const double w = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(w))
    fail(lineno, "bad weight '" + field + "'");
  return w;
}

}  // namespace

Lattice read_lattice(std::istream& in, SymbolTable& symbols) {
  Lattice lat;
  bool have_start = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_tokens(line);
    // A field starting with '#' opens a comment running to the end of the line.
    auto comment = std::find_if(fields.begin(), fields.end(), [](const std::string& f) { return f[0] == '#'; });
    fields.erase(comment, fields.end());
    if (fields.empty()) continue;
    const StateId src = parse_state(fields[0], lineno);
    if (!have_start) {
      lat.set_start(src);
      have_start = true;
    }
    switch (fields.size()) {
      case 1:
        lat.set_final(src, 0.0);
        break;
      case 2:
        lat.set_final(src, parse_weight(fields[1], lineno));
        break;
      case 3:
      case 4: {
        const StateId dst = parse_state(fields[1], lineno);
        TokenId label = 0;
        try {
          label = symbols.intern(fields[2]);
        } catch (const DataError& e) {
          fail(lineno, e.what());
        }
        if (label == kEpsilon) fail(lineno, "epsilon label not allowed");
        lat.add_arc(src, dst, label, fields.size() == 4 ? parse_weight(fields[3], lineno) : 0.0);
        break;
      }
      default:
        fail(lineno, "expected 'src dst token weight' or 'state weight', got " +
                         std::to_string(fields.size()) + " fields");
    }
  }
  if (lat.arcs().empty()) throw DataError("no arcs");
  validate(lat);
  return lat;
}

Lattice read_lattice_string(std::string_view text, SymbolTable& symbols) {
  std::istringstream in{std::string(text)};
  return read_lattice(in, symbols);
}

Lattice read_lattice_file(const std::string& path, SymbolTable& symbols) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lattice file " + path);
  try {
    return read_lattice(in, symbols);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string format_weight(double w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", w);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

void write_lattice(std::ostream& out, const Lattice& lat, const SymbolTable& symbols) {
  validate(lat);
  auto arc_line = [&](const Arc& a) {
    out << a.src << ' ' << a.dst << ' ' << symbols.symbol(a.label) << ' ' << format_weight(a.weight) << '\n';
  };
  // The reader takes the first mentioned state as start.
  const auto start_arcs = lat.out_arcs(lat.start());
  if (start_arcs.empty()) out << lat.start() << ' ' << format_weight(lat.final_weight(lat.start())) << '\n';
  for (auto ai : start_arcs) arc_line(lat.arc(ai));
  for (const auto& a : lat.arcs())
    if (a.src != lat.start()) arc_line(a);
  for (const auto& [s, w] : lat.finals()) out << s << ' ' << format_weight(w) << '\n';
}

std::string write_lattice_string(const Lattice& lat, const SymbolTable& symbols) {
  std::ostringstream out;
  write_lattice(out, lat, symbols);
  return out.str();
}

std::uint64_t lattice_hash(const Lattice& lat, const SymbolTable& symbols) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : write_lattice_string(lat, symbols)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace lmbr
