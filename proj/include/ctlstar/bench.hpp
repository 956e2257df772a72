#pragma once
// bench.hpp — the nested always-eventuality benchmark families and the rows
// the bench command runs: α₁ = AFGq, β₁ = AFAGq, then α_{i+1} = AFG α_i and
// β_{i+1} = AFAG β_i.  Series 101 asks α_i → β_i, 201 its negation, 301 the
// converse β_i → α_i, and 401 the negated converse (the only unsatisfiable
// family).

#include <ctlstar/formula.hpp>
#include <ctlstar/search.hpp>

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctlstar {

// ── the α/β families ─────────────────────────────────────────────────────────

inline FormulaId bench_alpha(FormulaTable& t, unsigned i) {
  FormulaId f = t.atom("q");
  for (unsigned k = 0; k < i; ++k) f = t.all(t.future(t.globally(f)));
  return f;
}

inline FormulaId bench_beta(FormulaTable& t, unsigned i) {
  FormulaId f = t.atom("q");
  for (unsigned k = 0; k < i; ++k)
    f = t.all(t.future(t.all(t.globally(f))));
  return f;
}

/// The row formula for series 101/201/301/401 at depth i.
inline FormulaId bench_formula(FormulaTable& t, unsigned series, unsigned i) {
  FormulaId a = bench_alpha(t, i);
  FormulaId b = bench_beta(t, i);
  switch (series) {
    case 101: return t.implies(a, b);
    case 201: return t.neg(t.implies(a, b));
    case 301: return t.implies(b, a);
    case 401: return t.neg(t.implies(b, a));
    default: throw std::invalid_argument("unknown bench series");
  }
}

// ── rows and CSV output ──────────────────────────────────────────────────────

struct BenchRow {
  std::string id;       ///< series id and depth, e.g. "201.3"
  std::string formula;  ///< rendered text
  std::uint64_t length = 0;  ///< core-syntax node count
  std::string verdict;  ///< sat | unsat | unknown
  double millis = 0;
  std::map<std::string, double> stats;
};

/// Runs one row under the given configuration; a per-row timeout comes back
/// as an unknown verdict rather than an abort.
inline BenchRow bench_run_row(unsigned series, unsigned i,
                              const SearchConfig& cfg) {
  FormulaTable t;
  FormulaId f = bench_formula(t, series, i);
  BenchRow row;
  row.id = std::to_string(series) + "." + std::to_string(i);
  row.formula = t.render(f);
  row.length = t.node_count(f);
  Verdict v = solve(t, f, cfg);
  switch (v.kind) {
    case Verdict::Kind::Sat: row.verdict = "sat"; break;
    case Verdict::Kind::Unsat: row.verdict = "unsat"; break;
    case Verdict::Kind::Unknown: row.verdict = "unknown"; break;
  }
  row.millis = v.stats.count("elapsed_ms") ? v.stats.at("elapsed_ms") : 0;
  row.stats = std::move(v.stats);
  return row;
}

inline const char* bench_csv_header() {
  return "id,length,verdict,millis,nodes,rules,backtracks,formula";
}

inline void bench_csv_row(std::ostream& out, const BenchRow& r) {
  auto stat = [&](const char* key) {
    auto it = r.stats.find(key);
    return it == r.stats.end() ? 0.0 : it->second;
  };
  out << r.id << ',' << r.length << ',' << r.verdict << ',' << r.millis << ','
      << stat("nodes_created") << ',' << stat("rules_applied") << ','
      << stat("backtracks") << ",\"" << r.formula << "\"\n";
}

}  // namespace ctlstar
