// ctlsat — decide CTL* satisfiability, run the benchmark families, and
// inspect hue enumerations.  Exit codes for `solve`: 0 sat, 1 unsat,
// 2 unknown, 3 usage or parse error.

#include <ctlstar/bench.hpp>
#include <ctlstar/modelio.hpp>
#include <ctlstar/search.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using ctlstar::FormulaId;
using ctlstar::FormulaTable;
using ctlstar::SearchConfig;
using ctlstar::Verdict;

struct Options {
  std::string formula;
  std::string file;
  std::string mode = "bounded";
  std::size_t branch_bound = 50;
  std::size_t node_bound = 20000;
  std::size_t hue_cap = ctlstar::kDefaultHuePairCap;
  long timeout_ms = 0;
  bool rep_cut = false;
  bool assume_bound_sufficient = false;
  std::vector<std::string> emit_model;  // format [path]
  std::string emit_tableau;
  bool stats = false;
  std::uint64_t seed = 0;
  // bench only
  int series = 0;
  int max_i = 1;
  std::string csv;
  // hues only
  bool members = false;
};

void add_search_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--mode", o.mode, "search mode")
      ->check(CLI::IsMember({"bounded", "complete"}));
  cmd->add_option("--branch-bound", o.branch_bound, "max tree depth");
  cmd->add_option("--node-bound", o.node_bound, "max nodes created");
  cmd->add_option("--hue-cap", o.hue_cap, "max negation pairs enumerated");
  cmd->add_option("--timeout-ms", o.timeout_ms, "per-solve timeout (0 = off)");
  cmd->add_flag("--rep-cut", o.rep_cut, "conservative repetition cut");
  cmd->add_flag("--assume-bound-sufficient", o.assume_bound_sufficient,
                "treat bound cuts as exhaustive");
  cmd->add_flag("--stats", o.stats, "print solver statistics");
  cmd->add_option("--seed", o.seed, "shuffle alternative order (0 = off)");
}

SearchConfig to_config(const Options& o) {
  SearchConfig cfg;
  cfg.mode = o.mode == "complete" ? SearchConfig::Mode::Complete
                                  : SearchConfig::Mode::Bounded;
  cfg.branch_bound = o.branch_bound;
  cfg.node_bound = o.node_bound;
  cfg.hue_cap = o.hue_cap;
  cfg.timeout = std::chrono::milliseconds(o.timeout_ms);
  cfg.rep_cut = o.rep_cut;
  cfg.assume_bound_sufficient = o.assume_bound_sufficient;
  cfg.seed = o.seed;
  return cfg;
}

int verdict_exit(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Sat: return 0;
    case Verdict::Kind::Unsat: return 1;
    case Verdict::Kind::Unknown: return 2;
  }
  return 2;
}

void print_stats(const Verdict& v) {
  for (const auto& [key, value] : v.stats)
    std::cout << "  " << key << " = " << value << "\n";
}

// ─────────────────────────────────────────────────────────────────────────────
// solve
// ─────────────────────────────────────────────────────────────────────────────

/// Formulas come from --formula and/or --file (one per line, '#' comments).
/// With several formulas the worst exit code wins: parse > unknown > unsat
/// > sat.
int run_solve(const Options& o) {
  std::vector<std::string> texts;
  if (!o.formula.empty()) texts.push_back(o.formula);
  if (!o.file.empty()) {
    std::ifstream in(o.file);
    if (!in) {
      std::cerr << "ctlsat: cannot open " << o.file << "\n";
      return 3;
    }
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      while (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                               line.back() == '\r'))
        line.pop_back();
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      texts.push_back(line.substr(start));
    }
  }
  if (texts.empty()) {
    std::cerr << "ctlsat: no formula given (use --formula or --file)\n";
    return 3;
  }
  if (!o.emit_model.empty() &&
      (o.emit_model.size() > 2 ||
       (o.emit_model[0] != "json" && o.emit_model[0] != "dot"))) {
    std::cerr << "ctlsat: --emit-model expects json|dot [PATH]\n";
    return 3;
  }
  if ((!o.emit_model.empty() || !o.emit_tableau.empty()) && texts.size() > 1) {
    std::cerr << "ctlsat: --emit-model/--emit-tableau need a single formula\n";
    return 3;
  }

  const SearchConfig cfg = to_config(o);
  int worst = 0;
  for (const std::string& text : texts) {
    FormulaTable t;
    FormulaId f = 0;
    try {
      f = t.parse(text);
    } catch (const ctlstar::ParseError& e) {
      std::cerr << "ctlsat: parse error: " << e.what() << "\n";
      worst = 3;
      continue;
    }
    Verdict v = ctlstar::solve(t, f, cfg);
    const char* label = v.kind == Verdict::Kind::Sat     ? "SAT"
                        : v.kind == Verdict::Kind::Unsat ? "UNSAT"
                                                         : "UNKNOWN";
    std::cout << label;
    if (v.kind == Verdict::Kind::Unknown && !v.reason.empty())
      std::cout << " (" << v.reason << ")";
    if (texts.size() > 1) std::cout << "\t" << text;
    std::cout << "\n";
    if (o.stats) print_stats(v);

    if (v.kind == Verdict::Kind::Sat && !o.emit_model.empty()) {
      const std::string& fmt = o.emit_model[0];
      const std::string path =
          o.emit_model.size() > 1 ? o.emit_model[1] : "model." + fmt;
      std::ofstream out(path);
      if (!out) {
        std::cerr << "ctlsat: cannot write " << path << "\n";
        return 3;
      }
      if (fmt == "json")
        out << ctlstar::model_to_json(*v.model, 0, *v.witness).dump(2) << "\n";
      else
        ctlstar::model_to_dot(out, *v.model, 0, *v.witness);
    }
    if (v.kind == Verdict::Kind::Sat && !o.emit_tableau.empty()) {
      std::ofstream out(o.emit_tableau);
      if (!out) {
        std::cerr << "ctlsat: cannot write " << o.emit_tableau << "\n";
        return 3;
      }
      out << v.tableau_text;
    }
    worst = std::max(worst, verdict_exit(v.kind));
  }
  return worst;
}

// ─────────────────────────────────────────────────────────────────────────────
// bench
// ─────────────────────────────────────────────────────────────────────────────

int run_bench(const Options& o) {
  const SearchConfig cfg = to_config(o);
  std::ofstream file;
  if (!o.csv.empty()) {
    file.open(o.csv);
    if (!file) {
      std::cerr << "ctlsat: cannot write " << o.csv << "\n";
      return 3;
    }
  }
  std::ostream& out = o.csv.empty() ? std::cout : file;
  out << ctlstar::bench_csv_header() << "\n";
  for (int i = 1; i <= o.max_i; ++i) {
    ctlstar::BenchRow row = ctlstar::bench_run_row(o.series, i, cfg);
    ctlstar::bench_csv_row(out, row);
    out.flush();
  }
  return 0;
}

// ─────────────────────────────────────────────────────────────────────────────
// hues
// ─────────────────────────────────────────────────────────────────────────────

int run_hues(const Options& o) {
  if (o.formula.empty()) {
    std::cerr << "ctlsat: no formula given (use --formula)\n";
    return 3;
  }
  FormulaTable t;
  FormulaId f = 0;
  try {
    f = t.parse(o.formula);
  } catch (const ctlstar::ParseError& e) {
    std::cerr << "ctlsat: parse error: " << e.what() << "\n";
    return 3;
  }
  ctlstar::ClosureSet cl(t, f);
  std::cout << "|cl| = " << cl.size() << "\n";
  std::vector<ctlstar::MemberSet> hues;
  try {
    hues = ctlstar::enumerate_hues(cl, o.hue_cap);
  } catch (const ctlstar::ResourceError& e) {
    std::cerr << "ctlsat: " << e.what() << "\n";
    return 2;
  }
  const std::size_t length = t.node_count(f);
  std::cout << "hues = " << hues.size() << " (bound 2^" << length << ")\n";
  if (length < 63 && hues.size() > (std::size_t{1} << length)) {
    std::cerr << "ctlsat: hue count exceeds 2^|formula|\n";
    return 2;
  }
  if (o.members) {
    for (const ctlstar::MemberSet& h : hues) {
      std::cout << "{";
      bool first = true;
      for (std::size_t m = h.find_first(); m != ctlstar::MemberSet::npos;
           m = h.find_next(m)) {
        if (!first) std::cout << ", ";
        first = false;
        std::cout << t.render(cl.member(m));
      }
      std::cout << "}\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CTL* satisfiability via hue/colour tableau search"};
  app.require_subcommand(1);
  Options o;

  CLI::App* solve_cmd = app.add_subcommand("solve", "decide one formula");
  solve_cmd->add_option("--formula,-f", o.formula, "formula text");
  solve_cmd->add_option("--file", o.file, "file with one formula per line");
  solve_cmd
      ->add_option("--emit-model", o.emit_model,
                   "write the certified model: json|dot [PATH]")
      ->expected(1, 2);
  solve_cmd->add_option("--emit-tableau", o.emit_tableau,
                        "write the finished tableau to PATH");
  add_search_flags(solve_cmd, o);

  CLI::App* bench_cmd = app.add_subcommand("bench", "run a benchmark series");
  bench_cmd->add_option("--series", o.series, "family id")
      ->required()
      ->check(CLI::IsMember({101, 201, 301, 401}));
  bench_cmd->add_option("--max-i", o.max_i, "rows i = 1..N")->required();
  bench_cmd->add_option("--csv", o.csv, "CSV output path (default stdout)");
  add_search_flags(bench_cmd, o);

  CLI::App* hues_cmd = app.add_subcommand("hues", "enumerate hues of cl(f)");
  hues_cmd->add_option("--formula,-f", o.formula, "formula text");
  hues_cmd->add_flag("--members", o.members, "print each hue's members");
  hues_cmd->add_option("--hue-cap", o.hue_cap, "max negation pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  if (*solve_cmd) return run_solve(o);
  if (*bench_cmd) return run_bench(o);
  return run_hues(o);
}
