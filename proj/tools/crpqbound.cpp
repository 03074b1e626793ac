// crpqbound: boundedness analysis and friends from the command line.
//
// Exit codes: 0 bounded / contained / member / satisfied, 1 the negative answer,
// 2 inconclusive (a cap was hit), 64 usage or input error, 70 the oracle disagreed
// with the analysis under --oracle-verify.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "crpq/crpq.hpp"

using namespace crpq;
using nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitOracle = 70;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream out;
    out << std::cin.rdbuf();
    return out.str();
  }
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct Common {
  bool json = false;
  bool no_timing = false;
  bool oracle_verify = false;
  std::vector<std::string> caps;
  std::optional<u64> seed;
};

void add_common(CLI::App* cmd, Common& c, bool with_oracle = true) {
  cmd->add_flag("--json", c.json, "Machine-readable report");
  cmd->add_flag("--no-timing", c.no_timing, "Leave wall-clock times out of the report");
  cmd->add_option("--cap", c.caps,
                  "Override a cap: N (expansions) or name=N with name in expansions, materialized_atoms, "
                  "dp_length, search_steps, candidates, cycle_sets, branch_blowup, time_ms");
  if (with_oracle) cmd->add_flag("--oracle-verify", c.oracle_verify, "Cross-check the answer with the brute-force oracles");
}

Caps parse_caps(const std::vector<std::string>& overrides) {
  Caps caps;
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    const std::string name = eq == std::string::npos ? "expansions" : item.substr(0, eq);
    const std::string value = eq == std::string::npos ? item : item.substr(eq + 1);
    u64 n = 0;
    try {
      std::size_t used = 0;
      n = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw UsageError("bad cap value '" + value + "'");
    }
    if (name == "expansions") caps.expansions = n;
    else if (name == "materialized_atoms") caps.materialized_atoms = n;
    else if (name == "dp_length") caps.dp_length = n;
    else if (name == "search_steps") caps.search_steps = n;
    else if (name == "candidates") caps.candidates = n;
    else if (name == "cycle_sets") caps.cycle_sets = n;
    else if (name == "branch_blowup") caps.branch_blowup = n;
    else if (name == "time_ms") caps.time_budget_ms = static_cast<double>(n);
    else throw UsageError("unknown cap '" + name + "'");
  }
  return caps;
}

u64 resolve_seed(const std::optional<u64>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CRPQ_BOUND_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::logic_error&) {
      throw UsageError(std::string("CRPQ_BOUND_SEED is not a number: ") + env);
    }
  }
  return 1;
}

int exit_for(Outcome o) {
  switch (o) {
    case Outcome::Bounded: return 0;
    case Outcome::Unbounded: return 1;
    case Outcome::Inconclusive: return 2;
  }
  return 2;
}

ordered_json bounds_json(const BoundsProfile& b) {
  return {{"nratoms", b.nratoms}, {"nrvars", b.nrvars}, {"N", b.N},        {"Zred", b.Zred},
          {"Zcol", b.Zcol},       {"Z", b.Z},           {"Zplus", b.Zplus}, {"Zplus_safe", b.Zplus_safe}};
}

std::string join(const std::set<Symbol>& s) {
  std::string out;
  for (const auto& a : s) out += (out.empty() ? "" : ",") + a;
  return out;
}

// ---- analyze

struct AnalyzeArgs {
  std::string file;
  std::string letters;
  bool full = false;
  std::string zplus_mode = "paper";
};

struct OracleCheck {
  std::string status = "not run";  // agree, disagree, skipped
  std::string detail;
};

OracleCheck verify_analysis(const UCRPQ& q, const AnalysisReport& r, u64 seed) {
  OracleCheck c;
  try {
    if (r.verdict == Outcome::Bounded) {
      const auto v = sampled_equivalence(q, *r.rewriting, 100, 5, seed, 4, 200);
      c.status = v.kind == Verdict::Kind::Disagree ? "disagree" : "agree";
      c.detail = std::to_string(v.random_trials) + " random graphs, " + std::to_string(v.expansion_graphs) +
                 " expansion graphs";
      if (v.instance) c.detail += "; differing graph:\n" + render_csv(*v.instance);
    } else if (r.verdict == Outcome::Unbounded) {
      // Stars left in a letter-restricted target are cut at Z too; that can only
      // weaken the check, never flag a correct witness.
      const UCRPQ target{{r.rewriting ? r.rewriting->disjuncts.at(*r.witness_disjunct)
                                      : bound_query(q, r.Z).disjuncts.at(*r.witness_disjunct)}};
      const bool contained = materialized_expansion_contained(*r.witness, target, r.Z);
      c.status = contained ? "disagree" : "agree";
      c.detail = contained ? "the witness maps from an expansion of the rewriting"
                           : "no materialized expansion of the rewriting maps into the witness";
    } else {
      c.status = "skipped";
      c.detail = "inconclusive verdict";
    }
  } catch (const CapExceeded& e) {
    c.status = "skipped";
    c.detail = e.what();
  }
  return c;
}

int cmd_analyze(const AnalyzeArgs& a, const Common& c) {
  UCRPQ q;
  try {
    q = parse_ucrpq(slurp(a.file));
  } catch (const ParseError& e) {
    throw UsageError(a.file + ": " + e.what());
  }
  AnalysisOptions opt;
  opt.caps = parse_caps(c.caps);
  opt.full_enumeration = a.full;
  if (a.zplus_mode == "paper") opt.zplus_mode = ZplusMode::Paper;
  else if (a.zplus_mode == "safe") opt.zplus_mode = ZplusMode::Safe;
  else throw UsageError("--zplus-mode must be paper or safe");
  const u64 seed = resolve_seed(c.seed);

  AnalysisReport r;
  std::optional<LetterReport> letters;
  if (a.letters.empty()) {
    r = is_bounded(q, opt);
  } else if (a.letters == "max") {
    letters = maximal_bounded_letters(q, opt);
    r = *letters->combined;
    if (letters->partial) {
      r.verdict = Outcome::Inconclusive;
      r.reason = "some letters were inconclusive; the set is an under-approximation";
    }
  } else {
    std::set<Symbol> A;
    if (a.letters == "all") {
      A = star_letters(q);
    } else {
      std::stringstream ss(a.letters);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) A.insert(item);
    }
    r = is_bounded_in(q, A, opt);
  }

  OracleCheck oracle;
  if (c.oracle_verify) oracle = verify_analysis(q, r, seed);
  const int code = oracle.status == "disagree" ? kExitOracle : exit_for(r.verdict);

  if (c.json) {
    ordered_json j;
    j["schema"] = 1;
    j["command"] = "analyze";
    j["verdict"] = to_string(r.verdict);
    if (!r.reason.empty()) j["reason"] = r.reason;
    j["bounds"] = bounds_json(r.bounds.aggregate);
    ordered_json per = ordered_json::array();
    for (const auto& b : r.bounds.per_disjunct) per.push_back(bounds_json(b));
    j["bounds_per_disjunct"] = per;
    j["Z"] = r.Z;
    j["Zplus_used"] = r.Zplus;
    if (r.rewriting) j["rewriting"] = render(*r.rewriting);
    if (r.witness) {
      j["witness"] = render(*r.witness);
      j["witness_disjunct"] = *r.witness_disjunct;
    }
    if (r.letters) j["letters"] = std::vector<std::string>(r.letters->begin(), r.letters->end());
    if (letters) {
      j["maximal_letters"] = std::vector<std::string>(letters->letters.begin(), letters->letters.end());
      ordered_json pl = ordered_json::object();
      for (const auto& [s, o] : letters->per_letter) pl[s] = to_string(o);
      j["per_letter"] = pl;
      j["partial"] = letters->partial;
    }
    ordered_json stats = {{"expansions_checked", r.stats.expansions_checked},
                          {"nfa_calls", r.stats.nfa_calls},
                          {"search_steps", r.stats.search_steps},
                          {"zplus_uncertified", r.stats.zplus_uncertified}};
    if (!c.no_timing) stats["wall_ms"] = r.wall_ms;
    stats["seed"] = seed;
    j["stats"] = stats;
    j["mode"] = {{"zplus_mode", to_string(opt.zplus_mode)},
                 {"full_enumeration", opt.full_enumeration},
                 {"letters", a.letters.empty() ? "none" : a.letters},
                 {"oracle_verify", c.oracle_verify}};
    if (c.oracle_verify) j["oracle"] = {{"status", oracle.status}, {"detail", oracle.detail}};
    std::cout << j.dump(2) << "\n";
    return code;
  }

  std::cout << "verdict: " << to_string(r.verdict) << "\n";
  if (!r.reason.empty()) std::cout << "reason: " << r.reason << "\n";
  if (r.bounds.per_disjunct.size() == 1) {
    std::cout << "bounds: " << r.bounds.aggregate.derivation(opt.zplus_mode) << "\n";
  } else {
    for (std::size_t i = 0; i < r.bounds.per_disjunct.size(); ++i)
      std::cout << "bounds[" << i << "]: " << r.bounds.per_disjunct[i].derivation(opt.zplus_mode) << "\n";
    std::cout << "shared Z = " << r.Z << "\n";
  }
  if (letters) {
    std::cout << "maximal letters: {" << join(letters->letters) << "}" << (letters->partial ? " (partial)" : "")
              << "\n";
    for (const auto& [s, o] : letters->per_letter) std::cout << "  " << s << ": " << to_string(o) << "\n";
  } else if (r.letters) {
    std::cout << "letters: {" << join(*r.letters) << "}\n";
  }
  if (r.rewriting) std::cout << "rewriting: " << render(*r.rewriting) << "\n";
  if (r.witness) std::cout << "witness: " << render(*r.witness) << "\n";
  std::cout << "stats: expansions_checked=" << r.stats.expansions_checked << " nfa_calls=" << r.stats.nfa_calls
            << " search_steps=" << r.stats.search_steps << " seed=" << seed;
  if (!c.no_timing) std::cout << " wall_ms=" << r.wall_ms;
  std::cout << "\n";
  if (c.oracle_verify) std::cout << "oracle: " << oracle.status << " (" << oracle.detail << ")\n";
  return code;
}

// ---- contains

int cmd_contains(const std::string& left_file, const std::string& right_file, const Common& c) {
  SuccinctCQ left;
  UCRPQ right;
  try {
    left = parse_succinct_cq(slurp(left_file));
    right = parse_ucrpq(slurp(right_file));
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  SearchContext ctx;
  ctx.caps = parse_caps(c.caps);
  std::string verdict;
  ContainmentWitness w;
  int code = 0;
  try {
    w = expansion_contained(left, right, ctx);
    verdict = w.contained ? "contained" : "not_contained";
    code = w.contained ? 0 : 1;
  } catch (const CapExceeded& e) {
    verdict = "inconclusive";
    code = 2;
    w.hom_text = e.what();
  }
  OracleCheck oracle;
  if (c.oracle_verify && code != 2) {
    try {
      const CQ target = materialize(left, ctx.caps.materialized_atoms);
      bool ok;
      if (w.contained) {
        ok = cq_hom(materialize(w.right_expansion, ctx.caps.materialized_atoms), target).has_value();
      } else {
        ok = !materialized_expansion_contained(left, right, target.atoms.size() + 1, ctx.caps.materialized_atoms);
      }
      oracle.status = ok ? "agree" : "disagree";
    } catch (const CapExceeded& e) {
      oracle.status = "skipped";
      oracle.detail = e.what();
    }
    if (oracle.status == "disagree") code = kExitOracle;
  }
  if (c.json) {
    ordered_json j;
    j["schema"] = 1;
    j["command"] = "contains";
    j["verdict"] = verdict;
    if (w.contained) {
      j["right_expansion"] = render(w.right_expansion);
      j["hom"] = w.hom_text;
    } else if (verdict == "inconclusive") {
      j["reason"] = w.hom_text;
    }
    if (c.oracle_verify) j["oracle"] = {{"status", oracle.status}, {"detail", oracle.detail}};
    std::cout << j.dump(2) << "\n";
    return code;
  }
  std::cout << verdict << "\n";
  if (w.contained) {
    std::cout << "right expansion: " << render(w.right_expansion) << "\n";
    std::cout << "homomorphism: " << w.hom_text << "\n";
  } else if (verdict == "inconclusive") {
    std::cout << "reason: " << w.hom_text << "\n";
  }
  if (c.oracle_verify) std::cout << "oracle: " << oracle.status << (oracle.detail.empty() ? "" : " (" + oracle.detail + ")") << "\n";
  return code;
}

// ---- member

int cmd_member(const std::string& file, const std::string& v_text, u64 m, const Common& c) {
  SuccinctNFA nfa;
  Word v;
  try {
    nfa = parse_succinct_nfa(slurp(file));
    v = parse_word(v_text);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  if (v.empty()) throw UsageError("the word v must be non-empty");
  const Caps caps = parse_caps(c.caps);
  std::string verdict;
  int code;
  try {
    const bool in = membership(nfa, v, m, caps);
    verdict = in ? "member" : "not_member";
    code = in ? 0 : 1;
  } catch (const CapExceeded& e) {
    verdict = "inconclusive";
    code = 2;
  }
  OracleCheck oracle;
  if (c.oracle_verify && code != 2) {
    try {
      oracle.status = nfa_membership_brute(nfa, v, m, caps.materialized_atoms) == (code == 0) ? "agree" : "disagree";
    } catch (const CapExceeded& e) {
      oracle.status = "skipped";
      oracle.detail = e.what();
    }
    if (oracle.status == "disagree") code = kExitOracle;
  }
  if (c.json) {
    ordered_json j = {{"schema", 1}, {"command", "member"}, {"verdict", verdict}, {"v", detail::render_word(v)}, {"m", m}};
    if (c.oracle_verify) j["oracle"] = {{"status", oracle.status}, {"detail", oracle.detail}};
    std::cout << j.dump(2) << "\n";
    return code;
  }
  std::cout << verdict << "\n";
  if (c.oracle_verify) std::cout << "oracle: " << oracle.status << (oracle.detail.empty() ? "" : " (" + oracle.detail + ")") << "\n";
  return code;
}

// ---- qbfgen

int cmd_qbfgen(const std::string& file, const std::string& emit, const Common& c) {
  QBF phi;
  try {
    phi = parse_qbf(slurp(file));
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  CRPQ q;
  if (emit == "q") q = reduction(phi);
  else if (emit == "q1") q = build_q1(phi);
  else if (emit == "q2") q = build_q2(phi);
  else throw UsageError("--emit must be q, q1 or q2");
  if (c.json) {
    ordered_json j = {{"schema", 1},
                      {"command", "qbfgen"},
                      {"emit", emit},
                      {"forall", phi.n},
                      {"exists", phi.l},
                      {"clauses", phi.clauses.size()},
                      {"query", render(q)}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << render(q) << "\n";
  }
  return 0;
}

// ---- eval

int cmd_eval(const std::string& graph_file, const std::string& query_file, const Common& c) {
  GraphDB g;
  UCRPQ q;
  try {
    g = parse_graph_csv(slurp(graph_file));
    q = parse_ucrpq(slurp(query_file));
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  std::string verdict;
  int code;
  try {
    const bool holds = eval_on_graph(q, g);
    verdict = holds ? "satisfied" : "not_satisfied";
    code = holds ? 0 : 1;
  } catch (const CapExceeded& e) {
    verdict = "inconclusive";
    code = 2;
  }
  if (c.json) {
    ordered_json j = {{"schema", 1},
                      {"command", "eval"},
                      {"verdict", verdict},
                      {"vertices", g.vertices.size()},
                      {"edges", g.edges.size()}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << verdict << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundedness analysis for unions of conjunctive regular path queries"};
  app.require_subcommand(1);
  Common common;
  std::optional<u64> seed;

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Decide boundedness and print the rewriting or a witness");
  an->add_option("file", analyze.file, "Query file ('-' for stdin)")->required();
  an->add_option("--letters", analyze.letters, "Letter-boundedness: a,b | all | max");
  an->add_flag("--full-enumeration", analyze.full, "Try every long exponent up to Z+ instead of jumping to Z+");
  an->add_option("--zplus-mode", analyze.zplus_mode, "paper or safe")->capture_default_str();
  an->add_option("--seed", seed, "Seed for oracle sampling (default: $CRPQ_BOUND_SEED, then 1)");
  add_common(an, common);

  std::string left, right;
  auto* co = app.add_subcommand("contains", "Is the succinct CQ LEFT contained in the query RIGHT?");
  co->add_option("left", left, "Succinct CQ file")->required();
  co->add_option("right", right, "Succinct CQ or star-free/star query file")->required();
  add_common(co, common);

  std::string automaton, v;
  u64 m = 0;
  auto* me = app.add_subcommand("member", "Is v^m accepted by the succinct automaton?");
  me->add_option("automaton", automaton, "Automaton file")->required();
  me->add_option("v", v, "The word v")->required();
  me->add_option("m", m, "The power m")->required();
  add_common(me, common);

  std::string qbf_file, emit = "q";
  auto* qg = app.add_subcommand("qbfgen", "Queries from a forall-exists 3-CNF formula");
  qg->add_option("file", qbf_file, "Formula file")->required();
  qg->add_option("--emit", emit, "q (q1 AND q2), q1 or q2")->capture_default_str();
  add_common(qg, common, false);

  std::string graph, query;
  auto* ev = app.add_subcommand("eval", "Evaluate a Boolean query on a graph");
  ev->add_option("--graph", graph, "Graph CSV (src,label,dst)")->required();
  ev->add_option("--query", query, "Query file")->required();
  add_common(ev, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  common.seed = seed;

  try {
    if (*an) return cmd_analyze(analyze, common);
    if (*co) return cmd_contains(left, right, common);
    if (*me) return cmd_member(automaton, v, m, common);
    if (*qg) return cmd_qbfgen(qbf_file, emit, common);
    if (*ev) return cmd_eval(graph, query, common);
  } catch (const UsageError& e) {
    std::cerr << "crpqbound: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
