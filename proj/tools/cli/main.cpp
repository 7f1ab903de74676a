#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "apfive/appower.hpp"
#include "apfive/error.hpp"
#include "apfive/sieve.hpp"

using namespace apfive;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kUnresolved = 2, kData = 3 };

struct RunConfig {
  std::string cache_dir = ".apfive-cache";
  std::vector<std::string> fixture_dirs;
  bool offline = false;
  long aux_bound = 100;
  long threshold = 10000;
  long p_max = 500;
  std::string output;
  std::string base_url = "https://www.lmfdb.org";
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
  fail(ErrorKind::Argument, "expected a boolean, got '" + v + "'");
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Argument, "config key " + key + ": expected an integer, got '" + v + "'");
}

// key = value per line, '#' starts a comment
void load_config(const std::string& path, RunConfig& rc) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IO, "cannot read config file " + path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Argument, path + ":" + std::to_string(n) + ": expected key = value");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (k == "cache_dir") rc.cache_dir = v;
    else if (k == "fixture_dir") rc.fixture_dirs.push_back(v);
    else if (k == "offline") rc.offline = parse_bool(v);
    else if (k == "aux_bound") rc.aux_bound = parse_long(k, v);
    else if (k == "threshold") rc.threshold = parse_long(k, v);
    else if (k == "p_max") rc.p_max = parse_long(k, v);
    else if (k == "output") rc.output = v;
    else if (k == "base_url") rc.base_url = v;
    else fail(ErrorKind::Argument, path + ":" + std::to_string(n) + ": unknown key '" + k + "'");
  }
}

NewformStore make_store(const RunConfig& rc) {
  StoreConfig sc;
  sc.cache_dir = rc.cache_dir;
  for (const auto& f : rc.fixture_dirs) sc.fixture_dirs.emplace_back(f);
  sc.fixture_dirs.push_back(default_fixture_dir());
  sc.offline = rc.offline;
  sc.base_url = rc.base_url;
  return NewformStore(sc);
}

json affine_map(const std::map<Prime, Affine>& m) {
  json j = json::object();
  for (const auto& [q, e] : m) j[std::to_string(q)] = e.str();
  return j;
}

json primes_json(const std::set<Prime>& s) {
  json j = json::array();
  for (auto q : s) j.push_back(q);
  return j;
}

json level_json(const LoweredLevel& L) {
  return {{"N_f", L.N_f.get_str()},
          {"factored", FactoredInteger::of(L.N_f).str()},
          {"delta", L.delta},
          {"two_rule", L.two_exponent_rule},
          {"pinned", L.pinned},
          {"stripped", primes_json(L.stripped)},
          {"additive", primes_json(L.additive)}};
}

json frey_json(const FreyCurveModel& E) {
  json disc = json::object();
  for (const auto& [k, v] : E.delta_profile) disc[k] = v.str();
  return {{"family", E.family == FreyFamily::Odd ? "odd" : "even"},
          {"slot", E.slot == Slot::A ? "A" : "B"},
          {"model", E.weierstrass},
          {"two_case", E.two_case},
          {"discriminant_valuations", disc}};
}

json equation_json(const TernaryEquation& eq) {
  return {{"display", eq.str()},
          {"A", eq.A.str()},
          {"B", eq.B.str()},
          {"C", eq.C.get_str()},
          {"c", eq.c.str()},
          {"x_exponents", affine_map(eq.x_exps)},
          {"pform_exponents", affine_map(eq.pform_exps)}};
}

// ---------------------------------------------------------------- analyze

json cmd_analyze(long d) {
  auto P = profile(d);
  json j;
  j["command"] = "analyze";
  j["d"] = d;
  j["M"] = P.M;
  j["min_exponent"] = P.min_exponent();
  j["ell3"] = P.ell3;
  j["ell5"] = P.ell5;
  j["T"] = primes_json(P.T);
  j["R"] = primes_json(P.R);
  j["Q"] = primes_json(P.Q);
  j["N_d"] = P.N.value().get_str();
  j["N_d_factored"] = P.N.str();
  json act = json::array();
  for (auto q : active_primes(P)) act.push_back(q);
  j["active_primes"] = act;
  json brs = json::array();
  for (const auto& br : kappa_branches(d)) {
    json b;
    b["branch"] = br.id();
    try {
      auto eq = build_ternary(d, br);
      b["equation"] = equation_json(eq);
      auto E = attach_frey(eq);
      b["frey"] = frey_json(E);
      b["level"] = level_json(lowered_level(E));
      b["unresolved_by_design"] = unresolved_by_design(CaseSpec{d, br, Construction::Primary, std::nullopt, {}});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Unsupported) throw;
      b["error"] = e.what();
    }
    brs.push_back(b);
  }
  j["branches"] = brs;
  return j;
}

// ---------------------------------------------------------------- eliminate

json form_json(const FormOutcome& o) {
  json j;
  j["label"] = o.label;
  j["outcome"] = o.outcome == Outcome::Eliminated ? "ELIMINATED" : "SURVIVES";
  if (o.outcome == Outcome::Eliminated) j["max_surviving_prime"] = o.max_surviving;
  else j["reason"] = o.reason;
  json sp = json::array();
  for (const auto& q : o.surviving_primes) sp.push_back(q.get_str());
  j["surviving_primes"] = sp;
  return j;
}

json report_json(const EliminationReport& r) {
  json j;
  j["case"] = r.spec.id();
  j["equation"] = r.equation;
  j["frey"] = r.frey;
  j["level"] = level_json(r.level);
  j["status"] = to_string(r.status);
  if (r.status == CaseStatus::Eliminated && r.overall_bound) j["overall_bound"] = *r.overall_bound;
  else j["overall_bound"] = "UNRESOLVED";
  if (r.overall_bound && r.status == CaseStatus::Survivors) j["bound_for_eliminated_forms"] = *r.overall_bound;
  j["survivors"] = r.survivors;
  json pf = json::array();
  for (const auto& o : r.per_form) pf.push_back(form_json(o));
  j["per_form"] = pf;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json symp_json(const SymplecticSummary& s) {
  json j;
  j["form"] = s.form;
  j["curve"] = s.curve;
  j["has_curve"] = s.has_curve;
  j["ells"] = s.ells;
  json per = json::object();
  for (const auto& [ell, r] : s.symbolic)
    per[std::to_string(ell)] = {{"type", to_string(r.type)}, {"residue", r.residue.get_str()}, {"condition", r.condition}};
  j["per_ell"] = per;
  j["condition"] = s.condition;
  j["surviving_p"] = s.surviving_p;
  return j;
}

struct BranchRun {
  KappaBranch branch;
  std::optional<BranchReport> rep;
  std::string error;
  ErrorKind kind = ErrorKind::IO;
};

// "2 ∤ x" style statement implied by the branches that were eliminated
std::string conclusion(long d, const std::vector<BranchRun>& runs, long bound) {
  std::vector<const KappaBranch*> open;
  for (const auto& r : runs)
    if (!r.rep || r.rep->status != CaseStatus::Eliminated) open.push_back(&r.branch);
  std::string pb = "p > " + std::to_string(bound);
  if (open.empty()) return "no non-trivial solutions for " + pb;
  if (open.size() == runs.size()) return "no branch eliminated";
  std::vector<std::string> facts;
  for (Prime q : active_primes(profile(d))) {
    Prime v = open.front()->at(q);
    bool same = std::all_of(open.begin(), open.end(), [&](auto* b) { return b->at(q) == v; });
    if (same) facts.push_back(std::to_string(q) + (v == q ? " | x" : " does not divide x"));
  }
  if (facts.empty()) return "eliminated branches excluded for " + pb;
  std::string s;
  for (size_t k = 0; k < facts.size(); ++k) s += (k ? " and " : "") + facts[k];
  return s + " for " + pb;
}

int cmd_eliminate(const RunConfig& rc, long d, const std::string& branch_spec, bool secondary,
                  const std::string& r_support, bool symplectic, json& out) {
  auto P = profile(d);
  auto act = active_primes(P);
  std::vector<KappaBranch> branches;
  if (branch_spec.empty()) branches = kappa_branches(d);
  else branches.push_back(parse_branch(branch_spec, act));
  BranchOptions opt;
  opt.sieve.aux_bound = rc.aux_bound;
  opt.sieve.threshold = rc.threshold;
  opt.secondary = secondary;
  opt.symplectic = symplectic;
  opt.p_max = rc.p_max;
  if (!r_support.empty()) {
    std::stringstream ss(r_support);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      long q = parse_long("r-support", trim(tok));
      if (!is_prime(Int(q))) fail(ErrorKind::Argument, "r-support entry " + tok + " is not prime");
      opt.r_support.insert(q);
    }
  }
  if (secondary && opt.r_support.empty()) fail(ErrorKind::Argument, "--secondary needs --r-support");

  auto store = make_store(rc);
  std::vector<std::future<BranchRun>> fs;
  for (const auto& br : branches)
    fs.push_back(std::async(std::launch::async, [&, br] {
      BranchRun run;
      run.branch = br;
      try {
        run.rep = eliminate_branch(store, d, br, opt);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Argument || e.kind() == ErrorKind::Precondition) throw;
        run.error = e.what();
        run.kind = e.kind();
      }
      return run;
    }));
  std::vector<BranchRun> runs;
  for (auto& f : fs) runs.push_back(f.get());

  out["command"] = "eliminate";
  out["d"] = d;
  out["aux_bound"] = rc.aux_bound;
  out["threshold"] = rc.threshold;
  if (secondary) out["r_support"] = primes_json(opt.r_support);
  json arr = json::array();
  bool unresolved = false, missing = false;
  long bound = 0;
  for (const auto& run : runs) {
    json b;
    b["branch"] = run.branch.id();
    if (!run.rep) {
      missing = true;
      b["status"] = "UNAVAILABLE";
      b["error"] = run.error;
      arr.push_back(b);
      continue;
    }
    const auto& r = *run.rep;
    b["status"] = to_string(r.status);
    if (r.bound) b["bound"] = *r.bound;
    b["conclusion"] = r.conclusion;
    b["primary"] = report_json(r.primary);
    if (!r.secondary.empty()) {
      json s = json::array();
      for (const auto& e : r.secondary) s.push_back(report_json(e));
      b["secondary"] = s;
    }
    if (!r.symplectic.empty()) {
      json s = json::array();
      for (const auto& e : r.symplectic) s.push_back(symp_json(e));
      b["symplectic"] = s;
    }
    if (r.status != CaseStatus::Eliminated) unresolved = true;
    else bound = std::max(bound, r.bound.value_or(0));
    arr.push_back(b);
  }
  out["branches"] = arr;
  out["overall_bound"] = unresolved || missing ? json("UNRESOLVED") : json(bound);
  out["conclusion"] = conclusion(d, runs, bound);
  if (missing) return kData;
  return unresolved ? kUnresolved : kOk;
}

// ---------------------------------------------------------------- bound, search, fetch

json cmd_bound(long d) {
  auto P = profile(d);
  auto b = irrationality_bound(P.N.value());
  json j;
  j["command"] = "bound";
  j["d"] = d;
  j["N_d"] = b.N.get_str();
  j["mu"] = b.mu.get_str();
  j["exponent"] = b.exponent.get_str();
  j["base"] = "sqrt(" + b.base_square.get_str() + ") + 1";
  j["log10_bound"] = b.log10;
  try {
    auto c = theoremD_pipeline(d);
    j["three_adic"] = {{"applicable", true},
                      {"v3_2d_plus_1", c.v3},
                      {"ell3", c.ell3},
                      {"three_absent_from_levels", c.three_stripped},
                      {"three_divides_ab", c.three_divides_xy},
                      {"rational_forms_bound", c.rational_bound},
                      {"min_exponent", c.min_exponent},
                      {"notes", c.notes}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Precondition) throw;
    j["three_adic"] = {{"applicable", false}, {"reason", e.what()}};
  }
  return j;
}

json cmd_search(long d, long xb, long rb, const std::vector<unsigned long>& ps) {
  auto sols = search_solutions(d, xb, rb, ps);
  json j;
  j["command"] = "search";
  j["d"] = d;
  j["x_bound"] = xb;
  j["r_bound"] = rb;
  j["p"] = ps;
  json a = json::array();
  for (const auto& s : sols)
    a.push_back({{"x", s.x.get_str()}, {"r", s.r.get_str()}, {"y", s.y.get_str()}, {"p", s.p}});
  j["solutions"] = a;
  return j;
}

json cmd_fetch(const RunConfig& rc, long level) {
  auto store = make_store(rc);
  auto forms = store.fetch_newforms(level);
  json j;
  j["command"] = "fetch";
  j["level"] = level;
  j["cache_file"] = store.cache_file(level).string();
  j["count"] = forms.size();
  json fl = json::array();
  for (const auto& f : forms) fl.push_back({{"label", f.label}, {"dim", f.dim}});
  j["newforms"] = fl;
  return j;
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Argument:
    case ErrorKind::Precondition: return kUsage;
    default: return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perfect powers among quintic sums over arithmetic progressions"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig rc;
  std::string config, cache_dir, output;
  bool offline = false;
  long aux_bound = 0, threshold = 0, p_max = 0;
  app.add_option("--config", config, "key = value configuration file");
  app.add_option("--cache-dir", cache_dir, "newform cache directory");
  app.add_flag("--offline", offline, "use cache and fixtures only");
  app.add_option("--output", output, "write the JSON report here instead of stdout");

  long d = 0;
  auto* an = app.add_subcommand("analyze", "profile, branches, equations and levels for d");
  an->add_option("d", d)->required()->check(CLI::PositiveNumber);

  std::string branch, r_support;
  bool secondary = false, symplectic = false;
  auto* el = app.add_subcommand("eliminate", "run the newform sieve on every branch");
  el->add_option("d", d)->required()->check(CLI::PositiveNumber);
  el->add_option("--branch", branch, "e.g. k2=1,k5=5,k7=7");
  el->add_flag("--secondary", secondary, "also run the second ternary equation on unresolved branches");
  el->add_option("--r-support", r_support, "primes allowed to divide r, e.g. 2,5,7,13");
  el->add_flag("--symplectic", symplectic, "apply the symplectic criterion to rational survivors");
  el->add_option("--aux-bound", aux_bound, "auxiliary primes up to this bound")->check(CLI::Range(3L, 100000L));
  el->add_option("--threshold", threshold, "largest surviving prime still reported as a bound");
  el->add_option("--p-max", p_max, "range for the per-p symplectic check");

  auto* bo = app.add_subcommand("bound", "irrationality bound and the 3-adic certificate");
  bo->add_option("d", d)->required()->check(CLI::PositiveNumber);

  long xb = 0, rb = 0;
  std::string plist;
  auto* se = app.add_subcommand("search", "exhaustive search for perfect powers");
  se->add_option("d", d)->required()->check(CLI::PositiveNumber);
  se->add_option("--x", xb, "|x| bound")->required()->check(CLI::NonNegativeNumber);
  se->add_option("--r", rb, "|r| bound")->required()->check(CLI::PositiveNumber);
  se->add_option("--p", plist, "comma separated exponents")->required();

  long level = 0;
  auto* fe = app.add_subcommand("fetch", "download or load the newforms of a level into the cache");
  fe->add_option("level", level)->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc_ = app.exit(e);
    return rc_ == 0 ? kOk : kUsage;
  }

  try {
    if (!config.empty()) load_config(config, rc);
    if (!cache_dir.empty()) rc.cache_dir = cache_dir;
    if (offline) rc.offline = true;
    if (!output.empty()) rc.output = output;
    if (aux_bound) rc.aux_bound = aux_bound;
    if (threshold) rc.threshold = threshold;
    if (p_max) rc.p_max = p_max;
    if (offline_from_env()) rc.offline = true;

    json out;
    int code = kOk;
    if (*an) out = cmd_analyze(d);
    else if (*el) code = cmd_eliminate(rc, d, branch, secondary, r_support, symplectic, out);
    else if (*bo) out = cmd_bound(d);
    else if (*se) {
      std::vector<unsigned long> ps;
      std::stringstream ss(plist);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        long p = parse_long("p", trim(tok));
        if (p < 2 || !is_prime(Int(p))) fail(ErrorKind::Argument, "exponent " + tok + " is not prime");
        ps.push_back(p);
      }
      out = cmd_search(d, xb, rb, ps);
    } else if (*fe)
      out = cmd_fetch(rc, level);

    std::string text = out.dump(2) + "\n";
    if (rc.output.empty()) std::cout << text;
    else {
      std::ofstream f(rc.output, std::ios::binary | std::ios::trunc);
      if (!f || !(f << text)) fail(ErrorKind::IO, "cannot write " + rc.output);
    }
    return code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}
