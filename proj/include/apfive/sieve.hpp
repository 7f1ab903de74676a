#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apfive/frey.hpp"
#include "apfive/newforms.hpp"

namespace apfive {

enum class Outcome { Eliminated, Survives };

struct FormOutcome {
  std::string label;
  Outcome outcome = Outcome::Survives;
  Int G;                             // gcd of the congruence obstructions, 0 when nothing constrains
  std::vector<Int> surviving_primes; // prime factors of G
  long max_surviving = 0;            // 0 when no prime survives
  std::string reason;
  std::vector<long> aux_primes;      // auxiliary primes that gave a nonzero obstruction
};

struct SieveOptions {
  long aux_bound = 100;
  long threshold = 10000;
};

// auxiliary primes used for a case: l <= bound, l not dividing 2 N_d, not in the r-support
std::vector<long> auxiliary_primes(const DProfile& prof, long aux_bound, const std::set<Prime>& r_support = {});

// candidate traces of the Frey curve at l: even t with t^2 <= 4l, plus +-(l+1)
std::vector<long> trace_candidates(long ell);

FormOutcome mazur_eliminate(const Newform& f, const FreyCurveModel& E, const LoweredLevel& L, const DProfile& prof,
                            const SieveOptions& opt = {}, const std::set<Prime>& r_support = {});

struct IrrationalityBound {
  Int N;
  Int mu;
  Rat exponent;            // (N + 1) / 6
  Rat base_square;         // mu / 6, the bound is (sqrt(base_square) + 1)^exponent
  std::string log10;       // 40 significant digits
  long double log10_value = 0;
};

IrrationalityBound irrationality_bound(const Int& N);

struct TheoremDCertificate {
  long d = 0;
  long v3 = 0;       // v_3(2d+1)
  long ell3 = 0;
  bool three_stripped = false;   // 3 divides no N_f and no C on any branch
  bool three_divides_xy = false; // forced by the quintic factorization mod 3
  long rational_bound = 0;       // rational forms eliminated for p > this
  long min_exponent = 0;         // 2 M_d
  IrrationalityBound irrational;
  std::vector<std::string> notes;
};

struct ThreeAdicCheck {
  long v3 = 0;    // v_3(2d+1)
  long ell3 = 0;  // gcd(3, d(d+1))
};

// d = 1, 7 mod 9 and the two 3-adic facts it forces; throws Precondition otherwise
ThreeAdicCheck three_adic_preconditions(long d);

TheoremDCertificate theoremD_pipeline(long d);

enum class SympType { Symplectic, Antisymplectic, Conditional, Inapplicable };
std::string to_string(SympType t);

struct SympResult {
  SympType type = SympType::Inapplicable;
  Int residue;           // squarefree representative of vE * vF; the type is kronecker(residue, p)
  std::string condition; // for symbolic p
};

using DiscriminantProfile = std::map<Prime, Affine>;

// p = 0 means symbolic
SympResult symplectic_test(const DiscriminantProfile& vE, const DiscriminantProfile& vF, Prime ell, long p = 0);

struct SympCombine {
  bool eliminated = false;
  std::map<Prime, SympResult> per_ell;
};

SympCombine symplectic_combine(const DiscriminantProfile& vE, const CurveClassData& candidate,
                               const std::vector<Prime>& ells, long p);

DiscriminantProfile odd_profile(const FreyCurveModel& E);
DiscriminantProfile profile_of(const CurveClassData& c);

// ---- whole cases

struct CaseSpec {
  long d = 0;
  KappaBranch branch;
  Construction construction = Construction::Primary;
  std::optional<RTwo> r_two;
  std::set<Prime> r_support;
  std::string id() const;
};

enum class CaseStatus { Eliminated, Survivors, Unresolved, UnresolvedByDesign };
std::string to_string(CaseStatus s);

struct EliminationReport {
  CaseSpec spec;
  Int N_f;
  LoweredLevel level;
  std::string equation;
  std::string frey;
  std::vector<FormOutcome> per_form;
  CaseStatus status = CaseStatus::Unresolved;
  std::optional<long> overall_bound;  // all eliminated forms are gone for p > bound
  std::vector<std::string> survivors;
  std::string note;
};

// d = 2 with kappa_2 = 1 lands at 2^8*3*5*11*17, where the newform space is out of reach
bool unresolved_by_design(const CaseSpec& c);

EliminationReport eliminate_case(NewformStore& store, const CaseSpec& c, const SieveOptions& opt = {});

struct SymplecticSummary {
  std::string form;        // surviving newform label
  std::string curve;       // curve used for the comparison
  bool has_curve = false;  // false when no curve of the class is available locally
  std::vector<Prime> ells; // primes where both curves are multiplicative
  std::map<Prime, SympResult> symbolic;
  std::vector<long> surviving_p;  // primes in (low, p_max) not eliminated
  std::string condition;   // summary in words
};

struct BranchOptions {
  SieveOptions sieve;
  bool secondary = false;
  std::set<Prime> r_support;
  bool symplectic = false;
  long p_max = 1000;
};

struct BranchReport {
  long d = 0;
  KappaBranch branch;
  EliminationReport primary;
  std::vector<EliminationReport> secondary;
  std::vector<SymplecticSummary> symplectic;
  CaseStatus status = CaseStatus::Unresolved;
  std::optional<long> bound;  // the branch has no solutions for p > bound
  std::string conclusion;
};

// v2(r) cases that the secondary construction has to cover for a given r-support
std::vector<RTwo> secondary_two_cases(const std::set<Prime>& r_support);

BranchReport eliminate_branch(NewformStore& store, long d, const KappaBranch& branch, const BranchOptions& opt = {});

}  // namespace apfive
