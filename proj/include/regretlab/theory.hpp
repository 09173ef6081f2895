#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regretlab/game.hpp"
#include "regretlab/rng.hpp"
#include "regretlab/tabular.hpp"

namespace regretlab {

/// Membership slack for argmax sets computed from exact forward-induction
/// values. The randomized instance generator keeps distinct values at least
/// 1e-7 apart, so this tolerance separates "equal" from "distinct" safely.
constexpr double kArgmaxTol = 1e-9;
constexpr double kTheoryTol = 1e-9;

// --- classification and shifts ---------------------------------------------------

enum class TabularClass : uint8_t { NonDistinguishing, Distinguishing, Neither };
std::string tabular_class_name(TabularClass cls);

struct TabularClassification {
  TabularClass cls = TabularClass::Neither;
  int64_t witness = -1;       // proxy-optimal per-level policy realizing the worst true loss
  double worst_loss = 0.0;    // max true loss over proxy-optimal policies
};

/// A level is non-distinguishing when every proxy-optimal policy is also
/// true-optimal; distinguishing at gap C when some proxy-optimal policy loses
/// more than C of true value; neither otherwise (possible only for C > 0).
TabularClassification classify_tabular(const PolicyTables& tables, int level, double gap);

/// Train/test distribution pair over classified levels: mass alpha (train) and
/// beta (test) on gap-distinguishing levels, remainder on non-distinguishing
/// ones, with 0 <= alpha < beta <= 1.
struct ShiftSpec {
  double alpha = 0.0;
  double beta = 1.0;
  double gap = 0.0;
  std::vector<double> d_train;
  std::vector<double> d_test;

  void validate(const PolicyTables& tables) const;
};

// --- value-maximization training (susceptibility) -----------------------------------

/// Policies within epsilon of the best achievable value on the distribution.
std::vector<char> mev_set(const PolicyUniverse& universe, std::span<const double> dist,
                          RewardSelector sel, double epsilon);

struct SusceptibilityReport {
  bool hypothesis_ok = false;      // shift valid and alpha <= epsilon
  bool witness_found = false;
  bool in_mev_train = false;       // witness is epsilon-value-optimal on d_train (true goal)
  bool proxy_optimal_test = false; // witness maximizes proxy value on d_test
  bool suboptimal_test = false;    // witness misses the beta*gap-optimal set on d_test
  int64_t witness = -1;            // joint policy index
  std::string note;

  bool passed() const {
    return hypothesis_ok && witness_found && in_mev_train && proxy_optimal_test &&
           suboptimal_test;
  }
};

/// Builds the proxy-following policy from the classification witnesses and
/// checks the three memberships that make value training unsafe under shift.
SusceptibilityReport verify_susceptibility(const PolicyTables& tables, const ShiftSpec& shift,
                                           double epsilon);

// --- regret game and minimax-regret sets ---------------------------------------------

struct RegretGameReport {
  GameSolution solution;
  double det_minimax = 0.0;    // min over the universe's (pure) policies of max regret
  double mixedness_gap = 0.0;  // det_minimax - mixed game value, >= 0 up to roundoff
};

RegretGameReport solve_regret_game(const PolicyUniverse& universe, double tolerance = 1e-6);

/// Policies whose worst-case per-level regret is within epsilon of the best
/// achievable by any policy in the universe.
std::vector<char> mmer1_set(const PolicyUniverse& universe, double epsilon);

struct RobustnessReport {
  int64_t checked = 0;
  int64_t members = 0;
  int64_t violations = 0;
  std::string note;

  bool passed() const { return violations == 0; }
};

/// Every epsilon-minimax-regret policy is epsilon-value-optimal on d_test.
RobustnessReport verify_transfer(const PolicyUniverse& universe, std::span<const double> d_test,
                                 double epsilon);

// --- equilibrium-style decision rules --------------------------------------------------

struct Mmer2Result {
  bool member = false;
  std::vector<double> witness;  // level distribution completing the equilibrium
};

/// Membership in the equilibrium formulation: exists a distribution d with the
/// policy an epsilon-best response to d and d a delta-best response to the
/// policy. Because regret is linear in d and the universe contains a
/// zero-regret composite policy, feasibility reduces to interval checks over
/// [min regret, max regret]; requires such a composite (throws otherwise).
Mmer2Result mmer2_membership(const PolicyUniverse& universe, int64_t policy, double epsilon,
                             double delta);

/// Adversarial map: a worst-case (up to eta) level choice per policy.
/// Point-mass maps lose no generality because expected regret is linear in
/// the level distribution.
using AdversarialMap = std::vector<int32_t>;

AdversarialMap exact_adversarial_map(const PolicyUniverse& universe);
AdversarialMap perturbed_adversarial_map(const PolicyUniverse& universe, double eta, Rng& rng);
/// Throws ValidationError unless regret(map(pi), pi) >= max regret(pi) - eta
/// for every policy.
void validate_adversarial_map(const PolicyUniverse& universe, const AdversarialMap& map,
                              double eta);
double effective_eta(const PolicyUniverse& universe, const AdversarialMap& map);

/// epsilon-argmin of regret against the mapped adversary.
std::vector<char> mmer3_set(const PolicyUniverse& universe, const AdversarialMap& map,
                            double epsilon);

struct InclusionReport {
  // In order: M1(e) in M2(e,e); M2(e,d) in M1(e+d); M1(e) in M3(e+h);
  // M3(e) in M1(e+h); M2(e,d) in M3(e+d+h); M3(e) in M2(e+h,e+h).
  std::array<bool, 6> holds{};
  bool passed() const {
    for (bool h : holds) {
      if (!h) return false;
    }
    return true;
  }
};

InclusionReport verify_equilibrium_inclusions(const PolicyUniverse& universe,
                                              const AdversarialMap& map, double epsilon,
                                              double delta, double eta);

// --- restricted policy classes ------------------------------------------------------------

double restricted_regret(const PolicyUniverse& universe, std::span<const double> dist,
                         int64_t policy);
/// min over the universe of distribution regret; zero when the universe can
/// recombine per-level optima, positive when it cannot.
double irreducible_regret(const PolicyUniverse& universe, std::span<const double> dist);

/// Distribution regret == value shortfall + irreducible regret.
bool verify_regret_decomposition(const PolicyUniverse& universe, std::span<const double> dist,
                                 int64_t policy, double tol = kTheoryTol);

/// Transfer bound for restricted universes: members of the epsilon-minimax set
/// are value-optimal on d_test up to epsilon plus the irreducible regret gap
/// (minimax regret minus irreducible regret at d_test).
RobustnessReport verify_restricted_transfer(const PolicyUniverse& universe,
                                            std::span<const double> d_test, double epsilon);

// --- necessity --------------------------------------------------------------------------

/// Biconditional: epsilon-value-optimal for every level distribution iff in
/// the epsilon-minimax-regret set. Vertex distributions decide the forall
/// side exactly; random distributions are spot checks on top.
RobustnessReport verify_necessity(const PolicyUniverse& universe, double epsilon,
                                  int n_random_dists, Rng& rng);

// --- maximin value training ---------------------------------------------------------------

double maximin_value(const PolicyUniverse& universe);
std::vector<char> mmev_set(const PolicyUniverse& universe, double epsilon);

/// Minimum per-level true value achievable by a policy scoring at least
/// alpha on that level; empty when no policy reaches alpha.
struct FloorResult {
  double value = 0.0;
  int64_t policy = -1;
};
std::optional<FloorResult> value_floor(const PolicyTables& tables, int level, double alpha);

struct MaximinReport {
  bool realizable = false;
  bool in_maximin_set = false;
  bool equality_holds = false;
  double alpha = 0.0;       // maximin value = worst-level best value
  double test_value = 0.0;  // value of the constructed policy on d_test
  double floor_value = 0.0; // expected value floor on d_test
  std::string note;

  bool passed() const { return realizable && in_maximin_set && equality_holds; }
};

/// Builds the proof policy (optimal on the adversary's support levels, value
/// floor elsewhere) and checks it is maximin-optimal yet only reaches the
/// floor on d_test.
MaximinReport verify_maximin_transfer(const PolicyTables& tables, std::span<const double> d_test);

// --- randomized instances --------------------------------------------------------------------

struct InstanceSpec {
  int min_levels = 2, max_levels = 3;
  int min_states = 2, max_states = 3;
  int min_actions = 2, max_actions = 3;
  int min_horizon = 2, max_horizon = 3;
  double value_gap = 1e-7;  // distinct per-level values must differ by at least this
  int max_attempts = 1000;

  void validate() const;
};

/// Random episodic instance with both reward channels normalized to max value
/// 1 and per-level value spectra free of near-ties (so argmax membership at
/// kArgmaxTol is unambiguous).
TabularUMDP random_instance(const InstanceSpec& spec, Rng& rng);

struct ShiftInstance {
  TabularUMDP umdp;
  PolicyTables tables;
  ShiftSpec shift;
};

/// Random instance with guaranteed shift structure: at least one level whose
/// proxy rewards equal its true rewards (non-distinguishing by construction)
/// and at least one level distinguishing at the chosen gap with margin.
ShiftInstance random_shift_instance(const InstanceSpec& spec, Rng& rng);

// --- suites ------------------------------------------------------------------------------------

struct SuiteResult {
  std::string suite;
  int instances = 0;
  int violations = 0;
  uint64_t seed = 0;
  std::vector<std::string> failures;

  bool passed() const { return violations == 0; }
};

/// Suite names: susceptibility, transfer, regret-identity, equilibria, decomposition, restricted-transfer, necessity, mmev.
SuiteResult run_theory_suite(const std::string& name, int instances, uint64_t seed);
/// "all" expands to every suite in the order above.
std::vector<SuiteResult> run_theory_suites(const std::string& name, int instances, uint64_t seed);

}  // namespace regretlab
