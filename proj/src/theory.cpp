#include "regretlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "regretlab/errors.hpp"

namespace regretlab {

namespace {

constexpr double kInclusionSlack = 1e-12;

std::vector<int64_t> proxy_argmax_policies(const PolicyTables& tables, int level) {
  std::vector<int64_t> out;
  double best = tables.max_value(RewardSelector::Proxy, level);
  for (int64_t p = 0; p < tables.per_level; ++p) {
    if (tables.value(RewardSelector::Proxy, level, p) >= best - kArgmaxTol) out.push_back(p);
  }
  return out;
}

}  // namespace

// --- classification ------------------------------------------------------------

std::string tabular_class_name(TabularClass cls) {
  switch (cls) {
    case TabularClass::NonDistinguishing: return "nd";
    case TabularClass::Distinguishing: return "d";
    case TabularClass::Neither: return "neither";
  }
  throw ContractError("unknown tabular class");
}

TabularClassification classify_tabular(const PolicyTables& tables, int level, double gap) {
  if (gap < 0.0) throw ValidationError("classification gap must be nonnegative");
  if (level < 0 || level >= tables.n_levels) throw ValidationError("level index out of range");
  TabularClassification result;
  double max_true = tables.max_value(RewardSelector::True, level);
  for (int64_t p : proxy_argmax_policies(tables, level)) {
    double loss = max_true - tables.value(RewardSelector::True, level, p);
    if (loss > result.worst_loss || result.witness < 0) {
      result.worst_loss = std::max(loss, 0.0);
      result.witness = p;
    }
  }
  if (result.worst_loss <= kArgmaxTol) {
    result.cls = TabularClass::NonDistinguishing;
  } else if (result.worst_loss > gap + kArgmaxTol) {
    result.cls = TabularClass::Distinguishing;
  } else {
    result.cls = TabularClass::Neither;
  }
  return result;
}

void ShiftSpec::validate(const PolicyTables& tables) const {
  size_t n = static_cast<size_t>(tables.n_levels);
  if (d_train.size() != n || d_test.size() != n) {
    throw ValidationError("shift distributions must cover every level");
  }
  if (!(alpha >= 0.0) || !(alpha < beta) || !(beta <= 1.0)) {
    throw ValidationError("shift needs 0 <= alpha < beta <= 1");
  }
  if (gap < 0.0) throw ValidationError("shift gap must be nonnegative");
  double train_total = 0.0, test_total = 0.0;
  double train_distinguishing = 0.0, test_distinguishing = 0.0;
  for (int l = 0; l < tables.n_levels; ++l) {
    double wt = d_train[l], we = d_test[l];
    if (wt < 0.0 || we < 0.0) throw ValidationError("shift masses must be nonnegative");
    train_total += wt;
    test_total += we;
    if (wt <= 0.0 && we <= 0.0) continue;
    TabularClassification cls = classify_tabular(tables, l, gap);
    if (cls.cls == TabularClass::Neither) {
      throw ValidationError("shift support includes a level that is neither distinguishing "
                            "nor non-distinguishing at the given gap");
    }
    if (cls.cls == TabularClass::Distinguishing) {
      train_distinguishing += wt;
      test_distinguishing += we;
    }
  }
  if (std::abs(train_total - 1.0) > 1e-12 || std::abs(test_total - 1.0) > 1e-12) {
    throw ValidationError("shift distributions must sum to 1");
  }
  if (std::abs(train_distinguishing - alpha) > 1e-9) {
    throw ValidationError("train mass on distinguishing levels does not equal alpha");
  }
  if (std::abs(test_distinguishing - beta) > 1e-9) {
    throw ValidationError("test mass on distinguishing levels does not equal beta");
  }
}

// --- susceptibility -------------------------------------------------------------

std::vector<char> mev_set(const PolicyUniverse& universe, std::span<const double> dist,
                          RewardSelector sel, double epsilon) {
  if (epsilon < 0.0) throw ValidationError("epsilon must be nonnegative");
  const std::vector<double>& values =
      sel == RewardSelector::True ? universe.v_true : universe.v_proxy;
  if (values.empty()) throw ContractError("universe lacks values for the requested reward");
  std::vector<double> policy_values(universe.n_policies, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    double v = 0.0;
    for (int l = 0; l < universe.n_levels; ++l) {
      v += dist[l] * values[static_cast<size_t>(pi) * universe.n_levels + l];
    }
    policy_values[pi] = v;
    best = std::max(best, v);
  }
  std::vector<char> mask(universe.n_policies, 0);
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    mask[pi] = policy_values[pi] >= best - epsilon ? 1 : 0;
  }
  return mask;
}

SusceptibilityReport verify_susceptibility(const PolicyTables& tables, const ShiftSpec& shift,
                                           double epsilon) {
  SusceptibilityReport report;
  try {
    shift.validate(tables);
  } catch (const ValidationError& e) {
    report.note = std::string("invalid shift: ") + e.what();
    return report;
  }
  bool normalized = true;
  for (int l = 0; l < tables.n_levels; ++l) {
    normalized = normalized && tables.max_true[l] <= 1.0 + 1e-9;
    for (int64_t p = 0; p < tables.per_level; ++p) {
      normalized = normalized && tables.value(RewardSelector::True, l, p) >= -1e-9;
    }
  }
  if (!normalized) {
    report.note = "true returns are not normalized to [0, 1]";
    return report;
  }
  if (shift.alpha > epsilon + 1e-12) {
    report.note = "hypothesis alpha <= epsilon violated";
    return report;
  }
  report.hypothesis_ok = true;

  // One per-level component each: on distinguishing levels the worst
  // proxy-optimal policy, elsewhere the best-true proxy-optimal policy.
  std::vector<int64_t> component(tables.n_levels, -1);
  for (int l = 0; l < tables.n_levels; ++l) {
    TabularClassification cls = classify_tabular(tables, l, shift.gap);
    if (cls.cls == TabularClass::Distinguishing) {
      component[l] = cls.witness;
    } else {
      double best_true = -std::numeric_limits<double>::infinity();
      for (int64_t p : proxy_argmax_policies(tables, l)) {
        double v = tables.value(RewardSelector::True, l, p);
        if (v > best_true) {
          best_true = v;
          component[l] = p;
        }
      }
    }
    if (component[l] < 0) {
      report.note = "no proxy-optimal policy found on level " + std::to_string(l);
      return report;
    }
  }
  report.witness_found = true;

  double v_train = 0.0, v_test_true = 0.0, v_test_proxy = 0.0;
  double max_train = 0.0, max_test_true = 0.0, max_test_proxy = 0.0;
  for (int l = 0; l < tables.n_levels; ++l) {
    v_train += shift.d_train[l] * tables.value(RewardSelector::True, l, component[l]);
    max_train += shift.d_train[l] * tables.max_true[l];
    v_test_true += shift.d_test[l] * tables.value(RewardSelector::True, l, component[l]);
    max_test_true += shift.d_test[l] * tables.max_true[l];
    v_test_proxy += shift.d_test[l] * tables.value(RewardSelector::Proxy, l, component[l]);
    max_test_proxy += shift.d_test[l] * tables.max_proxy[l];
  }
  report.in_mev_train = v_train >= max_train - epsilon - kTheoryTol;
  report.proxy_optimal_test = v_test_proxy >= max_test_proxy - kTheoryTol;
  report.suboptimal_test = v_test_true < max_test_true - shift.beta * shift.gap - 1e-12;

  // Joint index for reporting, when it fits.
  int64_t index = 0, stride = 1;
  bool fits = true;
  for (int l = 0; l < tables.n_levels && fits; ++l) {
    if (stride > std::numeric_limits<int64_t>::max() / tables.per_level) {
      fits = false;
      break;
    }
    index += component[l] * stride;
    stride *= tables.per_level;
  }
  report.witness = fits ? index : -1;
  return report;
}

// --- minimax regret --------------------------------------------------------------

RegretGameReport solve_regret_game(const PolicyUniverse& universe, double tolerance) {
  RegretGameReport report;
  report.det_minimax = std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    report.det_minimax = std::min(report.det_minimax, universe.max_regret(pi));
  }
  report.solution = solve_matrix_game(regret_game(universe), tolerance);
  report.mixedness_gap = report.det_minimax - report.solution.value;
  return report;
}

std::vector<char> mmer1_set(const PolicyUniverse& universe, double epsilon) {
  if (epsilon < 0.0) throw ValidationError("epsilon must be nonnegative");
  double det_minimax = std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    det_minimax = std::min(det_minimax, universe.max_regret(pi));
  }
  std::vector<char> mask(universe.n_policies, 0);
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    mask[pi] = universe.max_regret(pi) <= det_minimax + epsilon ? 1 : 0;
  }
  return mask;
}

RobustnessReport verify_transfer(const PolicyUniverse& universe, std::span<const double> d_test,
                                 double epsilon) {
  RobustnessReport report;
  std::vector<char> members = mmer1_set(universe, epsilon);
  double best = -std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    best = std::max(best, universe.distribution_value(pi, d_test));
  }
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    report.checked += 1;
    if (!members[pi]) continue;
    report.members += 1;
    if (universe.distribution_value(pi, d_test) < best - epsilon - kTheoryTol) {
      report.violations += 1;
      if (report.note.empty()) {
        report.note = "policy " + std::to_string(pi) + " misses the transfer bound";
      }
    }
  }
  return report;
}

// --- equilibrium formulations ------------------------------------------------------

namespace {

double det_minimax_of(const PolicyUniverse& universe) {
  double v = std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    v = std::min(v, universe.max_regret(pi));
  }
  return v;
}

void require_zero_regret_row(const PolicyUniverse& universe) {
  if (det_minimax_of(universe) > 1e-12) {
    throw ContractError("this operation requires a zero-regret composite policy in the universe");
  }
}

}  // namespace

Mmer2Result mmer2_membership(const PolicyUniverse& universe, int64_t policy, double epsilon,
                             double delta) {
  if (epsilon < 0.0 || delta < 0.0) throw ValidationError("thresholds must be nonnegative");
  require_zero_regret_row(universe);
  Mmer2Result result;
  double m_min = universe.min_regret(policy);
  double m_max = universe.max_regret(policy);
  // Against any fixed distribution the best response regret is 0 (composite
  // row), so the policy is an epsilon-best response to d iff Reg(d, pi) <=
  // epsilon, while d is a delta-best response iff Reg(d, pi) >= m_max - delta.
  // Reg(d, pi) sweeps the interval [m_min, m_max] as d varies, so membership
  // is a pair of interval conditions.
  result.member = m_min <= epsilon && m_max <= epsilon + delta;
  if (!result.member) return result;
  int lmin = 0, lmax = 0;
  for (int l = 1; l < universe.n_levels; ++l) {
    if (universe.regret(policy, l) < universe.regret(policy, lmin)) lmin = l;
    if (universe.regret(policy, l) > universe.regret(policy, lmax)) lmax = l;
  }
  result.witness.assign(universe.n_levels, 0.0);
  double target = std::max(m_max - delta, m_min);
  if (m_max - m_min <= 1e-15) {
    result.witness[lmax] = 1.0;
  } else {
    double w = (target - m_min) / (m_max - m_min);
    result.witness[lmax] = w;
    result.witness[lmin] += 1.0 - w;
  }
  return result;
}

AdversarialMap exact_adversarial_map(const PolicyUniverse& universe) {
  AdversarialMap map(universe.n_policies, 0);
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    int best = 0;
    for (int l = 1; l < universe.n_levels; ++l) {
      if (universe.regret(pi, l) > universe.regret(pi, best)) best = l;
    }
    map[pi] = best;
  }
  return map;
}

AdversarialMap perturbed_adversarial_map(const PolicyUniverse& universe, double eta, Rng& rng) {
  if (eta < 0.0) throw ValidationError("eta must be nonnegative");
  AdversarialMap map(universe.n_policies, 0);
  std::vector<int> near;
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    double m_max = universe.max_regret(pi);
    near.clear();
    for (int l = 0; l < universe.n_levels; ++l) {
      if (universe.regret(pi, l) >= m_max - eta) near.push_back(l);
    }
    map[pi] = near[rng.below(static_cast<uint32_t>(near.size()))];
  }
  return map;
}

double effective_eta(const PolicyUniverse& universe, const AdversarialMap& map) {
  double worst = 0.0;
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    worst = std::max(worst, universe.max_regret(pi) - universe.regret(pi, map[pi]));
  }
  return worst;
}

void validate_adversarial_map(const PolicyUniverse& universe, const AdversarialMap& map,
                              double eta) {
  if (map.size() != static_cast<size_t>(universe.n_policies)) {
    throw ValidationError("adversarial map must cover every policy");
  }
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    if (map[pi] < 0 || map[pi] >= universe.n_levels) {
      throw ValidationError("adversarial map points at a missing level");
    }
  }
  if (effective_eta(universe, map) > eta + 1e-12) {
    throw ValidationError("adversarial map is not eta-approximate");
  }
}

std::vector<char> mmer3_set(const PolicyUniverse& universe, const AdversarialMap& map,
                            double epsilon) {
  if (epsilon < 0.0) throw ValidationError("epsilon must be nonnegative");
  if (map.size() != static_cast<size_t>(universe.n_policies)) {
    throw ValidationError("adversarial map must cover every policy");
  }
  double best = std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    best = std::min(best, universe.regret(pi, map[pi]));
  }
  std::vector<char> mask(universe.n_policies, 0);
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    mask[pi] = universe.regret(pi, map[pi]) <= best + epsilon ? 1 : 0;
  }
  return mask;
}

InclusionReport verify_equilibrium_inclusions(const PolicyUniverse& universe,
                                              const AdversarialMap& map, double epsilon,
                                              double delta, double eta) {
  require_zero_regret_row(universe);
  validate_adversarial_map(universe, map, eta + 1e-12);
  const double v_det = det_minimax_of(universe);
  std::vector<double> m_max(universe.n_policies), m_min(universe.n_policies),
      mapped(universe.n_policies);
  double mapped_min = std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    m_max[pi] = universe.max_regret(pi);
    m_min[pi] = universe.min_regret(pi);
    mapped[pi] = universe.regret(pi, map[pi]);
    mapped_min = std::min(mapped_min, mapped[pi]);
  }
  auto in1 = [&](int64_t pi, double e, double slack) { return m_max[pi] <= v_det + e + slack; };
  auto in2 = [&](int64_t pi, double e, double d, double slack) {
    return m_min[pi] <= e + slack && m_max[pi] <= e + d + slack;
  };
  auto in3 = [&](int64_t pi, double e, double slack) { return mapped[pi] <= mapped_min + e + slack; };

  InclusionReport report;
  report.holds.fill(true);
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    if (in1(pi, epsilon, 0.0) && !in2(pi, epsilon, epsilon, kInclusionSlack)) {
      report.holds[0] = false;
    }
    if (in2(pi, epsilon, delta, 0.0) && !in1(pi, epsilon + delta, kInclusionSlack)) {
      report.holds[1] = false;
    }
    if (in1(pi, epsilon, 0.0) && !in3(pi, epsilon + eta, kInclusionSlack)) {
      report.holds[2] = false;
    }
    if (in3(pi, epsilon, 0.0) && !in1(pi, epsilon + eta, kInclusionSlack)) {
      report.holds[3] = false;
    }
    if (in2(pi, epsilon, delta, 0.0) && !in3(pi, epsilon + delta + eta, kInclusionSlack)) {
      report.holds[4] = false;
    }
    if (in3(pi, epsilon, 0.0) && !in2(pi, epsilon + eta, epsilon + eta, kInclusionSlack)) {
      report.holds[5] = false;
    }
  }
  return report;
}

// --- restricted policy classes ----------------------------------------------------------

double restricted_regret(const PolicyUniverse& universe, std::span<const double> dist,
                         int64_t policy) {
  return universe.distribution_regret(policy, dist);
}

double irreducible_regret(const PolicyUniverse& universe, std::span<const double> dist) {
  double best = std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    best = std::min(best, universe.distribution_regret(pi, dist));
  }
  return best;
}

bool verify_regret_decomposition(const PolicyUniverse& universe, std::span<const double> dist,
                                 int64_t policy, double tol) {
  double best_value = -std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    best_value = std::max(best_value, universe.distribution_value(pi, dist));
  }
  double lhs = universe.distribution_regret(policy, dist);
  double rhs = (best_value - universe.distribution_value(policy, dist)) +
               irreducible_regret(universe, dist);
  return std::abs(lhs - rhs) <= tol;
}

RobustnessReport verify_restricted_transfer(const PolicyUniverse& universe,
                                            std::span<const double> d_test, double epsilon) {
  RobustnessReport report;
  double v_det = det_minimax_of(universe);
  double gap = v_det - irreducible_regret(universe, d_test);
  double best = -std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    best = std::max(best, universe.distribution_value(pi, d_test));
  }
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    report.checked += 1;
    if (universe.max_regret(pi) > v_det + epsilon) continue;
    report.members += 1;
    if (universe.distribution_value(pi, d_test) < best - epsilon - gap - kTheoryTol) {
      report.violations += 1;
      if (report.note.empty()) {
        report.note = "restricted policy " + std::to_string(pi) + " misses the bound";
      }
    }
  }
  return report;
}

// --- necessity ---------------------------------------------------------------------------

RobustnessReport verify_necessity(const PolicyUniverse& universe, double epsilon,
                                  int n_random_dists, Rng& rng) {
  RobustnessReport report;
  require_zero_regret_row(universe);
  std::vector<std::vector<double>> dists;
  for (int k = 0; k < n_random_dists; ++k) {
    std::vector<double> d(universe.n_levels);
    double total = 0.0;
    for (double& w : d) {
      w = rng.uniform01() + 1e-9;
      total += w;
    }
    for (double& w : d) w /= total;
    dists.push_back(std::move(d));
  }
  std::vector<double> dist_best(dists.size(), -std::numeric_limits<double>::infinity());
  for (size_t k = 0; k < dists.size(); ++k) {
    for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
      dist_best[k] = std::max(dist_best[k], universe.distribution_value(pi, dists[k]));
    }
  }
  double v_det = det_minimax_of(universe);
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    report.checked += 1;
    bool minimax_member = universe.max_regret(pi) <= v_det + epsilon;
    bool optimal_everywhere = true;
    for (int l = 0; l < universe.n_levels; ++l) {
      if (universe.value(pi, l) < universe.max_true[l] - epsilon) {
        optimal_everywhere = false;
        break;
      }
    }
    if (minimax_member != optimal_everywhere) {
      report.violations += 1;
      if (report.note.empty()) {
        report.note = "biconditional failed for policy " + std::to_string(pi);
      }
      continue;
    }
    if (minimax_member) {
      report.members += 1;
      for (size_t k = 0; k < dists.size(); ++k) {
        if (universe.distribution_value(pi, dists[k]) < dist_best[k] - epsilon - kTheoryTol) {
          report.violations += 1;
          if (report.note.empty()) {
            report.note = "member policy " + std::to_string(pi) +
                          " not optimal on a sampled distribution";
          }
          break;
        }
      }
    } else {
      // A violating distribution must exist; the worst level is one.
      int worst = 0;
      for (int l = 1; l < universe.n_levels; ++l) {
        if (universe.regret(pi, l) > universe.regret(pi, worst)) worst = l;
      }
      if (universe.max_true[worst] - universe.value(pi, worst) <= epsilon) {
        report.violations += 1;
        if (report.note.empty()) {
          report.note = "non-member policy " + std::to_string(pi) +
                        " has no witnessing distribution";
        }
      }
    }
  }
  return report;
}

// --- maximin value -------------------------------------------------------------------------

namespace {

double min_level_value(const PolicyUniverse& universe, int64_t policy) {
  double v = std::numeric_limits<double>::infinity();
  for (int l = 0; l < universe.n_levels; ++l) v = std::min(v, universe.value(policy, l));
  return v;
}

}  // namespace

double maximin_value(const PolicyUniverse& universe) {
  double best = -std::numeric_limits<double>::infinity();
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    best = std::max(best, min_level_value(universe, pi));
  }
  return best;
}

std::vector<char> mmev_set(const PolicyUniverse& universe, double epsilon) {
  if (epsilon < 0.0) throw ValidationError("epsilon must be nonnegative");
  double best = maximin_value(universe);
  std::vector<char> mask(universe.n_policies, 0);
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    mask[pi] = min_level_value(universe, pi) >= best - epsilon ? 1 : 0;
  }
  return mask;
}

std::optional<FloorResult> value_floor(const PolicyTables& tables, int level, double alpha) {
  std::optional<FloorResult> out;
  for (int64_t p = 0; p < tables.per_level; ++p) {
    double v = tables.value(RewardSelector::True, level, p);
    if (v >= alpha - 1e-12 && (!out || v < out->value)) {
      out = FloorResult{v, p};
    }
  }
  return out;
}

MaximinReport verify_maximin_transfer(const PolicyTables& tables,
                                      std::span<const double> d_test) {
  MaximinReport report;
  // The adversary plays the levels where even the best policy scores lowest;
  // alpha is that score, which equals the maximin value by recombination.
  report.alpha = *std::min_element(tables.max_true.begin(), tables.max_true.end());
  std::vector<int64_t> component(tables.n_levels, -1);
  double worst_component_value = std::numeric_limits<double>::infinity();
  report.floor_value = 0.0;
  bool realizable = true;
  for (int l = 0; l < tables.n_levels; ++l) {
    bool on_support = tables.max_true[l] <= report.alpha + 1e-12;
    std::optional<FloorResult> floor = value_floor(tables, l, report.alpha);
    if (!floor) {
      realizable = false;
      report.note = "no policy on level " + std::to_string(l) + " reaches the maximin value";
      break;
    }
    report.floor_value += d_test[l] * floor->value;
    if (on_support) {
      int64_t best = 0;
      for (int64_t p = 1; p < tables.per_level; ++p) {
        if (tables.value(RewardSelector::True, l, p) >
            tables.value(RewardSelector::True, l, best)) {
          best = p;
        }
      }
      component[l] = best;
    } else {
      component[l] = floor->policy;
    }
    worst_component_value =
        std::min(worst_component_value, tables.value(RewardSelector::True, l, component[l]));
  }
  report.realizable = realizable;
  if (!realizable) return report;
  report.in_maximin_set = worst_component_value >= report.alpha - 1e-12;
  report.test_value = 0.0;
  for (int l = 0; l < tables.n_levels; ++l) {
    report.test_value += d_test[l] * tables.value(RewardSelector::True, l, component[l]);
  }
  report.equality_holds = std::abs(report.test_value - report.floor_value) <= kTheoryTol;
  return report;
}

// --- randomized instances ---------------------------------------------------------------------

void InstanceSpec::validate() const {
  auto range_ok = [](int lo, int hi, int cap) { return lo >= 1 && lo <= hi && hi <= cap; };
  if (!range_ok(min_levels, max_levels, 6) || !range_ok(min_states, max_states, 8) ||
      !range_ok(min_actions, max_actions, 4) || !range_ok(min_horizon, max_horizon, 8)) {
    throw ValidationError("instance size ranges out of bounds");
  }
  if (!(value_gap > 0.0)) throw ValidationError("value gap must be positive");
  if (max_attempts < 1) throw ValidationError("max_attempts must be positive");
}

namespace {

int sample_range(int lo, int hi, Rng& rng) {
  return lo + static_cast<int>(rng.below(static_cast<uint32_t>(hi - lo + 1)));
}

/// Structure plus true rewards; proxy rewards are filled per caller policy.
TabularUMDP random_structure(const InstanceSpec& spec, Rng& rng) {
  TabularUMDP u;
  u.n_levels = sample_range(spec.min_levels, spec.max_levels, rng);
  u.n_states = sample_range(spec.min_states, spec.max_states, rng);
  u.n_actions = sample_range(spec.min_actions, spec.max_actions, rng);
  u.horizon = sample_range(spec.min_horizon, spec.max_horizon, rng);
  u.gamma = 1.0;
  size_t n_init = static_cast<size_t>(u.n_levels) * u.n_states;
  size_t n_entries = n_init * u.n_actions * u.n_states;
  u.initial.assign(n_init, 0.0);
  u.transition.assign(n_entries, 0.0);
  u.reward_true.assign(n_entries, 0.0);
  u.reward_proxy.assign(n_entries, 0.0);
  for (int l = 0; l < u.n_levels; ++l) {
    u.initial[u.init_index(l, static_cast<int>(rng.below(u.n_states)))] = 1.0;
    for (int s = 0; s < u.n_states; ++s) {
      for (int a = 0; a < u.n_actions; ++a) {
        if (u.n_states == 1 || rng.bernoulli(0.5)) {
          u.transition[u.index(l, s, a, static_cast<int>(rng.below(u.n_states)))] = 1.0;
        } else {
          int s1 = static_cast<int>(rng.below(u.n_states));
          int s2 = static_cast<int>(rng.below(u.n_states));
          while (s2 == s1) s2 = static_cast<int>(rng.below(u.n_states));
          double w = 0.25 + 0.5 * rng.uniform01();
          u.transition[u.index(l, s, a, s1)] = w;
          u.transition[u.index(l, s, a, s2)] = 1.0 - w;
        }
        for (int s2 = 0; s2 < u.n_states; ++s2) {
          if (rng.bernoulli(0.35)) {
            u.reward_true[u.index(l, s, a, s2)] = rng.uniform01();
          }
        }
      }
    }
  }
  return u;
}

void fill_random_proxy(TabularUMDP& u, int level, Rng& rng) {
  for (int s = 0; s < u.n_states; ++s) {
    for (int a = 0; a < u.n_actions; ++a) {
      for (int s2 = 0; s2 < u.n_states; ++s2) {
        u.reward_proxy[u.index(level, s, a, s2)] =
            rng.bernoulli(0.35) ? rng.uniform01() : 0.0;
      }
    }
  }
}

void copy_proxy_from_true(TabularUMDP& u, int level) {
  for (int s = 0; s < u.n_states; ++s) {
    for (int a = 0; a < u.n_actions; ++a) {
      for (int s2 = 0; s2 < u.n_states; ++s2) {
        u.reward_proxy[u.index(level, s, a, s2)] = u.reward_true[u.index(level, s, a, s2)];
      }
    }
  }
}

/// Scales both reward channels so the best achievable return is 1, then
/// re-evaluates so stored tables match a fresh evaluation bit for bit.
bool normalize_rewards(TabularUMDP& u, PolicyTables& tables) {
  tables = evaluate_all_policies(u);
  double g_true = *std::max_element(tables.max_true.begin(), tables.max_true.end());
  double g_proxy = *std::max_element(tables.max_proxy.begin(), tables.max_proxy.end());
  if (g_true < 1e-6 || g_proxy < 1e-6) return false;
  for (double& r : u.reward_true) r /= g_true;
  for (double& r : u.reward_proxy) r /= g_proxy;
  tables = evaluate_all_policies(u);
  return true;
}

/// Distinct per-level values must differ by at least the spec gap; exact
/// structural ties (identical up to 1e-12) are fine, near-ties are not,
/// because argmax membership at kArgmaxTol must be unambiguous.
bool value_spectrum_clean(const PolicyTables& tables, double gap) {
  std::vector<double> values;
  for (int l = 0; l < tables.n_levels; ++l) {
    for (const std::vector<double>* channel : {&tables.v_true, &tables.v_proxy}) {
      values.clear();
      for (int64_t p = 0; p < tables.per_level; ++p) {
        values.push_back((*channel)[static_cast<size_t>(l) * tables.per_level + p]);
      }
      std::sort(values.begin(), values.end());
      for (size_t i = 1; i < values.size(); ++i) {
        double diff = values[i] - values[i - 1];
        if (diff > 1e-12 && diff < gap) return false;
      }
    }
  }
  return true;
}

}  // namespace

TabularUMDP random_instance(const InstanceSpec& spec, Rng& rng) {
  spec.validate();
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    TabularUMDP u = random_structure(spec, rng);
    for (int l = 0; l < u.n_levels; ++l) fill_random_proxy(u, l, rng);
    PolicyTables tables;
    if (!normalize_rewards(u, tables)) continue;
    if (!value_spectrum_clean(tables, spec.value_gap)) continue;
    u.validate();
    return u;
  }
  throw CapacityError("random instance generation exhausted its attempts");
}

ShiftInstance random_shift_instance(const InstanceSpec& spec, Rng& rng) {
  spec.validate();
  InstanceSpec local = spec;
  local.min_levels = std::max(2, spec.min_levels);
  local.validate();
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    TabularUMDP u = random_structure(local, rng);
    // Level 0 gets proxy == true (non-distinguishing by construction), level 1
    // a fresh proxy; remaining levels flip a coin.
    copy_proxy_from_true(u, 0);
    fill_random_proxy(u, 1, rng);
    std::vector<char> fresh(u.n_levels, 0);
    fresh[1] = 1;
    for (int l = 2; l < u.n_levels; ++l) {
      fresh[l] = rng.bernoulli(0.5) ? 1 : 0;
      if (fresh[l]) {
        fill_random_proxy(u, l, rng);
      } else {
        copy_proxy_from_true(u, l);
      }
    }
    PolicyTables tables;
    if (!normalize_rewards(u, tables)) continue;
    if (!value_spectrum_clean(tables, spec.value_gap)) continue;
    u.validate();

    // The gap is chosen from the worst proxy-optimal true losses so every
    // fresh level is distinguishing with margin.
    double min_worst_loss = std::numeric_limits<double>::infinity();
    bool fresh_ok = true;
    for (int l = 0; l < u.n_levels; ++l) {
      TabularClassification cls = classify_tabular(tables, l, 0.0);
      if (fresh[l]) {
        fresh_ok = fresh_ok && cls.cls == TabularClass::Distinguishing;
        min_worst_loss = std::min(min_worst_loss, cls.worst_loss);
      } else {
        fresh_ok = fresh_ok && cls.cls == TabularClass::NonDistinguishing;
      }
    }
    if (!fresh_ok || min_worst_loss < 1e-4) continue;
    ShiftInstance instance;
    instance.shift.gap = min_worst_loss * (0.4 + 0.4 * rng.uniform01());
    instance.shift.beta = 0.3 + 0.69 * rng.uniform01();
    instance.shift.alpha = rng.uniform01() * 0.8 * instance.shift.beta;
    int n_fresh = 0;
    for (char f : fresh) n_fresh += f;
    int n_copy = u.n_levels - n_fresh;
    instance.shift.d_train.assign(u.n_levels, 0.0);
    instance.shift.d_test.assign(u.n_levels, 0.0);
    for (int l = 0; l < u.n_levels; ++l) {
      if (fresh[l]) {
        instance.shift.d_train[l] = instance.shift.alpha / n_fresh;
        instance.shift.d_test[l] = instance.shift.beta / n_fresh;
      } else {
        instance.shift.d_train[l] = (1.0 - instance.shift.alpha) / n_copy;
        instance.shift.d_test[l] = (1.0 - instance.shift.beta) / n_copy;
      }
    }
    instance.umdp = std::move(u);
    instance.tables = std::move(tables);
    instance.shift.validate(instance.tables);
    return instance;
  }
  throw CapacityError("shift instance generation exhausted its attempts");
}

// --- suites -------------------------------------------------------------------------------------

namespace {

std::string instance_tag(int index, uint64_t seed) {
  std::ostringstream out;
  out << "instance " << index << " (seed " << seed << ")";
  return out.str();
}

std::vector<double> random_simplex(int n, Rng& rng) {
  std::vector<double> d(n);
  double total = 0.0;
  for (double& w : d) {
    w = rng.uniform01() + 1e-9;
    total += w;
  }
  for (double& w : d) w /= total;
  return d;
}

using InstanceCheck = std::function<std::string(int index, Rng& rng)>;

SuiteResult run_instances(const std::string& suite, int instances, uint64_t seed,
                          const InstanceCheck& check) {
  SuiteResult result;
  result.suite = suite;
  result.seed = seed;
  Rng root(seed);
  for (int i = 0; i < instances; ++i) {
    Rng rng = root.split(static_cast<uint64_t>(i));
    result.instances += 1;
    std::string failure;
    try {
      failure = check(i, rng);
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    if (!failure.empty()) {
      result.violations += 1;
      result.failures.push_back(instance_tag(i, seed) + ": " + failure);
    }
  }
  return result;
}

SuiteResult suite_susceptibility(int instances, uint64_t seed) {
  InstanceSpec spec;
  return run_instances("susceptibility", instances, seed, [&](int, Rng& rng) -> std::string {
    ShiftInstance si = random_shift_instance(spec, rng);
    double epsilon = si.shift.alpha + rng.uniform01() * 0.3;
    SusceptibilityReport report = verify_susceptibility(si.tables, si.shift, epsilon);
    if (!report.passed()) {
      return "susceptibility check failed (" + report.note +
             " hyp=" + std::to_string(report.hypothesis_ok) +
             " mev=" + std::to_string(report.in_mev_train) +
             " proxy=" + std::to_string(report.proxy_optimal_test) +
             " subopt=" + std::to_string(report.suboptimal_test) + ")";
    }
    return "";
  });
}

SuiteResult suite_transfer(int instances, uint64_t seed) {
  InstanceSpec spec;
  return run_instances("transfer", instances, seed, [&](int, Rng& rng) -> std::string {
    ShiftInstance si = random_shift_instance(spec, rng);
    PolicyUniverse universe = full_universe(si.tables);
    RegretGameReport game = solve_regret_game(universe);
    if (game.det_minimax > 1e-12) return "no zero-regret composite policy";
    if (std::abs(game.solution.value) > kTheoryTol) return "regret game value not zero";
    if (std::abs(game.solution.duality_gap) > 1e-6) return "duality gap above certificate bound";
    double epsilon = 0.01 + rng.uniform01() * 0.4;
    RobustnessReport r = verify_transfer(universe, si.shift.d_test, epsilon);
    if (!r.passed()) return "transfer violated on d_test: " + r.note;
    for (int k = 0; k < 2; ++k) {
      std::vector<double> d = random_simplex(universe.n_levels, rng);
      RobustnessReport rr = verify_transfer(universe, d, epsilon);
      if (!rr.passed()) return "transfer violated on a random distribution: " + rr.note;
    }
    return "";
  });
}

SuiteResult suite_regret_identity(int instances, uint64_t seed) {
  InstanceSpec spec;
  return run_instances("regret-identity", instances, seed, [&](int, Rng& rng) -> std::string {
    TabularUMDP u = random_instance(spec, rng);
    PolicyTables tables = evaluate_all_policies(u);
    PolicyUniverse universe = full_universe(tables);
    std::vector<double> d = random_simplex(tables.n_levels, rng);
    int64_t pi = static_cast<int64_t>(rng.below(static_cast<uint32_t>(universe.n_policies)));
    double best = -std::numeric_limits<double>::infinity();
    for (int64_t p = 0; p < universe.n_policies; ++p) {
      best = std::max(best, universe.distribution_value(p, d));
    }
    // Per-level regret expectation equals best-distribution-value shortfall.
    double lhs = universe.distribution_regret(pi, d);
    double rhs = best - universe.distribution_value(pi, d);
    if (std::abs(lhs - rhs) > kTheoryTol) return "regret identity violated";
    // Expectation of per-level maxima equals the enumerated joint maximum.
    double exchanged = 0.0;
    for (int l = 0; l < tables.n_levels; ++l) exchanged += d[l] * tables.max_true[l];
    if (std::abs(exchanged - best) > kTheoryTol) return "exchange identity violated";
    return "";
  });
}

SuiteResult suite_equilibria(int instances, uint64_t seed) {
  InstanceSpec spec;
  return run_instances("equilibria", instances, seed, [&](int, Rng& rng) -> std::string {
    TabularUMDP u = random_instance(spec, rng);
    PolicyTables tables = evaluate_all_policies(u);
    PolicyUniverse universe = full_universe(tables);
    RegretGameReport game = solve_regret_game(universe);
    if (std::abs(game.solution.duality_gap) > 1e-6) return "duality gap above bound";
    double epsilon = 0.01 + rng.uniform01() * 0.3;
    double delta = 0.01 + rng.uniform01() * 0.3;

    AdversarialMap exact = exact_adversarial_map(universe);
    InclusionReport with_exact = verify_equilibrium_inclusions(universe, exact, epsilon, delta, 0.0);
    if (!with_exact.passed()) return "inclusion failed with the exact adversarial map";

    double eta_target = rng.uniform01() * 0.2;
    AdversarialMap perturbed = perturbed_adversarial_map(universe, eta_target, rng);
    double eta = effective_eta(universe, perturbed);
    InclusionReport with_eta = verify_equilibrium_inclusions(universe, perturbed, epsilon, delta, eta);
    if (!with_eta.passed()) return "inclusion failed with a perturbed adversarial map";

    for (int k = 0; k < 20; ++k) {
      int64_t pi = static_cast<int64_t>(rng.below(static_cast<uint32_t>(universe.n_policies)));
      Mmer2Result r = mmer2_membership(universe, pi, epsilon, delta);
      if (r.member) {
        double reg = universe.distribution_regret(pi, r.witness);
        double total = std::accumulate(r.witness.begin(), r.witness.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-9) return "equilibrium witness is not a distribution";
        if (reg > epsilon + kTheoryTol) return "witness breaks the best-response condition";
        if (reg < universe.max_regret(pi) - delta - kTheoryTol) {
          return "witness breaks the adversary condition";
        }
      } else if (universe.min_regret(pi) <= epsilon &&
                 universe.max_regret(pi) <= epsilon + delta) {
        return "membership denied despite feasible interval";
      }
    }
    return "";
  });
}

SuiteResult suite_restricted_regret(int instances, uint64_t seed) {
  InstanceSpec spec;
  return run_instances("decomposition", instances, seed, [&](int, Rng& rng) -> std::string {
    TabularUMDP u = random_instance(spec, rng);
    PolicyTables tables = evaluate_all_policies(u);
    PolicyUniverse full = full_universe(tables);
    PolicyUniverse hidden = restricted_universe(u, hidden_level_restriction(u));
    for (int k = 0; k < 5; ++k) {
      std::vector<double> d = random_simplex(u.n_levels, rng);
      if (irreducible_regret(full, d) > 1e-12) {
        return "full universe has nonzero irreducible regret";
      }
      double irr = irreducible_regret(hidden, d);
      if (irr < -1e-12) return "negative irreducible regret";
      int64_t pi = static_cast<int64_t>(rng.below(static_cast<uint32_t>(hidden.n_policies)));
      if (!verify_regret_decomposition(hidden, d, pi)) {
        return "restricted regret decomposition violated";
      }
      int64_t pj = static_cast<int64_t>(rng.below(static_cast<uint32_t>(full.n_policies)));
      if (!verify_regret_decomposition(full, d, pj)) {
        return "full-universe regret decomposition violated";
      }
    }
    return "";
  });
}

SuiteResult suite_restricted_transfer(int instances, uint64_t seed) {
  InstanceSpec spec;
  return run_instances("restricted-transfer", instances, seed, [&](int, Rng& rng) -> std::string {
    ShiftInstance si = random_shift_instance(spec, rng);
    PolicyUniverse hidden = restricted_universe(si.umdp, hidden_level_restriction(si.umdp));
    double epsilon = rng.uniform01() * 0.3;
    RobustnessReport r = verify_restricted_transfer(hidden, si.shift.d_test, epsilon);
    if (!r.passed()) return "restricted transfer bound violated on d_test: " + r.note;
    for (int k = 0; k < 2; ++k) {
      std::vector<double> d = random_simplex(hidden.n_levels, rng);
      RobustnessReport rr = verify_restricted_transfer(hidden, d, epsilon);
      if (!rr.passed()) return "restricted transfer bound violated on a random distribution";
    }
    return "";
  });
}

SuiteResult suite_necessity(int instances, uint64_t seed) {
  InstanceSpec spec;
  return run_instances("necessity", instances, seed, [&](int, Rng& rng) -> std::string {
    TabularUMDP u = random_instance(spec, rng);
    PolicyTables tables = evaluate_all_policies(u);
    PolicyUniverse universe = full_universe(tables);
    // Keep epsilon clear of every policy's worst-case regret so membership
    // stays stable under both computation paths.
    double epsilon = 0.0;
    bool found = false;
    for (int tries = 0; tries < 64 && !found; ++tries) {
      epsilon = 0.02 + rng.uniform01() * 0.5;
      found = true;
      for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
        if (std::abs(universe.max_regret(pi) - epsilon) < 1e-9) {
          found = false;
          break;
        }
      }
    }
    if (!found) return "could not find a boundary-safe epsilon";
    RobustnessReport r = verify_necessity(universe, epsilon, 5, rng);
    if (!r.passed()) return "necessity biconditional violated: " + r.note;
    return "";
  });
}

SuiteResult suite_maximin(int instances, uint64_t seed) {
  InstanceSpec spec;
  return run_instances("mmev", instances, seed, [&](int, Rng& rng) -> std::string {
    ShiftInstance si = random_shift_instance(spec, rng);
    MaximinReport report = verify_maximin_transfer(si.tables, si.shift.d_test);
    if (!report.passed()) {
      return "maximin transfer failed (" + report.note +
             " realizable=" + std::to_string(report.realizable) +
             " member=" + std::to_string(report.in_maximin_set) +
             " equality=" + std::to_string(report.equality_holds) + ")";
    }
    PolicyUniverse universe = full_universe(si.tables);
    if (std::abs(maximin_value(universe) - report.alpha) > 1e-12) {
      return "enumerated maximin disagrees with the worst-level best value";
    }
    if (value_floor(si.tables, 0, 2.0)) {
      return "value floor above the normalized range should be empty";
    }
    return "";
  });
}

}  // namespace

SuiteResult run_theory_suite(const std::string& name, int instances, uint64_t seed) {
  if (instances < 1) throw ValidationError("suite needs at least one instance");
  if (name == "susceptibility") return suite_susceptibility(instances, seed);
  if (name == "transfer") return suite_transfer(instances, seed);
  if (name == "regret-identity") return suite_regret_identity(instances, seed);
  if (name == "equilibria") return suite_equilibria(instances, seed);
  if (name == "decomposition") return suite_restricted_regret(instances, seed);
  if (name == "restricted-transfer") return suite_restricted_transfer(instances, seed);
  if (name == "necessity") return suite_necessity(instances, seed);
  if (name == "mmev") return suite_maximin(instances, seed);
  throw ValidationError("unknown theory suite: " + name);
}

std::vector<SuiteResult> run_theory_suites(const std::string& name, int instances, uint64_t seed) {
  if (name != "all") return {run_theory_suite(name, instances, seed)};
  std::vector<SuiteResult> results;
  for (const char* suite :
       {"susceptibility", "transfer", "regret-identity", "equilibria", "decomposition", "restricted-transfer", "necessity", "mmev"}) {
    results.push_back(run_theory_suite(suite, instances, seed));
  }
  return results;
}

}  // namespace regretlab
