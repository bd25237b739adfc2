#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cfisac/config.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { kLessEqual, kEqual };

/// sum_j coeff_j x_j (<= | =) bound
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  Relation relation = Relation::kLessEqual;
  double bound = 0.0;
};

/// ||F x + g|| <= c^T x + d
struct SocConstraint {
  Mat F;
  Vec g;
  Vec c;
  double d = 0.0;
};

/// minimize x^T Q x + q^T x + constant over the constraints below.
struct ConicProblem {
  int n = 0;
  Mat Q;
  Vec q;
  double constant = 0.0;
  std::vector<LinearConstraint> linear;
  std::vector<SocConstraint> socs;
  Vec lower;
  Vec upper;

  explicit ConicProblem(int num_vars = 0);
  double objective(const Vec& x) const;
  /// Largest violation of any constraint or bound at x (0 when feasible).
  double max_violation(const Vec& x) const;
  /// Throws Error on inconsistent dimensions or an indefinite Q.
  void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure, kIterationLimit };
std::string to_string(SolveStatus s);

struct ConicSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Vec x;
  double objective_value = 0.0;
  double max_primal_residual = 0.0;
  int iterations = 0;
};

struct SolverSettings {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  double feastol_inacc = 5e-5;
  double abstol_inacc = 5e-5;
  double reltol_inacc = 5e-5;
  /// The returned point must satisfy every constraint of the original
  /// problem to this absolute tolerance, whatever the IPM tolerances say.
  double residual_tol = 1e-7;
  int max_iterations = 100;
  double gamma = 0.99;
  double regularization = 1e-11;
  int refinement_steps = 8;
};

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling.
ConicSolution solve(const ConicProblem& p, const SolverSettings& settings = {});

/// Sparse triplet dump: a header line per section (objective_Q, objective_q,
/// linear, soc k), then "row col value" lines; bounds as "col lo hi".
void dump_problem(const ConicProblem& p, std::ostream& out);

// ---------------------------------------------------------------------------
// CCP subproblem assembly

enum class SubproblemObjective { kPower, kSumSquares };

struct SubproblemOptions {
  /// When false, alpha is fixed: APs in `active_aps` are on, all others off
  /// and their amplitudes are not variables.
  bool optimize_alpha = true;
  std::vector<int> active_aps;
  bool include_sensing = true;
  bool include_penalty = true;
  bool enforce_binary_restriction = false;
  SubproblemObjective objective = SubproblemObjective::kPower;
};

/// Variable layout: x = [rho of the listed APs (U each, AP-major); alpha (K) when optimized].
struct SubproblemLayout {
  int num_aps = 0;
  int num_ues = 0;
  std::vector<int> rho_aps;
  int alpha_offset = -1;

  int num_vars() const;
  int rho_index(int ap_slot, int ue) const { return ap_slot * num_ues + ue; }
  /// State from a solution vector; alpha is 1 on listed APs and 0 elsewhere
  /// when it is not a variable.
  AllocationState unpack(const Vec& x) const;
  Vec pack(const AllocationState& s) const;
};

struct AssembledSubproblem {
  ConicProblem problem;
  SubproblemLayout layout;
};

/// Convex subproblem around `prev` (its rho is the sensing linearization
/// point, its alpha the penalty linearization point).
AssembledSubproblem assemble_subproblem(const CommStatistics& stats, const SensingForms& forms,
                                        const AllocationState& prev, const NetworkConfig& cfg,
                                        const SubproblemOptions& opts = {});

/// Per-AP cost of being on, excluding transmit power: P0 + B P_tra U R_min.
double activation_cost(const NetworkConfig& cfg, int num_ues);

/// Power model used inside the optimizer: eta ||G rho||^2 + sum_k alpha_k activation_cost.
double model_power(const AllocationState& s, const CommStatistics& stats, const NetworkConfig& cfg);

/// mu sum_k (alpha_k - alpha_k^2), the gap the CCP penalty drives to zero.
double binary_gap(const Vec& alpha, double weight);

}  // namespace cfisac
