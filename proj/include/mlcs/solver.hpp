#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mlcs/grid.hpp"
#include "mlcs/mlrda.hpp"
#include "mlcs/random.hpp"
#include "mlcs/sim.hpp"

namespace mlcs::solver {

/// sgn(x) max(|x| - tau, 0)
double soft_threshold(double x, double tau);

/// Scales each pixel row (the same pixel across all looks) by max(1 - tau/||row||, 0).
/// Returns the result; zero rows stay zero.
LookStack group_threshold(const LookStack& x, double tau);

/// Sum over pixels of the cross-look Euclidean norm.
double l21_norm(const LookStack& x);

/// z = sqrt(sum_i |x_i|^2) per pixel.
MultilookImage multilook_sum(const LookStack& x);

struct StepEstimate {
  double mu = 0.0;
  double sigma_max_sq = 0.0;  // estimated ||Theta G||^2
  bool converged = false;
};

/// Power iteration on (Theta G)^H (Theta G); mu = 0.99 / sigma_max^2.
/// If the estimate has not settled (relative change > 1e-6) after `iterations`
/// sweeps, a 5% safety margin is applied and `converged` is false.
StepEstimate estimate_step(const rda::SensingOperator& op, Seed seed, std::size_t iterations = 50);

struct SolverConfig {
  double lambda = 0.0;
  std::optional<double> mu;  // empty -> estimate_step
  std::size_t max_iterations = 500;
  double rel_change_tol = 1e-6;
  std::size_t look_count = 1;
  Seed seed{};
  bool warm_start = false;
  double divergence_factor = 10.0;

  void validate() const;
};

struct TraceRow {
  std::size_t iteration = 0;
  double objective = 0.0;
  double fidelity = 0.0;
  double regularizer = 0.0;
  double rel_change = 0.0;
  std::size_t active_rows = 0;
};

struct SolverTrace {
  std::vector<TraceRow> rows;  // row 0 is the starting point
  double mu = 0.0;
  double tau = 0.0;
  bool step_converged = true;
  bool converged = false;  // stopped on rel_change_tol

  std::size_t iterations() const { return rows.empty() ? 0 : rows.size() - 1; }
};

void write_trace_csv(std::ostream& os, const SolverTrace& trace);

class DivergenceError : public Error {
 public:
  using Error::Error;
};

struct Reconstruction {
  LookStack looks;
  SolverTrace trace;
};

/// Iterative group thresholding for
///   min_X ||y_s - Theta G(X)||^2 + lambda ||X||_{2,1}.
Reconstruction reconstruct(const sim::CompressedData& data, const rda::RdaFilters& filters,
                           const rda::LookPlan& plan, const SolverConfig& config);

/// Smallest lambda for which X = 0 is optimal: 2 max_j ||((Theta G)^H y_s)^j||.
double lambda_max(const sim::CompressedData& data, const rda::RdaFilters& filters,
                  const rda::LookPlan& plan);

}  // namespace mlcs::solver
