#include "mlcs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "mlcs/error.hpp"

namespace mlcs::solver {

double soft_threshold(double x, double tau) {
  if (tau < 0.0) throw ConfigError("threshold must be nonnegative");
  const double mag = std::abs(x) - tau;
  if (mag <= 0.0) return 0.0;
  return x < 0.0 ? -mag : mag;
}

LookStack group_threshold(const LookStack& x, double tau) {
  if (!(tau >= 0.0)) throw ConfigError("threshold must be nonnegative");
  LookStack out = x;
  kernels::group_threshold(out, tau);
  return out;
}

double l21_norm(const LookStack& x) {
  const auto norms = kernels::pixel_norms(x);
  double acc = 0.0;
  for (double v : norms) acc += v;
  return acc;
}

MultilookImage multilook_sum(const LookStack& x) {
  const auto norms = kernels::pixel_norms(x);
  return MultilookImage(x.look_shape(), norms);
}

namespace {

LookStack random_stack(std::size_t looks, Shape shape, Seed seed) {
  LookStack x(looks, shape);
  const CounterRng rng(seed, streams::power_iteration);
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < looks; ++i) {
    for (auto& z : x[i].values()) {
      const auto [a, b] = rng.normal_pair(c++);
      z = {a, b};
    }
  }
  return x;
}

void scale(LookStack& x, double s) {
  for (auto& look : x.looks())
    for (auto& z : look.values()) z *= s;
}

// a += s * b
void axpy(LookStack& a, double s, const LookStack& b) {
  for (std::size_t i = 0; i < a.look_count(); ++i) {
    auto av = a[i].values();
    const auto bv = b[i].values();
    for (std::size_t p = 0; p < av.size(); ++p) av[p] += s * bv[p];
  }
}

double distance(const LookStack& a, const LookStack& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.look_count(); ++i) {
    const auto av = a[i].values();
    const auto bv = b[i].values();
    for (std::size_t p = 0; p < av.size(); ++p) acc += std::norm(av[p] - bv[p]);
  }
  return std::sqrt(acc);
}

std::vector<cplx> residual(std::span<const cplx> y, const std::vector<cplx>& model) {
  std::vector<cplx> r(y.size());
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = y[j] - model[j];
  return r;
}

}  // namespace

StepEstimate estimate_step(const rda::SensingOperator& op, Seed seed, std::size_t iterations) {
  if (iterations == 0) throw ConfigError("estimate_step needs at least one iteration");
  LookStack v = random_stack(op.look_count(), op.look_shape(), seed);
  scale(v, 1.0 / norm(v));

  StepEstimate est;
  double sigma = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    LookStack w = op.adjoint(op.forward(v));
    const double next = inner_product(v, w).real();
    const double wn = norm(w);
    if (!(wn > 0.0)) throw Error("sensing operator annihilated the power-iteration vector");
    const bool settled = it > 0 && std::abs(next - sigma) <= 1e-6 * std::abs(next);
    sigma = next;
    scale(w, 1.0 / wn);
    v = std::move(w);
    if (settled) {
      est.converged = true;
      break;
    }
  }
  // The Rayleigh quotient approaches sigma_max^2 from below; when it has not
  // settled, take a margin but never exceed the exact bound on ||Theta G||^2.
  if (!est.converged) {
    const double bound = rda::migration_gain(op.filters());
    sigma = std::min(1.05 * sigma, bound * bound);
  }
  est.sigma_max_sq = sigma;
  est.mu = 0.99 / sigma;
  return est;
}

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
  if (mu && !(*mu > 0.0 && std::isfinite(*mu))) throw ConfigError("mu must be finite and > 0");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(rel_change_tol >= 0.0)) throw ConfigError("rel_change_tol must be >= 0");
  if (look_count < 1) throw ConfigError("look_count must be >= 1");
  if (!(divergence_factor > 1.0)) throw ConfigError("divergence_factor must exceed 1");
}

void write_trace_csv(std::ostream& os, const SolverTrace& trace) {
  os << "iteration,objective,fidelity,regularizer,rel_change,active_rows\n";
  os << std::setprecision(17);
  for (const auto& r : trace.rows) {
    os << r.iteration << ',' << r.objective << ',' << r.fidelity << ',' << r.regularizer << ','
       << r.rel_change << ',' << r.active_rows << '\n';
  }
}

namespace {

void check_inputs(const sim::CompressedData& data, const rda::RdaFilters& filters,
                  const rda::LookPlan& plan, std::size_t look_count) {
  if (!(data.full_shape == filters.shape)) {
    throw ShapeError("data grid " + to_string(data.full_shape) + " does not match filters " +
                     to_string(filters.shape));
  }
  if (plan.look_count != look_count) {
    throw ConfigError("solver configured for " + std::to_string(look_count) + " looks but the plan has " +
                      std::to_string(plan.look_count));
  }
  if (data.values.size() != data.mask.count()) {
    throw ShapeError("compressed data and mask disagree in length");
  }
  if (!all_finite(data.values)) throw ConfigError("compressed data contains non-finite values");
}

}  // namespace

Reconstruction reconstruct(const sim::CompressedData& data, const rda::RdaFilters& filters,
                           const rda::LookPlan& plan, const SolverConfig& config) {
  config.validate();
  check_inputs(data, filters, plan, config.look_count);
  const rda::SensingOperator op(filters, plan, data.mask);
  const std::span<const cplx> y = data.values;

  Reconstruction result;
  SolverTrace& trace = result.trace;
  if (config.mu) {
    trace.mu = *config.mu;
  } else {
    const auto est = estimate_step(op, config.seed);
    trace.mu = est.mu;
    trace.step_converged = est.converged;
  }
  // ISTA on ||r||^2 + lambda ||X||_21: the gradient of ||r||^2 is -2 A^H r, so
  // a step of mu on the adjoint direction pairs with threshold lambda mu / 2.
  trace.tau = config.lambda * trace.mu / 2.0;

  LookStack x = config.warm_start ? op.adjoint(y) : LookStack(op.look_count(), op.look_shape());
  auto r = residual(y, op.forward(x));

  auto record = [&](std::size_t it, double rel_change, std::size_t active) {
    TraceRow row;
    row.iteration = it;
    row.fidelity = squared_norm(r);
    row.regularizer = config.lambda * l21_norm(x);
    row.objective = row.fidelity + row.regularizer;
    row.rel_change = rel_change;
    row.active_rows = active;
    trace.rows.push_back(row);
    return row.objective;
  };

  std::size_t active0 = 0;
  for (double n : kernels::pixel_norms(x)) active0 += n > 0.0 ? 1 : 0;
  double best = record(0, 0.0, active0);

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    LookStack next = x;
    axpy(next, trace.mu, op.adjoint(r));
    const std::size_t active = kernels::group_threshold(next, trace.tau);

    const double step = distance(next, x);
    const double size = norm(next);
    double rel_change = 0.0;
    if (size > 0.0) {
      rel_change = step / size;
    } else if (step > 0.0) {
      rel_change = std::numeric_limits<double>::infinity();
    }

    x = std::move(next);
    r = residual(y, op.forward(x));
    const double objective = record(it, rel_change, active);

    if (!std::isfinite(objective) || objective > config.divergence_factor * best) {
      std::ostringstream msg;
      msg << "solver diverged at iteration " << it << ": objective " << objective
          << " exceeds " << config.divergence_factor << "x the best value " << best
          << " (step size mu = " << trace.mu << ")";
      throw DivergenceError(msg.str());
    }
    best = std::min(best, objective);
    if (rel_change < config.rel_change_tol) {
      trace.converged = true;
      break;
    }
  }
  result.looks = std::move(x);
  return result;
}

double lambda_max(const sim::CompressedData& data, const rda::RdaFilters& filters,
                  const rda::LookPlan& plan) {
  check_inputs(data, filters, plan, plan.look_count);
  const rda::SensingOperator op(filters, plan, data.mask);
  const auto norms = kernels::pixel_norms(op.adjoint(data.values));
  double peak = 0.0;
  for (double n : norms) peak = std::max(peak, n);
  return 2.0 * peak;
}

}  // namespace mlcs::solver
