#include "gsik/pgs_solver.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "gsik/error.hpp"
#include "gsik/log.hpp"

namespace gsik {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::MaxIterations: return "max_iterations";
    case Termination::ResidualBelowTol: return "residual_below_tol";
    case Termination::DeltaXBelowTol: return "delta_x_below_tol";
    case Termination::Stagnated: return "stagnated";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(residual_tol > 0) || !(delta_x_tol > 0) || !(stagnation_tol > 0)) {
    throw Error(ErrorCode::InvalidArgument, "solver tolerances must be positive");
  }
}

void validate_system(const LinearSystem& s) {
  const auto n = s.b.size();
  if (s.A.rows() != n || s.A.cols() != n) {
    throw Error(ErrorCode::Dimension, "A is " + std::to_string(s.A.rows()) + "x" +
                                          std::to_string(s.A.cols()) + " but b has " +
                                          std::to_string(n) + " entries");
  }
  if (s.x0.size() != n) {
    throw Error(ErrorCode::Dimension, "x0 has " + std::to_string(s.x0.size()) + " entries, expected " +
                                          std::to_string(n));
  }
  if (s.bounded()) {
    if (static_cast<Eigen::Index>(s.bounds.size()) != n) {
      throw Error(ErrorCode::Dimension, "bounds has " + std::to_string(s.bounds.size()) +
                                            " entries, expected " + std::to_string(n));
    }
    for (std::size_t i = 0; i < s.bounds.size(); ++i) {
      if (!(s.bounds[i].lower <= s.bounds[i].upper)) {
        throw Error(ErrorCode::InvalidArgument, "bounds[" + std::to_string(i) + "] has lower > upper");
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.A(i, i) == 0.0) {
      throw Error(ErrorCode::SingularDiagonal, "A(" + std::to_string(i) + "," + std::to_string(i) + ") is zero");
    }
  }
}

double gauss_seidel_sweep(const LinearSystem& system, VecX& x) {
  const auto n = system.b.size();
  const bool bounded = system.bounded();
  double delta_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double aii = system.A(i, i);
    if (aii == 0.0) {
      throw Error(ErrorCode::SingularDiagonal, "A(" + std::to_string(i) + "," + std::to_string(i) + ") is zero");
    }
    // Row i against the current x, which already holds this sweep's updates
    // for j < i. The sum includes j == i, so dx is a correction to x_i.
    const double dx = (system.b[i] - system.A.row(i).dot(x)) / aii;
    double xi = x[i] + dx;
    if (bounded) xi = project(xi, system.bounds[static_cast<std::size_t>(i)]);
    const double applied = xi - x[i];
    x[i] = xi;
    delta_sq += applied * applied;
  }
  return std::sqrt(delta_sq);
}

double residual_norm(const LinearSystem& system, const Eigen::Ref<const VecX>& x) {
  return (system.A * x - system.b).norm();
}

bool strictly_diagonally_dominant(const RowMajorMat& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double diag = std::abs(A(i, i));
    if (!(diag > A.row(i).cwiseAbs().sum() - diag)) return false;
  }
  return true;
}

SolveReport solve(const LinearSystem& system, const SolverConfig& config) {
  config.validate();
  validate_system(system);

  SolveReport report;
  report.diagonally_dominant = strictly_diagonally_dominant(system.A);
  if (!report.diagonally_dominant) {
    // Warn once; damped normal equations are rarely dominant and still
    // converge because they are positive definite.
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      logger()->warn("Gauss-Seidel system is not strictly diagonally dominant (n = {})", system.size());
    } else {
      logger()->debug("Gauss-Seidel system is not strictly diagonally dominant (n = {})", system.size());
    }
  }

  VecX x = system.x0;
  if (system.bounded()) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = project(x[i], system.bounds[static_cast<std::size_t>(i)]);
  }

  double previous_delta = -1.0;
  for (int iter = 1;; ++iter) {
    const double delta = gauss_seidel_sweep(system, x);
    report.iterations = iter;
    report.residual = residual_norm(system, x);
    if (delta < config.delta_x_tol) {
      report.termination = Termination::DeltaXBelowTol;
      break;
    }
    if (report.residual < config.residual_tol) {
      report.termination = Termination::ResidualBelowTol;
      break;
    }
    if (previous_delta >= 0.0 && std::abs(delta - previous_delta) < config.stagnation_tol) {
      report.termination = Termination::Stagnated;
      break;
    }
    if (iter >= config.max_iterations) {
      report.termination = Termination::MaxIterations;
      break;
    }
    previous_delta = delta;
  }

  report.clamped.assign(static_cast<std::size_t>(x.size()), false);
  if (system.bounded()) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Bounds& b = system.bounds[static_cast<std::size_t>(i)];
      report.clamped[static_cast<std::size_t>(i)] = x[i] == b.lower || x[i] == b.upper;
    }
  }
  report.x = std::move(x);
  return report;
}

}  // namespace gsik
