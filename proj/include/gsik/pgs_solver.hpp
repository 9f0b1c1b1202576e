#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gsik/math.hpp"

namespace gsik {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Bounds {
  double lower;
  double upper;
};

/// Square system A x = b with an optional box per unknown. An empty
/// `bounds` vector means unconstrained.
struct LinearSystem {
  RowMajorMat A;
  VecX b;
  std::vector<Bounds> bounds;
  VecX x0;

  std::size_t size() const { return static_cast<std::size_t>(b.size()); }
  bool bounded() const { return !bounds.empty(); }
};

struct SolverConfig {
  int max_iterations = 20;
  double residual_tol = 1e-6;
  double delta_x_tol = 1e-9;
  double stagnation_tol = 1e-12;

  void validate() const;
};

enum class Termination { MaxIterations, ResidualBelowTol, DeltaXBelowTol, Stagnated };

std::string_view to_string(Termination t);

struct SolveReport {
  VecX x;
  int iterations = 0;
  double residual = 0.0;
  Termination termination = Termination::MaxIterations;
  /// Per unknown: sits on one of its bounds at exit.
  std::vector<bool> clamped;
  /// Strict row diagonal dominance of A (not required for convergence).
  bool diagonally_dominant = false;
};

/// min(upper, max(lower, value)).
inline double project(double value, Bounds bounds) {
  return value < bounds.lower ? bounds.lower : (value > bounds.upper ? bounds.upper : value);
}

/// One in-order pass over the unknowns, updating `x` in place with each
/// new component used immediately. When the system is bounded, every
/// component is projected right after its update. Returns ||dx||_2.
double gauss_seidel_sweep(const LinearSystem& system, VecX& x);

double residual_norm(const LinearSystem& system, const Eigen::Ref<const VecX>& x);

/// Throws on dimension mismatch, inverted bounds or a zero diagonal.
void validate_system(const LinearSystem& system);

/// Repeats sweeps from x0 until one of: the iteration cap, ||Ax - b|| below
/// residual_tol, ||dx|| below delta_x_tol, or ||dx|| unchanged from the
/// previous sweep within stagnation_tol.
SolveReport solve(const LinearSystem& system, const SolverConfig& config = {});

bool strictly_diagonally_dominant(const RowMajorMat& A);

}  // namespace gsik
