#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "pbgopt/assembly.hpp"
#include "pbgopt/conic.hpp"
#include "pbgopt/lattice.hpp"
#include "pbgopt/subspace.hpp"

namespace pbg {

/// constant + sum_i x_i coeffs[i] >= 0 in the Loewner order.
using AffineLmi = conic::PsdBlock;

/// maximize (c.x) / (d.x) subject to affine LMIs and per-variable bounds.
///
/// When built from reduced blocks the first n_eps entries are design variables
/// (1/eps for TE, eps for TM) and the last two carry the eigenvalue bounds
/// (lambda_l, lambda_u for TE, 1/lambda_l, 1/lambda_u for TM).
struct FractionalSdp {
  Eigen::VectorXd numerator;
  Eigen::VectorXd denominator;
  std::vector<AffineLmi> lmis;
  Eigen::VectorXd lower;  // -inf allowed
  Eigen::VectorXd upper;  // +inf allowed

  Eigen::Index size() const { return numerator.size(); }
  double value(const Eigen::VectorXd& x) const;
};

/// Homogenized form over (w, theta); theta is the last variable of `problem`.
/// maximize c.w  s.t.  theta F0 + sum w_i F_i >= 0,  theta l <= w <= theta u,
///                     theta >= 0,  d.w = 1.
struct LinearSdp {
  conic::Problem problem;
  Eigen::Index n_x = 0;
};

/// Throws InvalidArgument for non-positive bounds or floor.
FractionalSdp build_fractional(const ReducedBlocks& blocks, const MaterialBounds& bounds,
                               double floor);

/// Decision vector of the fractional problem at a design with the given band edges.
Eigen::VectorXd fractional_point(Polarization pol, const Eigen::VectorXd& eps,
                                 double lambda_lower, double lambda_upper);

LinearSdp charnes_cooper(const FractionalSdp& fsdp);

/// (x / d.x, 1 / d.x); the objective value carries over unchanged.
Eigen::VectorXd transport(const FractionalSdp& fsdp, const Eigen::VectorXd& x);

struct SdpSolution {
  conic::Status status = conic::Status::numerical_failure;
  Eigen::VectorXd w;
  double theta = 0.0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

SdpSolution solve_sdp(const LinearSdp& lsdp, const conic::Options& options = {});

struct Recovered {
  Eigen::VectorXd x;  // w / theta
  DielectricDesign design;
  double lambda_lower = 0.0;
  double lambda_upper = 0.0;
  double gap_midgap = 0.0;
  double clamp = 0.0;  // largest |eps_clamped - eps_raw|
  double bound_violation = 0.0;  // largest excursion of raw design variables outside their box
};

/// Throws DegenerateSolution when theta <= theta_floor and InvalidArgument when the
/// status is neither optimal nor near-optimal.
Recovered recover(const SdpSolution& sol, Polarization pol, const MaterialBounds& bounds,
                  double theta_floor = 1e-12);

/// SDPA sparse format (minimize -objective; equalities as paired LP rows) preceded by
/// comment lines describing the variable layout.
void write_sdp_dump(std::ostream& out, const LinearSdp& lsdp);

}  // namespace pbg
