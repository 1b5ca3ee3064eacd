#pragma once

#include "entspan/entanglement.hpp"
#include "entspan/model.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace entspan {

struct NonQuadraticError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ZeroModeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// H = (i/4) c^T A c in Majorana operators, A real antisymmetric (2n x 2n).
///
/// Convention table (0-based site l, string S_l = prod_{m<l} sigma_m^z):
///   c_{2l}   = S_l sigma_l^x          c_{2l+1} = S_l sigma_l^y
///   sigma_l^z              = -i c_{2l}   c_{2l+1}   ->  A[2l,   2l+1] = -2 h_l
///   sigma_l^x sigma_{l+1}^x = -i c_{2l+1} c_{2l+2}   ->  A[2l+1, 2l+2] = -2 Jx_l
///   sigma_l^y sigma_{l+1}^y = +i c_{2l}   c_{2l+3}   ->  A[2l,   2l+3] = +2 Jy_l
struct QuadraticModel {
    int n = 0;
    Eigen::MatrixXd a;
};

/// Antisymmetric Majorana two-point matrix m_ab = (i/2) <[c_a, c_b]> of the
/// lowest-energy Gaussian state.
struct MajoranaCovariance {
    Eigen::MatrixXd m;
};

/// <sigma_0^mu sigma_{n-1}^nu> for mu, nu in {I, x, y, z} (indices 0..3).
struct SpinCorrelators {
    double c[4][4] = {};
};

/// Maps nearest-neighbor XX / YY bonds and single-site Z fields to the
/// quadratic form; any other term is rejected with its printed form.
QuadraticModel jordan_wigner(const ChainModel& model);

/// Ground covariance via the sign function of iA.  Throws ZeroModeError when
/// the smallest single-particle energy is below `zero_mode_tol` (degenerate
/// Gaussian ground state).
MajoranaCovariance ground_covariance(const QuadraticModel& qm, double zero_mode_tol = 1e-12);

/// Covariance plus the gap from one spectral pass (the Monte Carlo path
/// wants both per sample).
std::pair<MajoranaCovariance, double> ground_covariance_with_gap(const QuadraticModel& qm,
                                                                 double zero_mode_tol = 1e-12);

/// Many-body first excitation energy: the smallest magnitude among the
/// ±eps eigenvalue pairs of A (flipping the softest mode; exact for the open
/// chains in this class, cross-validated against dense diagonalization).
double single_particle_gap(const QuadraticModel& qm, double zero_mode_tol = 1e-12);

/// Pfaffian of a real antisymmetric matrix by skew-symmetric elimination
/// with pivoting; intermediate growth is carried in a split
/// mantissa/exponent accumulator.
double pfaffian(Eigen::MatrixXd a);

struct EndToEndResult {
    TwoSpinState rho;
    SpinCorrelators correlators;
    double projection_correction = 0.0; // Frobenius norm of the PSD repair
};

/// End-to-end reduced density matrix rho_{0,n-1} assembled from Pfaffian
/// string correlators of the ground covariance; eigenvalues dipping below
/// -psd_tol are an error, inside the window they are clamped and the state
/// renormalized.
EndToEndResult end_to_end_rdm(const QuadraticModel& qm, double psd_tol = 1e-9);
EndToEndResult end_to_end_rdm(const QuadraticModel& qm, const MajoranaCovariance& cov,
                              double psd_tol = 1e-9);

SpinCorrelators end_to_end_correlators(const QuadraticModel& qm, const MajoranaCovariance& cov);

} // namespace entspan
