#pragma once

#include "entspan/model.hpp"

#include <Eigen/Dense>

#include <span>
#include <stdexcept>

namespace entspan {

/// Thrown when a dense operation would exceed the configured site cap.
struct DimensionCapError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kDenseSiteCap = 14;
inline constexpr double kDefaultDegeneracyTol = 1e-9;

struct DenseOperator {
    Eigen::MatrixXcd mat;
    bool hermitian = false;

    Eigen::Index dim() const { return mat.rows(); }
};

struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXcd eigenvectors; // orthonormal columns
};

struct DensityMatrix {
    Eigen::MatrixXcd mat;

    Eigen::Index dim() const { return mat.rows(); }
    /// Hermiticity within 1e-10, unit trace within 1e-10, eigenvalues >= -1e-10.
    void validate() const;
};

struct GroundSpace {
    double energy = 0.0;
    int degeneracy = 1;
    double tol = kDefaultDegeneracyTol;
};

/// Kronecker assembly of the model's Pauli strings; site 0 is the most
/// significant qubit (basis index bit n-1).  O(terms * 2^n).
DenseOperator to_dense(const ChainModel& model, int site_cap = kDenseSiteCap);

/// Full Hermitian eigendecomposition (LAPACK zheevd behind Eigen storage).
SpectralDecomposition eigh(const DenseOperator& op);

GroundSpace ground_space(const SpectralDecomposition& s, double tol = kDefaultDegeneracyTol);

/// The beta -> infinity Gibbs state: uniform mixture over the eigenvectors
/// within `degeneracy_tol` of the lowest eigenvalue.
DensityMatrix ground_state_dm(const DenseOperator& op, double degeneracy_tol = kDefaultDegeneracyTol);
DensityMatrix ground_state_dm(const SpectralDecomposition& s, double degeneracy_tol = kDefaultDegeneracyTol);

/// exp(-beta H)/Z through the spectral decomposition; the lowest eigenvalue
/// is shifted out before exponentiation so large beta cannot overflow.
DensityMatrix gibbs(const DenseOperator& op, double beta);

/// Reduced density matrix on `keep` (order given = qubit order of the result,
/// first listed site most significant).
DensityMatrix partial_trace_keep(const DensityMatrix& dm, std::span<const int> keep);

/// E_{d+1} - E_0 with d the ground degeneracy under `degeneracy_tol`;
/// returns 0 when the whole spectrum is degenerate.
double energy_gap(const DenseOperator& op, double degeneracy_tol = kDefaultDegeneracyTol);
double energy_gap(const SpectralDecomposition& s, double degeneracy_tol = kDefaultDegeneracyTol);

/// Re tr(rho A); throws if the imaginary residue exceeds 1e-10 * scale.
double expectation(const DensityMatrix& dm, const DenseOperator& op);

/// 0.5 * ||a - b||_1 for Hermitian a, b.
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

namespace linalg {
/// In-place Hermitian eigendecomposition: `a` is replaced by the
/// eigenvectors, returns ascending eigenvalues.
Eigen::VectorXd eigh_inplace(Eigen::MatrixXcd& a);
Eigen::VectorXd eigvalsh(const Eigen::MatrixXcd& a);
const Eigen::Matrix2cd& pauli_matrix(int mu); // 0=I, 1=X, 2=Y, 3=Z
} // namespace linalg

} // namespace entspan
