#pragma once

#include "entspan/exact.hpp"
#include "entspan/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace entspan {

/// H_0 = mediator-only terms, H_1 = probe-mediator couplings + probe-local
/// terms; carries the mediator ground data the resolvent needs.
struct PerturbationSplit {
    ChainModel h0_terms;          // on the full site set, mediator support only
    ChainModel h1_terms;
    Eigen::VectorXcd ground_vector; // mediator ground state (mediator subspace)
    double e0 = 0.0;              // mediator ground energy
    double gap = 0.0;             // first mediator excitation energy
    int p0_rank = 0;              // dim of the P_0 image (4 * ground multiplicity)
    double h1_norm = 0.0;         // spectral norm of H_1, for the gap check
};

/// Builds the split and diagonalizes the mediator.  Throws when the mediator
/// ground state is degenerate within `degeneracy_tol`.  Emits a warning flag
/// (returned via h1_norm vs gap; callers decide) rather than failing when
/// ||H_1|| is not small: the perturbative condition is asymptotic.
PerturbationSplit make_perturbation_split(const ChainModel& model, ProbePair probes,
                                          std::span<const int> mediator_sites,
                                          double degeneracy_tol = kDefaultDegeneracyTol);

/// Effective probe-pair Hamiltonian coefficients in the Pauli basis:
/// H = constant + sum_i h_a[i] s_a^i + sum_i h_b[i] s_b^i
///       + sum_ij j(i,j) s_a^i s_b^j.
struct EffectiveTwoSpinHamiltonian {
    Eigen::Vector3d h_a = Eigen::Vector3d::Zero();
    Eigen::Vector3d h_b = Eigen::Vector3d::Zero();
    Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
    double constant = 0.0;
    Eigen::Vector3d order1_a = Eigen::Vector3d::Zero(); // the O(||H_1||) fields alone
    Eigen::Vector3d order1_b = Eigen::Vector3d::Zero();

    Eigen::Matrix4cd reconstruct() const;
    /// Two-site ChainModel carrying the same operator (constant dropped).
    ChainModel as_model() const;
};

/// Projects the model onto the mediator ground state to second order:
/// H_LF + <psi0|H_couple|psi0> + <psi0|H_couple Q0 (E0-H0)^-1 Q0 H_couple|psi0>,
/// with the resolvent evaluated eigenbasis-wise on the complement of the
/// ground vector.  Model sites must be exactly probes + mediator.
EffectiveTwoSpinHamiltonian second_order_effective(const ChainModel& model, ProbePair probes,
                                                   std::span<const int> mediator_sites);

/// Total first-order effective fields on the probes: bare local fields plus
/// the Pauli components of <psi0|H_couple|psi0>.  These must vanish for the
/// weak-coupling limit to retain any entanglement.
std::pair<Eigen::Vector3d, Eigen::Vector3d> first_order_fields(const ChainModel& model,
                                                               ProbePair probes,
                                                               std::span<const int> mediator_sites);

/// Probe-site field terms whose addition cancels first_order_fields; the
/// round trip (model + returned terms) has vanishing first-order fields.
std::vector<Term> cancellation_fields(const ChainModel& model, ProbePair probes,
                                      std::span<const int> mediator_sites);

struct Theorem2Params {
    Eigen::Vector3d j;  // probe-a -- mediator diagonal XYZ coupling
    Eigen::Vector3d jp; // mediator -- probe-b
    double h2z = 0.0;   // strong z-field on the mediator spin, nonzero
};

struct Theorem2Effective {
    Eigen::Vector3d jeff; // jeff[2] == 0 identically
    double h1z_eff = 0.0;
    double h3z_eff = 0.0;
};

/// Closed forms: jeff = (-Jx J'x / h, -Jy J'y / h, 0),
/// h1z = -Jz - Jx Jy / h, h3z = -J'z - J'x J'y / h.
Theorem2Effective theorem2_effective(const Theorem2Params& params);

/// Integrates out one strongly-polarized spin from a model matching the
/// closed-form template (z-field on `mediator_site`, diagonal XYZ couplings
/// to at most two partner sites); remaining terms pass through and sites
/// renumber in order.  Applying this at both strong-field sites of the
/// xy-demo chain yields its weak-coupling effective chain.
ChainModel theorem2_reduce(const ChainModel& model, int mediator_site);

struct ScalingFit {
    std::vector<double> h_values;
    std::vector<double> distances; // trace distances exact vs effective
    double slope = 0.0;
    double intercept = 0.0;
    bool fitted = false;    // false when distances sit at machine epsilon
    bool monotone = true;
};

/// Trace distance between the exact ground RDM on the retained sites and the
/// ground state of the effective model, per h; least-squares slope of
/// log(distance) against log(h).  Families matching the Theorem-2 template
/// (single mediator site) reduce via theorem2_reduce and retain everything
/// else; other families reduce via second_order_effective and retain the
/// probe pair.
ScalingFit precision_scaling(const std::function<ChainModel(double)>& model_family,
                             std::span<const double> h_values, ProbePair probes,
                             std::span<const int> mediator_sites);

} // namespace entspan
