#include "entspan/freefermion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace entspan {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

QuadraticModel jordan_wigner(const ChainModel& model) {
    const int n = model.n_sites;
    MatrixXd a = MatrixXd::Zero(2 * n, 2 * n);
    auto add = [&a](int r, int c, double v) {
        a(r, c) += v;
        a(c, r) -= v;
    };
    for (const auto& t : model.terms) {
        if (t.factors.size() == 1 && t.factors[0].label == Pauli::Z) {
            const int l = t.factors[0].site;
            add(2 * l, 2 * l + 1, -2.0 * t.coeff);
            continue;
        }
        if (t.factors.size() == 2 && t.factors[1].site == t.factors[0].site + 1 &&
            t.factors[0].label == t.factors[1].label &&
            (t.factors[0].label == Pauli::X || t.factors[0].label == Pauli::Y)) {
            const int l = t.factors[0].site;
            if (t.factors[0].label == Pauli::X)
                add(2 * l + 1, 2 * l + 2, -2.0 * t.coeff);
            else
                add(2 * l, 2 * l + 3, 2.0 * t.coeff);
            continue;
        }
        throw NonQuadraticError("jordan_wigner: term (" + t.to_string() +
                                ") is outside the nearest-neighbor XX/YY/Z class; "
                                "use the exact engine for this model");
    }
    return QuadraticModel{n, std::move(a)};
}

namespace {

/// Eigen-decomposition of the Hermitian matrix iA; eigenvalues come in
/// ±eps pairs.
std::pair<VectorXd, MatrixXcd> spectrum_of_ia(const MatrixXd& a) {
    MatrixXcd ia = std::complex<double>(0, 1) * a.cast<std::complex<double>>();
    VectorXd w = linalg::eigh_inplace(ia);
    return {std::move(w), std::move(ia)};
}

double min_abs_eigenvalue(const VectorXd& w) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : w) m = std::min(m, std::abs(v));
    return m;
}

} // namespace

std::pair<MajoranaCovariance, double> ground_covariance_with_gap(const QuadraticModel& qm,
                                                                 double zero_mode_tol) {
    auto [w, v] = spectrum_of_ia(qm.a);
    const double eps_min = min_abs_eigenvalue(w);
    if (eps_min < zero_mode_tol)
        throw ZeroModeError("ground_covariance: zero mode at single-particle energy " +
                            std::to_string(eps_min) + "; the Gaussian ground state is degenerate");
    VectorXd sign(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) sign[k] = w[k] > 0 ? 1.0 : -1.0;
    const MatrixXcd m_c =
        std::complex<double>(0, 1) * (v * sign.asDiagonal() * v.adjoint());
    MatrixXd m = m_c.real();
    m = 0.5 * (m - m.transpose()).eval(); // scrub the O(eps) symmetric residue
    return {MajoranaCovariance{std::move(m)}, eps_min};
}

MajoranaCovariance ground_covariance(const QuadraticModel& qm, double zero_mode_tol) {
    return ground_covariance_with_gap(qm, zero_mode_tol).first;
}

double single_particle_gap(const QuadraticModel& qm, double zero_mode_tol) {
    const MatrixXcd ia = std::complex<double>(0, 1) * qm.a.cast<std::complex<double>>();
    const VectorXd w = linalg::eigvalsh(ia);
    const double eps_min = min_abs_eigenvalue(w);
    if (eps_min < zero_mode_tol)
        throw ZeroModeError("single_particle_gap: zero mode at " + std::to_string(eps_min));
    return eps_min;
}

double pfaffian(MatrixXd a) {
    const Eigen::Index n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("pfaffian: matrix not square");
    if (n % 2 != 0) throw std::invalid_argument("pfaffian: odd dimension");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("pfaffian: matrix not antisymmetric");
    if (n == 0) return 1.0;

    double mant = 1.0;
    int expo = 0;
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        // Pivot: largest entry in column k below the diagonal.
        Eigen::Index pivot = k + 1;
        double best = std::abs(a(k + 1, k));
        for (Eigen::Index r = k + 2; r < n; ++r) {
            if (std::abs(a(r, k)) > best) {
                best = std::abs(a(r, k));
                pivot = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (pivot != k + 1) {
            a.row(k + 1).swap(a.row(pivot));
            a.col(k + 1).swap(a.col(pivot));
            mant = -mant;
        }
        mant *= a(k, k + 1);
        int e = 0;
        mant = std::frexp(mant, &e);
        expo += e;
        if (k + 2 < n) {
            const Eigen::Index m = n - k - 2;
            const Eigen::VectorXd tau = a.row(k).segment(k + 2, m).transpose() / a(k, k + 1);
            const Eigen::VectorXd col = a.col(k + 1).segment(k + 2, m);
            a.block(k + 2, k + 2, m, m).noalias() += tau * col.transpose();
            a.block(k + 2, k + 2, m, m).noalias() -= col * tau.transpose();
        }
    }
    return std::ldexp(mant, expo);
}

namespace {

double sub_pfaffian(const MatrixXd& m, const std::vector<int>& idx) {
    MatrixXd sub(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) sub(r, c) = m(idx[r], idx[c]);
    return pfaffian(std::move(sub));
}

} // namespace

SpinCorrelators end_to_end_correlators(const QuadraticModel& qm, const MajoranaCovariance& cov) {
    const int n = qm.n;
    const MatrixXd& m = cov.m;
    SpinCorrelators t;

    // sigma^x_0 sigma^x_{n-1} = (-i)^{n-1} c_1 ... c_{2n-2}; a Wick
    // contraction of 2k Majoranas contributes (-i)^k Pf(M_sub), so each
    // string correlator is a sign times a sub-Pfaffian of the covariance.
    const double sgn = (n % 2 == 1) ? 1.0 : -1.0; // (-1)^(n-1)
    std::vector<int> idx;

    auto range = [](int lo, int hi) { // [lo, hi)
        std::vector<int> v;
        for (int k = lo; k < hi; ++k) v.push_back(k);
        return v;
    };

    idx = range(1, 2 * n - 1);
    t.c[1][1] = sgn * sub_pfaffian(m, idx);

    idx = {0};
    for (int k : range(2, 2 * n - 2)) idx.push_back(k);
    idx.push_back(2 * n - 1);
    t.c[2][2] = -sgn * sub_pfaffian(m, idx);

    idx = range(1, 2 * n - 2);
    idx.push_back(2 * n - 1);
    t.c[1][2] = sgn * sub_pfaffian(m, idx);

    idx = {0};
    for (int k : range(2, 2 * n - 1)) idx.push_back(k);
    t.c[2][1] = -sgn * sub_pfaffian(m, idx);

    t.c[3][3] = sub_pfaffian(m, {0, 1, 2 * n - 2, 2 * n - 1});
    t.c[3][0] = -m(0, 1);
    t.c[0][3] = -m(2 * n - 2, 2 * n - 1);
    t.c[0][0] = 1.0;

    // Remaining pairs involve an odd number of Majorana factors; their
    // expectation vanishes identically in any Gaussian state (fermion
    // parity), independent of model symmetry.
    return t;
}

EndToEndResult end_to_end_rdm(const QuadraticModel& qm, const MajoranaCovariance& cov,
                              double psd_tol) {
    const SpinCorrelators t = end_to_end_correlators(qm, cov);
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int mu = 0; mu < 4; ++mu) {
        for (int nu = 0; nu < 4; ++nu) {
            if (t.c[mu][nu] == 0.0) continue;
            const auto& pa = linalg::pauli_matrix(mu);
            const auto& pb = linalg::pauli_matrix(nu);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    rho.block<2, 2>(2 * r, 2 * c) += 0.25 * t.c[mu][nu] * pa(r, c) * pb;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
    Eigen::Vector4d w = es.eigenvalues();
    if (w.minCoeff() < -psd_tol)
        throw std::runtime_error("end_to_end_rdm: reduced state eigenvalue " +
                                 std::to_string(w.minCoeff()) + " beyond the PSD window " +
                                 std::to_string(psd_tol));
    EndToEndResult out;
    out.correlators = t;
    if (w.minCoeff() < 0.0) {
        for (int k = 0; k < 4; ++k) w[k] = std::max(w[k], 0.0);
        Eigen::Matrix4cd fixed = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
        fixed /= fixed.trace().real();
        out.projection_correction = (fixed - rho).norm();
        rho = fixed;
    }
    out.rho = TwoSpinState{rho};
    return out;
}

EndToEndResult end_to_end_rdm(const QuadraticModel& qm, double psd_tol) {
    return end_to_end_rdm(qm, ground_covariance(qm), psd_tol);
}

} // namespace entspan
