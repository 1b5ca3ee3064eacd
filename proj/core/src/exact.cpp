#include "entspan/exact.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace entspan {

namespace linalg {

Eigen::VectorXd eigh_inplace(Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    Eigen::VectorXd w(n);
    if (n < 16) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigh: Eigen eigensolver failed to converge");
        w = es.eigenvalues();
        a = es.eigenvectors();
        return w;
    }
    const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                    reinterpret_cast<lapack_complex_double*>(a.data()), n,
                                    w.data());
    if (info != 0)
        throw std::runtime_error("eigh: zheevd failed, info=" + std::to_string(info));
    return w;
}

Eigen::VectorXd eigvalsh(const Eigen::MatrixXcd& a) {
    Eigen::MatrixXcd work = a;
    const int n = static_cast<int>(a.rows());
    if (n < 16) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(work, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
    Eigen::VectorXd w(n);
    const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                    reinterpret_cast<lapack_complex_double*>(work.data()), n,
                                    w.data());
    if (info != 0)
        throw std::runtime_error("eigvalsh: zheevd failed, info=" + std::to_string(info));
    return w;
}

const Eigen::Matrix2cd& pauli_matrix(int mu) {
    using namespace std::complex_literals;
    static const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    static const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
    static const Eigen::Matrix2cd sy = (Eigen::Matrix2cd() << 0, -1i, 1i, 0).finished();
    static const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    switch (mu) {
        case 0: return id;
        case 1: return sx;
        case 2: return sy;
        case 3: return sz;
    }
    throw std::logic_error("pauli_matrix: index out of range");
}

} // namespace linalg

void DensityMatrix::validate() const {
    const double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
    if ((mat - mat.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::runtime_error("DensityMatrix: not Hermitian");
    if (std::abs(mat.trace().real() - 1.0) > 1e-10 || std::abs(mat.trace().imag()) > 1e-10)
        throw std::runtime_error("DensityMatrix: trace != 1");
    const Eigen::VectorXd w = linalg::eigvalsh(mat);
    if (w.minCoeff() < -1e-10)
        throw std::runtime_error("DensityMatrix: negative eigenvalue " + std::to_string(w.minCoeff()));
}

DenseOperator to_dense(const ChainModel& model, int site_cap) {
    if (model.n_sites > site_cap)
        throw DimensionCapError("to_dense: n=" + std::to_string(model.n_sites) +
                                " exceeds the dense cap " + std::to_string(site_cap) +
                                " (XX/YY/Z chains this large belong to the free-fermion solver)");
    const Eigen::Index dim = Eigen::Index(1) << model.n_sites;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    using namespace std::complex_literals;
    for (const auto& t : model.terms) {
        // A Pauli string maps basis column b to a single row b ^ flip with a
        // phase: X flips, Y flips with +/-i, Z contributes a sign.
        Eigen::Index flip = 0;
        for (const auto& f : t.factors) {
            const Eigen::Index bit = Eigen::Index(1) << (model.n_sites - 1 - f.site);
            if (f.label != Pauli::Z) flip ^= bit;
        }
        for (Eigen::Index col = 0; col < dim; ++col) {
            std::complex<double> amp = t.coeff;
            for (const auto& f : t.factors) {
                const bool down = (col >> (model.n_sites - 1 - f.site)) & 1;
                switch (f.label) {
                    case Pauli::X: break;
                    case Pauli::Y: amp *= down ? -1i : 1i; break;
                    case Pauli::Z: amp *= down ? -1.0 : 1.0; break;
                }
            }
            h(col ^ flip, col) += amp;
        }
    }
    return DenseOperator{std::move(h), true};
}

SpectralDecomposition eigh(const DenseOperator& op) {
    if (!op.hermitian) throw std::invalid_argument("eigh: operator not tagged Hermitian");
    SpectralDecomposition out;
    out.eigenvectors = op.mat;
    out.eigenvalues = linalg::eigh_inplace(out.eigenvectors);
    return out;
}

GroundSpace ground_space(const SpectralDecomposition& s, double tol) {
    const double e0 = s.eigenvalues[0];
    int d = 1;
    while (d < s.eigenvalues.size() && s.eigenvalues[d] <= e0 + tol) ++d;
    return GroundSpace{e0, d, tol};
}

DensityMatrix ground_state_dm(const SpectralDecomposition& s, double degeneracy_tol) {
    const GroundSpace g = ground_space(s, degeneracy_tol);
    const auto v = s.eigenvectors.leftCols(g.degeneracy);
    DensityMatrix dm{(v * v.adjoint()) / double(g.degeneracy)};
    return dm;
}

DensityMatrix ground_state_dm(const DenseOperator& op, double degeneracy_tol) {
    return ground_state_dm(eigh(op), degeneracy_tol);
}

DensityMatrix gibbs(const DenseOperator& op, double beta) {
    if (!(beta >= 0) || !std::isfinite(beta))
        throw std::invalid_argument("gibbs: beta must be finite and >= 0");
    const SpectralDecomposition s = eigh(op);
    Eigen::VectorXd w = (-beta * (s.eigenvalues.array() - s.eigenvalues[0])).exp();
    w /= w.sum();
    return DensityMatrix{s.eigenvectors * w.asDiagonal() * s.eigenvectors.adjoint()};
}

DensityMatrix partial_trace_keep(const DensityMatrix& dm, std::span<const int> keep) {
    const Eigen::Index dim = dm.dim();
    int n = 0;
    while ((Eigen::Index(1) << n) < dim) ++n;
    if ((Eigen::Index(1) << n) != dim)
        throw std::invalid_argument("partial_trace_keep: dimension is not a power of two");
    std::vector<bool> kept(n, false);
    for (int s : keep) {
        if (s < 0 || s >= n) throw std::invalid_argument("partial_trace_keep: site out of range");
        if (kept[s]) throw std::invalid_argument("partial_trace_keep: repeated site");
        kept[s] = true;
    }
    const int k = static_cast<int>(keep.size());
    std::vector<int> traced;
    for (int s = 0; s < n; ++s)
        if (!kept[s]) traced.push_back(s);

    // Site s occupies basis bit n-1-s (site 0 most significant).
    auto bit_of = [n](int site) { return n - 1 - site; };
    const Eigen::Index dk = Eigen::Index(1) << k;
    const Eigen::Index dt = Eigen::Index(1) << traced.size();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
    for (Eigen::Index r = 0; r < dk; ++r) {
        Eigen::Index rbase = 0;
        for (int i = 0; i < k; ++i)
            if ((r >> (k - 1 - i)) & 1) rbase |= Eigen::Index(1) << bit_of(keep[i]);
        for (Eigen::Index c = 0; c < dk; ++c) {
            Eigen::Index cbase = 0;
            for (int i = 0; i < k; ++i)
                if ((c >> (k - 1 - i)) & 1) cbase |= Eigen::Index(1) << bit_of(keep[i]);
            std::complex<double> sum = 0.0;
            for (Eigen::Index t = 0; t < dt; ++t) {
                Eigen::Index tmask = 0;
                for (std::size_t i = 0; i < traced.size(); ++i)
                    if ((t >> i) & 1) tmask |= Eigen::Index(1) << bit_of(traced[i]);
                sum += dm.mat(rbase | tmask, cbase | tmask);
            }
            out(r, c) = sum;
        }
    }
    return DensityMatrix{std::move(out)};
}

double energy_gap(const SpectralDecomposition& s, double degeneracy_tol) {
    const GroundSpace g = ground_space(s, degeneracy_tol);
    if (g.degeneracy == s.eigenvalues.size()) return 0.0;
    return s.eigenvalues[g.degeneracy] - g.energy;
}

double energy_gap(const DenseOperator& op, double degeneracy_tol) {
    if (!op.hermitian) throw std::invalid_argument("energy_gap: operator not tagged Hermitian");
    Eigen::VectorXd w = linalg::eigvalsh(op.mat);
    const double e0 = w[0];
    int d = 1;
    while (d < w.size() && w[d] <= e0 + degeneracy_tol) ++d;
    if (d == w.size()) return 0.0;
    return w[d] - e0;
}

double expectation(const DensityMatrix& dm, const DenseOperator& op) {
    if (dm.dim() != op.dim()) throw std::invalid_argument("expectation: dimension mismatch");
    const std::complex<double> v = (dm.mat * op.mat).trace();
    const double scale = std::max(1.0, std::abs(v.real()));
    if (std::abs(v.imag()) > 1e-10 * scale)
        throw std::runtime_error("expectation: imaginary residue " + std::to_string(v.imag()));
    return v.real();
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return 0.5 * linalg::eigvalsh(a - b).cwiseAbs().sum();
}

} // namespace entspan
