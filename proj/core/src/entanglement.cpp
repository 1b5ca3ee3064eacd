#include "entspan/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace entspan {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;
using namespace std::complex_literals;

TwoSpinState TwoSpinState::from_density_matrix(const DensityMatrix& dm) {
    if (dm.dim() != 4) throw std::invalid_argument("TwoSpinState: need a 4x4 density matrix");
    return TwoSpinState{dm.mat};
}

TwoSpinState TwoSpinState::swapped() const {
    Matrix4cd out;
    auto sw = [](int i) { return ((i & 1) << 1) | (i >> 1); };
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(sw(r), sw(c)) = mat(r, c);
    return TwoSpinState{out};
}

namespace {

Matrix4cd psd_sqrt(const Matrix4cd& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(rho);
    Eigen::Vector4d w = es.eigenvalues();
    for (int k = 0; k < 4; ++k) {
        if (w[k] < -1e-10)
            throw std::runtime_error("concurrence: eigenvalue " + std::to_string(w[k]) +
                                     " below the -1e-10 clamp window");
        w[k] = std::sqrt(std::max(w[k], 0.0));
    }
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

const Matrix4cd& sigma_yy() {
    static const Matrix4cd yy = [] {
        Matrix4cd m = Matrix4cd::Zero();
        m(0, 3) = -1; m(1, 2) = 1; m(2, 1) = 1; m(3, 0) = -1;
        return m;
    }();
    return yy;
}

} // namespace

double concurrence(const TwoSpinState& rho) {
    const Matrix4cd sq = psd_sqrt(rho.mat);
    const Matrix4cd b = sq * sigma_yy() * sq.conjugate();
    Eigen::JacobiSVD<Matrix4cd> svd(b);
    const Eigen::Vector4d lam = svd.singularValues(); // non-ascending
    const double c = lam[0] - lam[1] - lam[2] - lam[3];
    return std::clamp(c, 0.0, 1.0);
}

double von_neumann_entropy(const Eigen::MatrixXcd& dm) {
    const Eigen::VectorXd w = linalg::eigvalsh(dm);
    double s = 0.0;
    for (double p : w)
        if (p > 0.0) s -= p * std::log(p);
    return s;
}

double von_neumann_entropy(const DensityMatrix& dm) { return von_neumann_entropy(dm.mat); }

Matrix2cd reduced_first(const TwoSpinState& rho) {
    Matrix2cd out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            out(a, b) = rho.mat(2 * a, 2 * b) + rho.mat(2 * a + 1, 2 * b + 1);
    return out;
}

Matrix2cd reduced_second(const TwoSpinState& rho) {
    Matrix2cd out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            out(a, b) = rho.mat(a, b) + rho.mat(2 + a, 2 + b);
    return out;
}

double mutual_information(const TwoSpinState& rho) {
    return von_neumann_entropy(Eigen::MatrixXcd(reduced_first(rho))) +
           von_neumann_entropy(Eigen::MatrixXcd(reduced_second(rho))) -
           von_neumann_entropy(Eigen::MatrixXcd(rho.mat));
}

namespace {

std::array<Matrix2cd, 4> blocks_of(const Matrix4cd& rho) {
    // rho^{ij} = <i| x I rho |j> x I in the first qubit's basis.
    std::array<Matrix2cd, 4> b;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) b[2 * i + j] = rho.block<2, 2>(2 * i, 2 * j);
    return b;
}

double comm_norm(const Matrix2cd& a, const Matrix2cd& b) {
    return (a * b - b * a).cwiseAbs().maxCoeff();
}

std::string block_name(int k) {
    return "rho^" + std::to_string(k / 2 + 1) + std::to_string(k % 2 + 1);
}

ZeroDiscordResult test_in_basis(const Matrix4cd& rho, double tol) {
    const auto b = blocks_of(rho);
    for (int k = 0; k < 4; ++k) {
        const double v = comm_norm(b[k], b[k].adjoint());
        if (v > tol) {
            DiscordWitness w{"[" + block_name(k) + ", (" + block_name(k) + ")^dag]", v,
                             b[k] * b[k].adjoint(), b[k].adjoint() * b[k]};
            return {false, std::move(w)};
        }
    }
    for (int k = 0; k < 4; ++k) {
        for (int l = k + 1; l < 4; ++l) {
            const double v = comm_norm(b[k], b[l]);
            if (v > tol) {
                DiscordWitness w{"[" + block_name(k) + ", " + block_name(l) + "]", v,
                                 b[k] * b[l], b[l] * b[k]};
                return {false, std::move(w)};
            }
        }
    }
    return {true, std::nullopt};
}

Matrix2cd bloch_unitary(double theta, double phi) {
    Matrix2cd u;
    u(0, 0) = std::cos(theta / 2);
    u(1, 0) = std::exp(1i * phi) * std::sin(theta / 2);
    u(0, 1) = -std::exp(-1i * phi) * std::sin(theta / 2);
    u(1, 1) = std::cos(theta / 2);
    return u; // columns: |v(theta,phi)>, its orthogonal complement
}

} // namespace

ZeroDiscordResult zero_discord_test(const TwoSpinState& rho, double tol, int sweep_grid) {
    ZeroDiscordResult best = test_in_basis(rho.mat, tol);
    if (best.zero_discord || sweep_grid <= 0) return best;
    for (int it = 0; it < sweep_grid; ++it) {
        for (int ip = 0; ip < sweep_grid; ++ip) {
            const double theta = std::numbers::pi * (it + 0.5) / sweep_grid;
            const double phi = 2 * std::numbers::pi * ip / sweep_grid;
            const Matrix2cd u = bloch_unitary(theta, phi);
            Matrix4cd big = Matrix4cd::Zero();
            big.block<2, 2>(0, 0) = u(0, 0) * Matrix2cd::Identity();
            big.block<2, 2>(0, 2) = u(0, 1) * Matrix2cd::Identity();
            big.block<2, 2>(2, 0) = u(1, 0) * Matrix2cd::Identity();
            big.block<2, 2>(2, 2) = u(1, 1) * Matrix2cd::Identity();
            auto r = test_in_basis(big.adjoint() * rho.mat * big, tol);
            if (r.zero_discord) return r;
            if (r.witness->violation < best.witness->violation) best = std::move(r);
        }
    }
    return best;
}

namespace {

/// Average conditional entropy of qubit 2 after measuring qubit 1 along
/// (theta, phi).
double conditional_entropy(const Matrix4cd& rho, double theta, double phi) {
    const Matrix2cd u = bloch_unitary(theta, phi);
    double total = 0.0;
    for (int outcome = 0; outcome < 2; ++outcome) {
        const Eigen::Vector2cd v = u.col(outcome);
        // <v| x I rho |v> x I
        Matrix2cd cond = Matrix2cd::Zero();
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                cond += std::conj(v[a]) * v[b] * rho.block<2, 2>(2 * a, 2 * b);
        const double p = cond.trace().real();
        if (p <= 1e-15) continue;
        Eigen::SelfAdjointEigenSolver<Matrix2cd> es(cond / p, Eigen::EigenvaluesOnly);
        for (double q : es.eigenvalues())
            if (q > 0) total -= p * q * std::log(q);
    }
    return total;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 24) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int k = 0; k < iters; ++k) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a); f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a); f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

DiscordReport discord(const TwoSpinState& rho, int grid) {
    if (grid < 16) throw std::invalid_argument("discord: grid must be >= 16");
    const double pi = std::numbers::pi;

    double best_s = std::numeric_limits<double>::infinity();
    double best_theta = 0.0, best_phi = 0.0;
    for (int it = 0; it <= grid; ++it) {
        for (int ip = 0; ip < grid; ++ip) {
            const double theta = pi * it / grid;
            const double phi = 2 * pi * ip / grid;
            const double s = conditional_entropy(rho.mat, theta, phi);
            if (s < best_s) {
                best_s = s;
                best_theta = theta;
                best_phi = phi;
            }
        }
    }
    const double dt = pi / grid, dp = 2 * pi / grid;
    for (int round = 0; round < 3; ++round) {
        best_theta = golden_min(
            [&](double t) { return conditional_entropy(rho.mat, t, best_phi); },
            best_theta - dt, best_theta + dt);
        best_phi = golden_min(
            [&](double p) { return conditional_entropy(rho.mat, best_theta, p); },
            best_phi - dp, best_phi + dp);
        best_s = conditional_entropy(rho.mat, best_theta, best_phi);
    }

    DiscordReport rep;
    rep.mutual_info = mutual_information(rho);
    const double s_b = von_neumann_entropy(Eigen::MatrixXcd(reduced_second(rho)));
    rep.classical_info = s_b - best_s;
    rep.discord = rep.mutual_info - rep.classical_info;
    rep.theta = best_theta;
    rep.phi = best_phi;
    auto zd = zero_discord_test(rho);
    rep.zero_discord = zd.zero_discord;
    if (zd.witness) rep.witness = zd.witness->description;
    return rep;
}

} // namespace entspan
