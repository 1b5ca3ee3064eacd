#include "entspan/effective.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace entspan {

namespace {

using Eigen::Matrix4cd;
using Eigen::MatrixXcd;
using Eigen::Vector3d;
using Eigen::VectorXcd;

struct SiteRoles {
    std::vector<int> mediator;         // sorted
    std::map<int, int> mediator_index; // site -> mediator-local index
};

SiteRoles make_roles(const ChainModel& model, ProbePair probes,
                     std::span<const int> mediator_sites) {
    validate_probes(model, probes);
    SiteRoles roles;
    roles.mediator.assign(mediator_sites.begin(), mediator_sites.end());
    std::sort(roles.mediator.begin(), roles.mediator.end());
    if (roles.mediator.empty())
        throw std::invalid_argument("effective: mediator site set is empty");
    for (std::size_t k = 0; k < roles.mediator.size(); ++k) {
        const int s = roles.mediator[k];
        if (s < 0 || s >= model.n_sites)
            throw std::invalid_argument("effective: mediator site out of range");
        if (k > 0 && roles.mediator[k] == roles.mediator[k - 1])
            throw std::invalid_argument("effective: repeated mediator site");
        if (s == probes.a || s == probes.b)
            throw std::invalid_argument("effective: probe site listed as mediator");
        roles.mediator_index[s] = static_cast<int>(k);
    }
    if (static_cast<int>(roles.mediator.size()) + 2 != model.n_sites)
        throw std::invalid_argument(
            "effective: model sites must be exactly the probe pair plus the mediator set");
    return roles;
}

/// 4x4 operator of a Pauli string restricted to the probe pair (a = most
/// significant qubit).
Matrix4cd probe_operator(const Term& t, ProbePair probes) {
    int mu = 0, nu = 0;
    for (const auto& f : t.factors) {
        if (f.site == probes.a) mu = static_cast<int>(f.label);
        if (f.site == probes.b) nu = static_cast<int>(f.label);
    }
    Matrix4cd out;
    const auto& pa = linalg::pauli_matrix(mu);
    const auto& pb = linalg::pauli_matrix(nu);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = pa(i, j) * pb;
    return out;
}

/// The mediator part of a term as a ChainModel term on mediator-local sites.
Term mediator_part(const Term& t, const SiteRoles& roles, ProbePair probes) {
    std::vector<PauliFactor> factors;
    for (const auto& f : t.factors) {
        if (f.site == probes.a || f.site == probes.b) continue;
        factors.push_back({roles.mediator_index.at(f.site), f.label});
    }
    return Term(std::move(factors), 1.0);
}

struct TermClasses {
    std::vector<Term> mediator_only;
    std::vector<Term> probe_local; // support within the probe pair
    std::vector<Term> couple;      // one probe, at least one mediator site
};

TermClasses classify_terms(const ChainModel& model, ProbePair probes) {
    TermClasses out;
    for (const auto& t : model.terms) {
        const bool on_a = t.acts_on(probes.a);
        const bool on_b = t.acts_on(probes.b);
        const bool on_med = std::any_of(t.factors.begin(), t.factors.end(), [&](const PauliFactor& f) {
            return f.site != probes.a && f.site != probes.b;
        });
        if (!on_a && !on_b) out.mediator_only.push_back(t);
        else if (!on_med) out.probe_local.push_back(t);
        else if (on_a && on_b)
            throw std::invalid_argument("effective: term " + t.to_string() +
                                        " couples both probes to the mediator");
        else out.couple.push_back(t);
    }
    return out;
}

} // namespace

PerturbationSplit make_perturbation_split(const ChainModel& model, ProbePair probes,
                                          std::span<const int> mediator_sites,
                                          double degeneracy_tol) {
    const SiteRoles roles = make_roles(model, probes, mediator_sites);
    const TermClasses classes = classify_terms(model, probes);

    PerturbationSplit split;
    split.h0_terms = build_general(model.n_sites, classes.mediator_only);
    std::vector<Term> h1 = classes.couple;
    h1.insert(h1.end(), classes.probe_local.begin(), classes.probe_local.end());
    split.h1_terms = build_general(model.n_sites, h1);

    // Mediator spectrum on its own subspace.
    std::vector<Term> med_terms;
    for (const auto& t : classes.mediator_only) {
        Term m = mediator_part(t, roles, probes);
        m.coeff = t.coeff;
        med_terms.push_back(std::move(m));
    }
    const auto med_model = build_general(static_cast<int>(roles.mediator.size()), med_terms);
    const auto spec = eigh(to_dense(med_model));
    const auto g = ground_space(spec, degeneracy_tol);
    if (g.degeneracy > 1)
        throw std::runtime_error("effective: mediator ground state is degenerate (multiplicity " +
                                 std::to_string(g.degeneracy) + ")");
    split.ground_vector = spec.eigenvectors.col(0);
    split.e0 = g.energy;
    split.gap = spec.eigenvalues[1] - g.energy;
    split.p0_rank = 4;

    if (!split.h1_terms.terms.empty()) {
        const auto h1_dense = to_dense(split.h1_terms);
        split.h1_norm = linalg::eigvalsh(h1_dense.mat).cwiseAbs().maxCoeff();
    }
    return split;
}

Matrix4cd EffectiveTwoSpinHamiltonian::reconstruct() const {
    Matrix4cd out = constant * Matrix4cd::Identity();
    for (int i = 0; i < 3; ++i) {
        const auto& pa = linalg::pauli_matrix(i + 1);
        Matrix4cd sa = Matrix4cd::Zero(), sb = Matrix4cd::Zero();
        sa.block<2, 2>(0, 0) = pa(0, 0) * Eigen::Matrix2cd::Identity();
        sa.block<2, 2>(0, 2) = pa(0, 1) * Eigen::Matrix2cd::Identity();
        sa.block<2, 2>(2, 0) = pa(1, 0) * Eigen::Matrix2cd::Identity();
        sa.block<2, 2>(2, 2) = pa(1, 1) * Eigen::Matrix2cd::Identity();
        sb.block<2, 2>(0, 0) = pa;
        sb.block<2, 2>(2, 2) = pa;
        out += h_a[i] * sa + h_b[i] * sb;
        for (int j3 = 0; j3 < 3; ++j3) {
            const auto& pb = linalg::pauli_matrix(j3 + 1);
            Matrix4cd sab;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) sab.block<2, 2>(2 * r, 2 * c) = pa(r, c) * pb;
            out += j(i, j3) * sab;
        }
    }
    return out;
}

ChainModel EffectiveTwoSpinHamiltonian::as_model() const {
    std::vector<Term> terms;
    for (int i = 0; i < 3; ++i) {
        if (h_a[i] != 0.0) terms.push_back(single_site(0, static_cast<Pauli>(i + 1), h_a[i]));
        if (h_b[i] != 0.0) terms.push_back(single_site(1, static_cast<Pauli>(i + 1), h_b[i]));
        for (int k = 0; k < 3; ++k)
            if (j(i, k) != 0.0)
                terms.push_back(two_site(0, static_cast<Pauli>(i + 1), 1,
                                         static_cast<Pauli>(k + 1), j(i, k)));
    }
    return build_general(2, std::move(terms));
}

namespace {

/// Pauli-basis projection of a Hermitian 4x4 operator.
void project_coefficients(const Matrix4cd& h, EffectiveTwoSpinHamiltonian& out) {
    auto pauli_pair = [](int mu, int nu) {
        const auto& pa = linalg::pauli_matrix(mu);
        const auto& pb = linalg::pauli_matrix(nu);
        Matrix4cd m;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) m.block<2, 2>(2 * r, 2 * c) = pa(r, c) * pb;
        return m;
    };
    out.constant = (h.trace() / 4.0).real();
    for (int i = 0; i < 3; ++i) {
        out.h_a[i] = ((h * pauli_pair(i + 1, 0)).trace() / 4.0).real();
        out.h_b[i] = ((h * pauli_pair(0, i + 1)).trace() / 4.0).real();
        for (int k = 0; k < 3; ++k)
            out.j(i, k) = ((h * pauli_pair(i + 1, k + 1)).trace() / 4.0).real();
    }
}

Matrix4cd first_order_matrix(ProbePair probes, const SiteRoles& roles,
                             const PerturbationSplit& split, const TermClasses& classes) {
    Matrix4cd m1 = Matrix4cd::Zero();
    for (const auto& t : classes.probe_local) m1 += t.coeff * probe_operator(t, probes);
    for (const auto& t : classes.couple) {
        const Term med = mediator_part(t, roles, probes);
        const auto med_op = to_dense(build_general(static_cast<int>(roles.mediator.size()), {med}));
        const std::complex<double> ev =
            split.ground_vector.dot(med_op.mat * split.ground_vector);
        m1 += t.coeff * ev.real() * probe_operator(t, probes);
    }
    return m1;
}

} // namespace

EffectiveTwoSpinHamiltonian second_order_effective(const ChainModel& model, ProbePair probes,
                                                   std::span<const int> mediator_sites) {
    const SiteRoles roles = make_roles(model, probes, mediator_sites);
    const TermClasses classes = classify_terms(model, probes);
    const PerturbationSplit split = make_perturbation_split(model, probes, mediator_sites);

    // Re-diagonalize the mediator for the resolvent basis.
    std::vector<Term> med_terms;
    for (const auto& t : classes.mediator_only) {
        Term m = mediator_part(t, roles, probes);
        m.coeff = t.coeff;
        med_terms.push_back(std::move(m));
    }
    const int n_med = static_cast<int>(roles.mediator.size());
    const auto spec = eigh(to_dense(build_general(n_med, med_terms)));
    const VectorXcd& psi0 = spec.eigenvectors.col(0);
    const double e0 = spec.eigenvalues[0];

    const Matrix4cd m1 = first_order_matrix(probes, roles, split, classes);

    // w_t = B_t |psi0>, projected on the excited eigenbasis.
    const std::size_t nc = classes.couple.size();
    std::vector<Matrix4cd> probe_ops(nc);
    MatrixXcd proj(spec.eigenvalues.size(), nc);
    for (std::size_t t = 0; t < nc; ++t) {
        probe_ops[t] = probe_operator(classes.couple[t], probes);
        const Term med = mediator_part(classes.couple[t], roles, probes);
        const auto med_op = to_dense(build_general(n_med, {med}));
        proj.col(t) = spec.eigenvectors.adjoint() * (med_op.mat * psi0);
    }
    Eigen::VectorXd resolvent = (e0 - spec.eigenvalues.array()).inverse();
    resolvent[0] = 0.0; // exclude the ground vector, not just its energy shell

    Matrix4cd m2 = Matrix4cd::Zero();
    for (std::size_t s = 0; s < nc; ++s) {
        for (std::size_t t = 0; t < nc; ++t) {
            const std::complex<double> g =
                (proj.col(s).conjugate().array() * resolvent.array().cast<std::complex<double>>() *
                 proj.col(t).array())
                    .sum();
            m2 += classes.couple[s].coeff * classes.couple[t].coeff * g *
                  (probe_ops[s] * probe_ops[t]);
        }
    }

    const Matrix4cd h_eff = m1 + m2; // m1 already includes the probe-local part

    EffectiveTwoSpinHamiltonian out;
    project_coefficients(h_eff, out);
    EffectiveTwoSpinHamiltonian o1;
    project_coefficients(m1, o1);
    out.order1_a = o1.h_a;
    out.order1_b = o1.h_b;

    if ((out.reconstruct() - h_eff).cwiseAbs().maxCoeff() > 1e-12 *
            std::max(1.0, h_eff.cwiseAbs().maxCoeff()))
        throw std::runtime_error("second_order_effective: Pauli projection round-trip failed");
    return out;
}

std::pair<Vector3d, Vector3d> first_order_fields(const ChainModel& model, ProbePair probes,
                                                 std::span<const int> mediator_sites) {
    const SiteRoles roles = make_roles(model, probes, mediator_sites);
    const TermClasses classes = classify_terms(model, probes);
    const PerturbationSplit split = make_perturbation_split(model, probes, mediator_sites);
    const Matrix4cd m1 = first_order_matrix(probes, roles, split, classes);
    EffectiveTwoSpinHamiltonian coeffs;
    project_coefficients(m1, coeffs);
    return {coeffs.h_a, coeffs.h_b};
}

std::vector<Term> cancellation_fields(const ChainModel& model, ProbePair probes,
                                      std::span<const int> mediator_sites) {
    const auto [ha, hb] = first_order_fields(model, probes, mediator_sites);
    std::vector<Term> out;
    for (int i = 0; i < 3; ++i) {
        if (ha[i] != 0.0) out.push_back(single_site(probes.a, static_cast<Pauli>(i + 1), -ha[i]));
        if (hb[i] != 0.0) out.push_back(single_site(probes.b, static_cast<Pauli>(i + 1), -hb[i]));
    }
    return out;
}

Theorem2Effective theorem2_effective(const Theorem2Params& p) {
    if (p.h2z == 0.0) throw std::invalid_argument("theorem2_effective: h2z must be nonzero");
    Theorem2Effective out;
    out.jeff[0] = -p.j[0] * p.jp[0] / p.h2z;
    out.jeff[1] = -p.j[1] * p.jp[1] / p.h2z;
    out.jeff[2] = 0.0;
    out.h1z_eff = -p.j[2] - p.j[0] * p.j[1] / p.h2z;
    out.h3z_eff = -p.jp[2] - p.jp[0] * p.jp[1] / p.h2z;
    return out;
}

ChainModel theorem2_reduce(const ChainModel& model, int mediator_site) {
    if (mediator_site < 0 || mediator_site >= model.n_sites)
        throw std::invalid_argument("theorem2_reduce: mediator site out of range");

    double h2z = 0.0;
    std::map<int, Vector3d> couplings; // partner site -> diagonal XYZ vector
    std::vector<Term> rest;
    for (const auto& t : model.terms) {
        if (!t.acts_on(mediator_site)) {
            rest.push_back(t);
            continue;
        }
        if (t.factors.size() == 1) {
            if (t.factors[0].label != Pauli::Z)
                throw std::invalid_argument("theorem2_reduce: mediator field must be z-only, got " +
                                            t.to_string());
            h2z += t.coeff;
        } else if (t.factors.size() == 2 && t.factors[0].label == t.factors[1].label) {
            const int partner =
                t.factors[0].site == mediator_site ? t.factors[1].site : t.factors[0].site;
            auto it = couplings.try_emplace(partner, Vector3d::Zero()).first;
            it->second[static_cast<int>(t.factors[0].label) - 1] += t.coeff;
        } else {
            throw std::invalid_argument(
                "theorem2_reduce: term " + t.to_string() +
                " does not match the diagonal-XYZ template around the mediator spin");
        }
    }
    if (h2z == 0.0)
        throw std::invalid_argument("theorem2_reduce: no z-field on the mediator spin");
    if (couplings.size() > 2)
        throw std::invalid_argument("theorem2_reduce: mediator spin couples to more than two sites");

    if (couplings.size() == 2) {
        auto it = couplings.begin();
        const auto [site_a, j] = *it++;
        const auto [site_b, jp] = *it;
        const auto eff = theorem2_effective({j, jp, h2z});
        if (eff.jeff[0] != 0.0) rest.push_back(two_site(site_a, Pauli::X, site_b, Pauli::X, eff.jeff[0]));
        if (eff.jeff[1] != 0.0) rest.push_back(two_site(site_a, Pauli::Y, site_b, Pauli::Y, eff.jeff[1]));
        if (eff.h1z_eff != 0.0) rest.push_back(single_site(site_a, Pauli::Z, eff.h1z_eff));
        if (eff.h3z_eff != 0.0) rest.push_back(single_site(site_b, Pauli::Z, eff.h3z_eff));
    } else if (couplings.size() == 1) {
        // Single partner: only the field piece -Jz - JxJy/h survives.
        const auto& [site_a, j] = *couplings.begin();
        const double hz = -j[2] - j[0] * j[1] / h2z;
        if (hz != 0.0) rest.push_back(single_site(site_a, Pauli::Z, hz));
    }

    // Renumber past the removed site; merge first so cancelled fields
    // (e.g. compensating fields against the generated ones) prune cleanly.
    for (auto& t : rest)
        for (auto& f : t.factors)
            if (f.site > mediator_site) --f.site;
    canonicalize(rest);
    const double scale = [&] {
        double m = 0.0;
        for (const auto& t : rest) m = std::max(m, std::abs(t.coeff));
        return m;
    }();
    std::erase_if(rest, [&](const Term& t) { return std::abs(t.coeff) < 1e-14 * scale; });
    return build_general(model.n_sites - 1, std::move(rest));
}

namespace {

std::pair<double, double> least_squares(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k]; sy += y[k]; sxx += x[k] * x[k]; sxy += x[k] * y[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

} // namespace

ScalingFit precision_scaling(const std::function<ChainModel(double)>& model_family,
                             std::span<const double> h_values, ProbePair probes,
                             std::span<const int> mediator_sites) {
    if (h_values.size() < 4)
        throw std::invalid_argument("precision_scaling: need at least 4 h values");
    ScalingFit fit;
    fit.h_values.assign(h_values.begin(), h_values.end());

    std::vector<int> med(mediator_sites.begin(), mediator_sites.end());
    std::sort(med.begin(), med.end());

    for (double h : h_values) {
        const ChainModel model = model_family(h);
        validate_probes(model, probes);

        std::vector<int> retained;
        DensityMatrix eff_dm{Eigen::MatrixXcd()};
        if (med.size() == 1) {
            const ChainModel effective = theorem2_reduce(model, med[0]);
            for (int s = 0; s < model.n_sites; ++s)
                if (s != med[0]) retained.push_back(s);
            eff_dm = ground_state_dm(to_dense(effective));
        } else {
            const auto eff = second_order_effective(model, probes, med);
            retained = {probes.a, probes.b};
            eff_dm = ground_state_dm(to_dense(eff.as_model()));
        }
        const auto exact_rdm =
            partial_trace_keep(ground_state_dm(to_dense(model)), retained);
        fit.distances.push_back(trace_distance(exact_rdm.mat, eff_dm.mat));
    }

    for (std::size_t k = 1; k < fit.distances.size(); ++k)
        if (fit.distances[k] > fit.distances[k - 1]) fit.monotone = false;

    if (*std::max_element(fit.distances.begin(), fit.distances.end()) < 1e-13) {
        fit.fitted = false; // effective equals exact; nothing to fit
        return fit;
    }
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < fit.distances.size(); ++k) {
        lx.push_back(std::log(fit.h_values[k]));
        ly.push_back(std::log(fit.distances[k]));
    }
    std::tie(fit.slope, fit.intercept) = least_squares(lx, ly);
    fit.fitted = true;
    return fit;
}

} // namespace entspan
