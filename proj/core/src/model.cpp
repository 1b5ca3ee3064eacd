#include "entspan/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace entspan {

char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::X: return 'x';
        case Pauli::Y: return 'y';
        case Pauli::Z: return 'z';
    }
    throw std::logic_error("bad Pauli label");
}

Pauli pauli_from_char(char c) {
    switch (c) {
        case 'x': case 'X': return Pauli::X;
        case 'y': case 'Y': return Pauli::Y;
        case 'z': case 'Z': return Pauli::Z;
    }
    throw std::invalid_argument(std::string("unknown Pauli label '") + c + "'");
}

Term::Term(std::vector<PauliFactor> f, double c) : factors(std::move(f)), coeff(c) {
    std::sort(factors.begin(), factors.end());
    for (std::size_t k = 1; k < factors.size(); ++k) {
        if (factors[k].site == factors[k - 1].site)
            throw std::invalid_argument("Term: repeated site " + std::to_string(factors[k].site));
    }
    if (factors.empty()) throw std::invalid_argument("Term: empty factor list");
    if (!std::isfinite(coeff)) throw std::invalid_argument("Term: non-finite coefficient");
}

bool Term::acts_on(int site) const {
    return std::any_of(factors.begin(), factors.end(),
                       [site](const PauliFactor& f) { return f.site == site; });
}

std::string Term::to_string() const {
    std::ostringstream os;
    os << coeff << " *";
    for (const auto& f : factors) os << ' ' << pauli_char(f.label) << f.site;
    return os.str();
}

Term single_site(int site, Pauli p, double coeff) {
    return Term({{site, p}}, coeff);
}

Term two_site(int a, Pauli pa, int b, Pauli pb, double coeff) {
    return Term({{a, pa}, {b, pb}}, coeff);
}

void canonicalize(std::vector<Term>& terms) {
    std::sort(terms.begin(), terms.end(), [](const Term& s, const Term& t) {
        return s.factors < t.factors;
    });
    std::vector<Term> merged;
    for (auto& t : terms) {
        if (!merged.empty() && merged.back().factors == t.factors)
            merged.back().coeff += t.coeff;
        else
            merged.push_back(std::move(t));
    }
    std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
    terms = std::move(merged);
}

ChainModel build_general(int n_sites, std::vector<Term> terms) {
    if (n_sites < 1) throw std::invalid_argument("build_general: n_sites must be >= 1");
    for (const auto& t : terms) {
        if (!std::isfinite(t.coeff))
            throw std::invalid_argument("build_general: non-finite coefficient");
        for (const auto& f : t.factors) {
            if (f.site < 0 || f.site >= n_sites)
                throw std::invalid_argument("build_general: site " + std::to_string(f.site) +
                                            " out of range for n=" + std::to_string(n_sites));
        }
    }
    canonicalize(terms);
    return ChainModel{n_sites, std::move(terms)};
}

void validate_probes(const ChainModel& model, ProbePair probes) {
    if (probes.a == probes.b) throw std::invalid_argument("probe sites must differ");
    for (int s : {probes.a, probes.b}) {
        if (s < 0 || s >= model.n_sites)
            throw std::invalid_argument("probe site " + std::to_string(s) + " out of range");
    }
}

IntLfSplit split_int_lf(const ChainModel& model, ProbePair probes) {
    validate_probes(model, probes);
    IntLfSplit out;
    for (const auto& t : model.terms) {
        const bool local_field = t.factors.size() == 1 &&
                                 (t.factors[0].site == probes.a || t.factors[0].site == probes.b);
        (local_field ? out.lf_terms : out.int_terms).push_back(t);
    }
    return out;
}

namespace {

constexpr std::array<Pauli, 3> kAxes = {Pauli::X, Pauli::Y, Pauli::Z};

void append_tensor_coupling(std::vector<Term>& terms, int a, int b,
                            const std::array<std::array<double, 3>, 3>& j) {
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            if (j[i][k] != 0.0) terms.push_back(two_site(a, kAxes[i], b, kAxes[k], j[i][k]));
}

void append_field(std::vector<Term>& terms, int site, const std::array<double, 3>& h) {
    for (int i = 0; i < 3; ++i)
        if (h[i] != 0.0) terms.push_back(single_site(site, kAxes[i], h[i]));
}

} // namespace

ChainModel build_boundary_field_model(int n,
                                      const std::array<std::array<double, 3>, 3>& j_a,
                                      const std::array<std::array<double, 3>, 3>& jt_a,
                                      const std::array<std::array<double, 3>, 3>& jt_b,
                                      const std::array<std::array<double, 3>, 3>& j_b,
                                      const std::array<double, 3>& h1,
                                      const std::array<double, 3>& h2,
                                      const std::array<double, 3>& hn1,
                                      const std::array<double, 3>& hn,
                                      const std::vector<Term>& media_terms) {
    if (n < 6) throw std::invalid_argument("build_boundary_field_model: need n >= 6");
    const std::set<int> boundary = {0, 1, n - 2, n - 1};
    for (const auto& t : media_terms)
        for (const auto& f : t.factors)
            if (boundary.count(f.site))
                throw std::invalid_argument("media term touches boundary site " +
                                            std::to_string(f.site));
    std::vector<Term> terms = media_terms;
    append_tensor_coupling(terms, 0, 1, j_a);
    append_tensor_coupling(terms, 1, 2, jt_a);
    append_tensor_coupling(terms, n - 3, n - 2, jt_b);
    append_tensor_coupling(terms, n - 2, n - 1, j_b);
    append_field(terms, 0, h1);
    append_field(terms, 1, h2);
    append_field(terms, n - 2, hn1);
    append_field(terms, n - 1, hn);
    return build_general(n, std::move(terms));
}

ChainModel build_xy_demo(const XYChainParams& p) {
    if (p.n < 6) throw std::invalid_argument("build_xy_demo: need n >= 6");
    if (p.h0 == 0.0)
        throw std::invalid_argument("build_xy_demo: h0 = 0 leaves the compensating fields undefined");
    std::vector<Term> terms;
    for (int l = 0; l + 1 < p.n; ++l) {
        terms.push_back(two_site(l, Pauli::X, l + 1, Pauli::X, 1.0 + p.gamma));
        terms.push_back(two_site(l, Pauli::Y, l + 1, Pauli::Y, 1.0 - p.gamma));
    }
    const double comp = (1.0 - p.gamma * p.gamma) / p.h0;
    if (comp != 0.0)
        for (int s : {0, 2, p.n - 3, p.n - 1}) terms.push_back(single_site(s, Pauli::Z, comp));
    for (int s : {1, p.n - 2}) terms.push_back(single_site(s, Pauli::Z, p.h0));
    return build_general(p.n, std::move(terms));
}

ChainModel build_xy_enhancement(const XYChainParams& p) {
    if (p.n < 4) throw std::invalid_argument("build_xy_enhancement: need n >= 4");
    if (p.alpha != 1 && p.alpha != -1)
        throw std::invalid_argument("build_xy_enhancement: alpha must be +1 or -1");
    if (static_cast<int>(p.fields.size()) != p.n - 2)
        throw std::invalid_argument("build_xy_enhancement: fields must list sites 2..N-1 (" +
                                    std::to_string(p.n - 2) + " values, got " +
                                    std::to_string(p.fields.size()) + ")");
    std::vector<Term> terms;
    for (int end : {0, p.n - 2}) {
        terms.push_back(two_site(end, Pauli::X, end + 1, Pauli::X, p.coupling));
        terms.push_back(two_site(end, Pauli::Y, end + 1, Pauli::Y, p.coupling));
    }
    for (int l = 1; l + 1 < p.n - 1; ++l) {
        terms.push_back(two_site(l, Pauli::X, l + 1, Pauli::X, p.alpha * (1.0 + p.gamma)));
        terms.push_back(two_site(l, Pauli::Y, l + 1, Pauli::Y, 1.0 - p.gamma));
    }
    for (int k = 0; k < p.n - 2; ++k)
        if (p.fields[k] != 0.0) terms.push_back(single_site(1 + k, Pauli::Z, p.fields[k]));
    return build_general(p.n, std::move(terms));
}

ChainModel build_random_coupling(const RandomCouplingParams& p, RngStream& rng) {
    if (p.n < 4) throw std::invalid_argument("build_random_coupling: need n >= 4");
    if (p.amplitude < 0) throw std::invalid_argument("build_random_coupling: amplitude < 0");
    std::vector<Term> terms;
    for (int l = 1; l + 2 < p.n; ++l) {
        terms.push_back(two_site(l, Pauli::X, l + 1, Pauli::X, 1.0));
        terms.push_back(two_site(l, Pauli::Y, l + 1, Pauli::Y, 1.0));
    }
    for (int end : {0, p.n - 2}) {
        terms.push_back(two_site(end, Pauli::X, end + 1, Pauli::X, p.j));
        terms.push_back(two_site(end, Pauli::Y, end + 1, Pauli::Y, p.j));
    }
    // dJ^{ij}: i=0 gives a field on site l+1, j=0 a field on site l.
    for (int l = 0; l + 1 < p.n; ++l) {
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                if (i == 0 && j == 0) continue;
                const double dj = rng.uniform(-p.amplitude, p.amplitude);
                if (dj == 0.0) continue;
                if (i == 0)
                    terms.push_back(single_site(l + 1, kAxes[j - 1], dj));
                else if (j == 0)
                    terms.push_back(single_site(l, kAxes[i - 1], dj));
                else
                    terms.push_back(two_site(l, kAxes[i - 1], l + 1, kAxes[j - 1], dj));
            }
        }
    }
    return build_general(p.n, std::move(terms));
}

std::string model_to_json(const ChainModel& model) {
    nlohmann::json j;
    j["n"] = model.n_sites;
    j["terms"] = nlohmann::json::array();
    for (const auto& t : model.terms) {
        nlohmann::json jt;
        for (const auto& f : t.factors) {
            jt["sites"].push_back(f.site + 1);
            jt["paulis"].push_back(std::string(1, pauli_char(f.label)));
        }
        jt["coeff"] = t.coeff;
        j["terms"].push_back(std::move(jt));
    }
    return j.dump(2);
}

ChainModel model_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (!j.contains("n") || !j.contains("terms"))
        throw std::invalid_argument("model JSON needs fields \"n\" and \"terms\"");
    const int n = j.at("n").get<int>();
    std::vector<Term> terms;
    for (const auto& jt : j.at("terms")) {
        const auto& sites = jt.at("sites");
        const auto& paulis = jt.at("paulis");
        if (sites.size() != paulis.size())
            throw std::invalid_argument("model JSON: sites/paulis length mismatch");
        std::vector<PauliFactor> factors;
        for (std::size_t k = 0; k < sites.size(); ++k) {
            const int site1 = sites[k].get<int>();
            if (site1 < 1 || site1 > n)
                throw std::invalid_argument("model JSON: 1-based site " + std::to_string(site1) +
                                            " out of range");
            const std::string p = paulis[k].get<std::string>();
            if (p.size() != 1) throw std::invalid_argument("model JSON: bad Pauli label " + p);
            factors.push_back({site1 - 1, pauli_from_char(p[0])});
        }
        terms.emplace_back(std::move(factors), jt.at("coeff").get<double>());
    }
    return build_general(n, std::move(terms));
}

} // namespace entspan
