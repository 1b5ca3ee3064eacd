#include "entspan/classicality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace entspan {

namespace pauli {

namespace {

// sigma^a sigma^b = table_label with i^table_phase, labels 1=X 2=Y 3=Z.
struct SingleProduct {
    int label;  // 0 = identity
    int phase;  // power of i, mod 4
};

SingleProduct single_product(Pauli a, Pauli b) {
    const int ia = static_cast<int>(a), ib = static_cast<int>(b);
    if (ia == ib) return {0, 0};
    // eps_{abc}: xy->z (+i), yz->x (+i), zx->y (+i); reversed pairs get -i.
    static constexpr int third[4][4] = {{0, 0, 0, 0}, {0, 0, 3, 2}, {0, 3, 0, 1}, {0, 2, 1, 0}};
    const bool forward = (ia == 1 && ib == 2) || (ia == 2 && ib == 3) || (ia == 3 && ib == 1);
    return {third[ia][ib], forward ? 1 : 3};
}

std::complex<double> phase_value(int p) {
    switch (p & 3) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

} // namespace

WeightedString product(const WeightedString& a, const WeightedString& b) {
    WeightedString out;
    out.factors.reserve(a.factors.size() + b.factors.size());
    int phase = 0;
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() || j < b.factors.size()) {
        if (j == b.factors.size() ||
            (i < a.factors.size() && a.factors[i].site < b.factors[j].site)) {
            out.factors.push_back(a.factors[i++]);
        } else if (i == a.factors.size() || b.factors[j].site < a.factors[i].site) {
            out.factors.push_back(b.factors[j++]);
        } else {
            const auto sp = single_product(a.factors[i].label, b.factors[j].label);
            phase += sp.phase;
            if (sp.label != 0)
                out.factors.push_back({a.factors[i].site, static_cast<Pauli>(sp.label)});
            ++i;
            ++j;
        }
    }
    out.coeff = a.coeff * b.coeff * phase_value(phase);
    return out;
}

bool strings_commute(std::span<const PauliFactor> a, std::span<const PauliFactor> b) {
    int differing = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].site < b[j].site) ++i;
        else if (b[j].site < a[i].site) ++j;
        else {
            if (a[i].label != b[j].label) ++differing;
            ++i; ++j;
        }
    }
    return (differing % 2) == 0;
}

std::vector<WeightedString> commutator(std::span<const Term> a, std::span<const Term> b) {
    std::map<std::vector<PauliFactor>, std::complex<double>> acc;
    for (const auto& ta : a) {
        for (const auto& tb : b) {
            if (strings_commute(ta.factors, tb.factors)) continue;
            // [A, B] = 2AB when A and B anticommute.
            WeightedString p = product({ta.factors, ta.coeff}, {tb.factors, tb.coeff});
            acc[p.factors] += 2.0 * p.coeff;
        }
    }
    std::vector<WeightedString> out;
    for (auto& [factors, coeff] : acc)
        if (coeff != 0.0) out.push_back({factors, coeff});
    return out;
}

double hs_norm(std::span<const WeightedString> s) {
    double sq = 0.0;
    for (const auto& w : s) sq += std::norm(w.coeff);
    return std::sqrt(sq);
}

double hs_norm(std::span<const Term> s) {
    double sq = 0.0;
    for (const auto& t : s) sq += t.coeff * t.coeff;
    return std::sqrt(sq);
}

} // namespace pauli

namespace {

std::vector<Term> select(std::span<const Term> terms, const std::vector<int>& idx) {
    std::vector<Term> out;
    out.reserve(idx.size());
    for (int k : idx) out.push_back(terms[k]);
    return out;
}

} // namespace

bool verify_classical_split(std::span<const Term> int_terms, const TermPartition& partition,
                            ProbePair probes, double tol) {
    std::vector<char> seen(int_terms.size(), 0);
    for (int k : partition.a_terms) {
        if (k < 0 || k >= static_cast<int>(int_terms.size()) || seen[k])
            throw std::invalid_argument("verify_classical_split: bad partition index");
        seen[k] = 1;
    }
    for (int k : partition.b_terms) {
        if (k < 0 || k >= static_cast<int>(int_terms.size()) || seen[k])
            throw std::invalid_argument("verify_classical_split: bad partition index");
        seen[k] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw std::invalid_argument("verify_classical_split: partition does not cover all terms");

    for (int k : partition.a_terms)
        if (int_terms[k].acts_on(probes.b)) return false;
    for (int k : partition.b_terms)
        if (int_terms[k].acts_on(probes.a)) return false;

    const auto a = select(int_terms, partition.a_terms);
    const auto b = select(int_terms, partition.b_terms);
    const auto comm = pauli::commutator(a, b);
    const double na = pauli::hs_norm(std::span<const Term>(a));
    const double nb = pauli::hs_norm(std::span<const Term>(b));
    return pauli::hs_norm(std::span<const pauli::WeightedString>(comm)) <= tol * na * nb;
}

std::optional<TermPartition> find_classical_split(std::span<const Term> int_terms,
                                                  ProbePair probes, int max_free_terms) {
    TermPartition fixed;
    std::vector<int> free_idx;
    for (int k = 0; k < static_cast<int>(int_terms.size()); ++k) {
        const bool on_a = int_terms[k].acts_on(probes.a);
        const bool on_b = int_terms[k].acts_on(probes.b);
        if (on_a && on_b) return std::nullopt; // no partition can respect containment
        if (on_a) fixed.a_terms.push_back(k);
        else if (on_b) fixed.b_terms.push_back(k);
        else free_idx.push_back(k);
    }
    if (static_cast<int>(free_idx.size()) > max_free_terms)
        throw std::invalid_argument("find_classical_split: " + std::to_string(free_idx.size()) +
                                    " probe-free terms exceed the cap of " +
                                    std::to_string(max_free_terms) +
                                    "; supply a partition and verify it instead");

    // Fail fast: order free terms by overlap with the probe-anchored supports.
    std::set<int> anchored;
    for (int k : fixed.a_terms)
        for (const auto& f : int_terms[k].factors) anchored.insert(f.site);
    for (int k : fixed.b_terms)
        for (const auto& f : int_terms[k].factors) anchored.insert(f.site);
    std::stable_sort(free_idx.begin(), free_idx.end(), [&](int u, int v) {
        auto overlap = [&](int k) {
            int c = 0;
            for (const auto& f : int_terms[k].factors) c += anchored.count(f.site);
            return c;
        };
        return overlap(u) > overlap(v);
    });

    auto commutes_with_all = [&](int k, const std::vector<int>& other) {
        return std::all_of(other.begin(), other.end(), [&](int o) {
            return pauli::strings_commute(int_terms[k].factors, int_terms[o].factors);
        });
    };

    for (int ka : fixed.a_terms)
        if (!commutes_with_all(ka, fixed.b_terms)) return std::nullopt;

    TermPartition cur = fixed;
    std::optional<TermPartition> found;
    auto dfs = [&](auto&& self, std::size_t depth) -> bool {
        if (depth == free_idx.size()) {
            if (verify_classical_split(int_terms, cur, probes)) {
                found = cur;
                return true;
            }
            return false;
        }
        const int k = free_idx[depth];
        if (commutes_with_all(k, cur.b_terms)) {
            cur.a_terms.push_back(k);
            if (self(self, depth + 1)) return true;
            cur.a_terms.pop_back();
        }
        if (commutes_with_all(k, cur.a_terms)) {
            cur.b_terms.push_back(k);
            if (self(self, depth + 1)) return true;
            cur.b_terms.pop_back();
        }
        return false;
    };
    dfs(dfs, 0);
    return found;
}

bool predict_zero_concurrence(const ChainModel& model, ProbePair probes) {
    const auto split = split_int_lf(model, probes);
    return find_classical_split(split.int_terms, probes).has_value();
}

} // namespace entspan
