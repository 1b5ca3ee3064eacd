#pragma once

#include "entspan/model.hpp"

#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace entspan {

namespace pauli {

/// Pauli string with a complex weight, the closure of Term under products.
struct WeightedString {
    std::vector<PauliFactor> factors; // sorted, strictly increasing sites
    std::complex<double> coeff;
};

/// Product of two Pauli strings (single string with a phase).
WeightedString product(const WeightedString& a, const WeightedString& b);

/// True iff the strings commute: they share an even number of sites with
/// differing Pauli labels.
bool strings_commute(std::span<const PauliFactor> a, std::span<const PauliFactor> b);

/// Commutator of two real-weighted term sums, collected to canonical
/// strings with exact cancellation of equal-and-opposite products.
std::vector<WeightedString> commutator(std::span<const Term> a, std::span<const Term> b);

/// sqrt(sum |coeff|^2) of a string sum: the Frobenius norm normalized by
/// 2^{n/2} (strings are orthogonal under the normalized trace inner product).
double hs_norm(std::span<const WeightedString> s);
double hs_norm(std::span<const Term> s);

} // namespace pauli

/// Assignment of the interaction terms to H_A (owning probe a) and H_B
/// (owning probe b); indices refer to the int_terms list order.
struct TermPartition {
    std::vector<int> a_terms;
    std::vector<int> b_terms;
};

/// True iff the partition covers all terms, respects probe containment
/// (no B term touches probe a and vice versa) and [H_A, H_B] = 0 within
/// tol * |H_A| * |H_B| (symbolic Pauli commutator; exact up to rounding).
bool verify_classical_split(std::span<const Term> int_terms, const TermPartition& partition,
                            ProbePair probes, double tol = 1e-10);

/// Exhaustive assignment of probe-free terms to the two sides, pruned by
/// pairwise commutation against the opposite side; the first verified
/// partition is returned.  Splits that rely on cancellation between
/// non-commuting term pairs are outside this search (every example decided
/// in practice is decided at term granularity).  Throws when more than
/// max_free_terms probe-free terms would make the search exponential.
std::optional<TermPartition> find_classical_split(std::span<const Term> int_terms,
                                                  ProbePair probes, int max_free_terms = 20);

/// Theorem-1 predicate: true guarantees zero ground-state concurrence
/// between the probes for every choice of probe local fields; false is
/// inconclusive (no term-level split found).
bool predict_zero_concurrence(const ChainModel& model, ProbePair probes);

} // namespace entspan
