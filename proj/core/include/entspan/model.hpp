#pragma once

#include "entspan/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace entspan {

/// Single-site Pauli label.  Identity factors are never stored; a Term's
/// factor list holds only X/Y/Z.
enum class Pauli : std::uint8_t { X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

struct PauliFactor {
    int site;
    Pauli label;

    friend bool operator==(const PauliFactor&, const PauliFactor&) = default;
    friend auto operator<=>(const PauliFactor&, const PauliFactor&) = default;
};

/// One Pauli-string summand of a Hamiltonian: coeff * prod_k sigma_{site_k}^{label_k}.
/// Factors are kept sorted by site with strictly increasing indices.
struct Term {
    std::vector<PauliFactor> factors;
    double coeff = 0.0;

    Term() = default;
    Term(std::vector<PauliFactor> f, double c);

    bool acts_on(int site) const;
    std::string to_string() const; // e.g. "1.5 * x3 z5" (0-based sites)
};

Term single_site(int site, Pauli p, double coeff);
Term two_site(int a, Pauli pa, int b, Pauli pb, double coeff);

struct ProbePair {
    int a = 0;
    int b = 0;
};

/// Symbolic spin-chain Hamiltonian: real-coefficient sum of Pauli strings on
/// n_sites spin-1/2 sites.  Canonical form: factor lists sorted, duplicate
/// strings merged, zero summands dropped, terms ordered lexicographically.
/// Site 0 is the most significant tensor factor in any dense assembly.
struct ChainModel {
    int n_sites = 0;
    std::vector<Term> terms;
};

/// Validates sites/coefficients, canonicalizes.  Throws std::invalid_argument
/// on out-of-range sites or non-finite coefficients.
ChainModel build_general(int n_sites, std::vector<Term> terms);

/// Canonicalize a term list in place (sort + merge + drop zeros).
void canonicalize(std::vector<Term>& terms);

/// H_LF = single-site terms on a probe; H_int = everything else.
/// The two lists partition the model's terms exactly.
struct IntLfSplit {
    std::vector<Term> int_terms;
    std::vector<Term> lf_terms;
};
IntLfSplit split_int_lf(const ChainModel& model, ProbePair probes);

void validate_probes(const ChainModel& model, ProbePair probes);

/// Four-spin-boundary Hamiltonian: probe spins 0 and n-1 attach to mediator
/// ends through sites 1 and n-2.  j_a couples (0,1), jt_a couples (1,2),
/// jt_b couples (n-3,n-2), j_b couples (n-2,n-1); each is a 3x3 real tensor
/// J[i][j] multiplying sigma^i x sigma^j.  h1/h2/hn1/hn are local fields on
/// sites 0, 1, n-2, n-1.  media_terms must not touch those four sites.
ChainModel build_boundary_field_model(int n,
                                      const std::array<std::array<double, 3>, 3>& j_a,
                                      const std::array<std::array<double, 3>, 3>& jt_a,
                                      const std::array<std::array<double, 3>, 3>& jt_b,
                                      const std::array<std::array<double, 3>, 3>& j_b,
                                      const std::array<double, 3>& h1,
                                      const std::array<double, 3>& h2,
                                      const std::array<double, 3>& hn1,
                                      const std::array<double, 3>& hn,
                                      const std::vector<Term>& media_terms);

struct XYChainParams {
    int n = 100;
    double gamma = 0.0;
    int alpha = +1;       // sign of the mediator x-coupling, +1 or -1
    double h0 = 0.0;      // strong z-field (demo) / uniform mediator field
    double coupling = 0.02; // probe boundary coupling (enhancement model)
    std::vector<double> fields; // per-site z-fields on sites 1..n-2 (enhancement)
};

/// XY chain with strong fields h0 on sites 1 and n-2 and the compensating
/// (1-gamma^2)/h0 z-fields on sites 0, 2, n-3, n-1; all bonds carry
/// (1+gamma) XX + (1-gamma) YY.  Requires n >= 6 and h0 != 0.
ChainModel build_xy_demo(const XYChainParams& p);

/// The weak-coupling mediator-enhancement chain: mediator XY bonds
/// alpha(1+gamma) XX + (1-gamma) YY on sites 1..n-2, per-site z-fields there,
/// and fixed `coupling` XX+YY bonds attaching the probes at both ends.
/// fields.size() must be n-2.
ChainModel build_xy_enhancement(const XYChainParams& p);

struct RandomCouplingParams {
    int n = 8;
    double j = 0.25;        // boundary XX+YY coupling
    double amplitude = 0.05; // half-width of the uniform dJ distribution
    std::uint64_t seed = 0;  // recorded by the harness; streams are external
};

/// XX backbone with weak boundary bonds plus uniform random two-site
/// perturbations dJ^{ij} sigma^i sigma^j, i,j in {0,x,y,z}, on every bond,
/// excluding the (0,0) component (a pure energy shift cannot affect any
/// reduced state).  Draw order: bonds left to right, (i,j) row-major.
ChainModel build_random_coupling(const RandomCouplingParams& p, RngStream& rng);

/// JSON model schema: {"n": int, "terms": [{"sites": [...], "paulis": [...],
/// "coeff": f}]}.  Sites are 1-based on the wire (CLI convention), 0-based
/// in memory.
std::string model_to_json(const ChainModel& model);
ChainModel model_from_json(const std::string& text);

} // namespace entspan
