#include "entspan/entanglement.hpp"
#include "entspan/exact.hpp"
#include "entspan/model.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace entspan;
using namespace std::complex_literals;

namespace {

TwoSpinState bell_phi() { // (|00> + |11>)/sqrt(2)
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v[0] = v[3] = 1.0 / std::sqrt(2.0);
    return TwoSpinState{v * v.adjoint()};
}

TwoSpinState werner(double p) { // p |Psi-><Psi-| + (1-p) I/4
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v[1] = 1.0 / std::sqrt(2.0);
    v[2] = -1.0 / std::sqrt(2.0);
    return TwoSpinState{p * (v * v.adjoint()) + (1.0 - p) * Eigen::Matrix4cd::Identity() / 4.0};
}

TwoSpinState random_state(std::mt19937& gen, int rank = 4) {
    std::normal_distribution<double> g;
    Eigen::Matrix4cd x = Eigen::Matrix4cd::Zero();
    for (int c = 0; c < rank; ++c)
        for (int r = 0; r < 4; ++r) x(r, c) = std::complex<double>(g(gen), g(gen));
    Eigen::Matrix4cd rho = x * x.adjoint();
    rho /= rho.trace().real();
    return TwoSpinState{rho};
}

Eigen::Matrix2cd random_su2(std::mt19937& gen) {
    std::normal_distribution<double> g;
    const std::complex<double> a(g(gen), g(gen)), b(g(gen), g(gen));
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    Eigen::Matrix2cd u;
    u << a / n, -std::conj(b) / n, b / n, std::conj(a) / n;
    return u;
}

TwoSpinState random_separable(std::mt19937& gen) {
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    double wsum = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double w = u(gen);
        Eigen::Vector2cd a = random_su2(gen).col(0), b = random_su2(gen).col(0);
        Eigen::Vector4cd prod;
        prod << a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1];
        rho += w * (prod * prod.adjoint());
        wsum += w;
    }
    return TwoSpinState{rho / wsum};
}

const TwoSpinState& appendix_state() {
    static const TwoSpinState rho = [] {
        const auto model = build_general(3, {two_site(0, Pauli::X, 1, Pauli::X, 1.0),
                                             two_site(1, Pauli::X, 2, Pauli::X, 1.0),
                                             single_site(0, Pauli::Z, 1.0),
                                             single_site(2, Pauli::Z, 1.0)});
        const std::array<int, 2> keep = {0, 2};
        const auto rdm = partial_trace_keep(ground_state_dm(to_dense(model)), keep);
        // reorder into the (sigma-z = -1 first) basis the reference values use
        Eigen::Matrix4cd flipped;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) flipped(r, c) = rdm.mat(3 - r, 3 - c);
        return TwoSpinState{flipped};
    }();
    return rho;
}

} // namespace

TEST_CASE("concurrence reference values") {
    CHECK(concurrence(bell_phi()) == doctest::Approx(1.0));
    CHECK(concurrence(TwoSpinState{Eigen::Matrix4cd::Identity() / 4.0}) == doctest::Approx(0.0));
    CHECK(concurrence(werner(0.9)) == doctest::Approx(0.85).epsilon(1e-10));

    SUBCASE("werner closed form max(0, (3p-1)/2) on a p grid") {
        for (double p = 0.0; p <= 1.0; p += 0.05) {
            const double expected = std::max(0.0, (3 * p - 1) / 2);
            CHECK(concurrence(werner(p)) == doctest::Approx(expected).epsilon(1e-8));
        }
    }
    SUBCASE("appendix reduced state carries no entanglement") {
        CHECK(concurrence(appendix_state()) < 1e-10);
    }
}

TEST_CASE("concurrence is invariant under local unitaries") {
    std::mt19937 gen(11);
    for (int rep = 0; rep < 20; ++rep) {
        const TwoSpinState rho = random_state(gen);
        const double c0 = concurrence(rho);
        const Eigen::Matrix2cd u1 = random_su2(gen), u2 = random_su2(gen);
        Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) u.block<2, 2>(2 * i, 2 * j) = u1(i, j) * u2;
        const TwoSpinState rot{u * rho.mat * u.adjoint()};
        CHECK(concurrence(rot) == doctest::Approx(c0).epsilon(1e-8));
        CHECK(concurrence(rho) >= 0.0);
        CHECK(concurrence(rho) <= 1.0);
    }
}

TEST_CASE("von Neumann entropy") {
    Eigen::MatrixXcd pure = Eigen::MatrixXcd::Zero(2, 2);
    pure(0, 0) = 1.0;
    CHECK(von_neumann_entropy(pure) == doctest::Approx(0.0));
    CHECK(von_neumann_entropy(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(2, 2) / 2.0)) ==
          doctest::Approx(std::log(2.0)));
    Eigen::MatrixXcd mix = Eigen::MatrixXcd::Zero(2, 2);
    mix(0, 0) = 0.75;
    mix(1, 1) = 0.25;
    CHECK(von_neumann_entropy(mix) ==
          doctest::Approx(-0.75 * std::log(0.75) - 0.25 * std::log(0.25)));
}

TEST_CASE("mutual information") {
    SUBCASE("product state has none") {
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        rho(0, 0) = 0.6 * 0.3;
        rho(1, 1) = 0.6 * 0.7;
        rho(2, 2) = 0.4 * 0.3;
        rho(3, 3) = 0.4 * 0.7;
        CHECK(mutual_information(TwoSpinState{rho}) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("bell state carries 2 ln 2") {
        CHECK(mutual_information(bell_phi()) == doctest::Approx(2 * std::log(2.0)));
    }
    SUBCASE("classical correlation carries ln 2") {
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        rho(0, 0) = 0.5;
        rho(3, 3) = 0.5;
        CHECK(mutual_information(TwoSpinState{rho}) == doctest::Approx(std::log(2.0)));
    }
    SUBCASE("nonnegative on random states") {
        std::mt19937 gen(13);
        for (int rep = 0; rep < 10; ++rep)
            CHECK(mutual_information(random_state(gen)) > -1e-10);
    }
}

TEST_CASE("zero discord block criterion") {
    SUBCASE("product state passes") {
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        rho(0, 0) = 0.18;
        rho(1, 1) = 0.42;
        rho(2, 2) = 0.12;
        rho(3, 3) = 0.28;
        CHECK(zero_discord_test(TwoSpinState{rho}).zero_discord);
    }
    SUBCASE("diagonal classical mixture passes") {
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        rho(0, 0) = 0.4;
        rho(3, 3) = 0.6;
        CHECK(zero_discord_test(TwoSpinState{rho}).zero_discord);
    }
    SUBCASE("appendix matrix fails with the documented witness") {
        const auto res = zero_discord_test(appendix_state());
        CHECK_FALSE(res.zero_discord);
        REQUIRE(res.witness.has_value());
        CHECK(res.witness->description == "[rho^11, rho^12]");
        CHECK(res.witness->forward(0, 1).real() == doctest::Approx(0.09107).epsilon(5e-4));
        CHECK(res.witness->forward(1, 0).real() == doctest::Approx(0.01562).epsilon(5e-4));
        // the reverse product swaps the entries
        CHECK(res.witness->reverse(0, 1).real() == doctest::Approx(0.01562).epsilon(5e-4));
    }
    SUBCASE("block criterion holds in a rotated classical frame") {
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        rho(0, 0) = 0.7;
        rho(3, 3) = 0.3;
        std::mt19937 gen(17);
        const Eigen::Matrix2cd u1 = random_su2(gen);
        Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                u.block<2, 2>(2 * i, 2 * j) = u1(i, j) * Eigen::Matrix2cd::Identity();
        const TwoSpinState rot{u * rho * u.adjoint()};
        CHECK(zero_discord_test(rot, 1e-8, 0).zero_discord);
    }
}

TEST_CASE("discord optimizer") {
    SUBCASE("product state has none") {
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        rho(0, 0) = 0.18;
        rho(1, 1) = 0.42;
        rho(2, 2) = 0.12;
        rho(3, 3) = 0.28;
        const auto rep = discord(TwoSpinState{rho});
        CHECK(std::abs(rep.discord) < 1e-6);
        CHECK(rep.zero_discord);
    }
    SUBCASE("bell state has ln 2") {
        const auto rep = discord(bell_phi());
        CHECK(rep.discord == doctest::Approx(std::log(2.0)).epsilon(1e-4));
        CHECK(rep.mutual_info == doctest::Approx(2 * std::log(2.0)));
    }
    SUBCASE("appendix state has strictly positive discord") {
        const auto rep = discord(appendix_state());
        CHECK(rep.discord > 1e-3);
        CHECK_FALSE(rep.zero_discord);
        CHECK(rep.classical_info <= rep.mutual_info + 1e-8);
        CHECK(rep.discord >= -1e-8);
    }
    SUBCASE("grid precondition") {
        CHECK_THROWS_AS(discord(bell_phi(), 4), std::invalid_argument);
    }
}

TEST_CASE("block criterion and optimizer agree near zero") {
    std::mt19937 gen(19);
    for (int rep = 0; rep < 8; ++rep) {
        const TwoSpinState rho = random_separable(gen);
        const auto zd = zero_discord_test(rho, 1e-8);
        const auto dr = discord(rho, 32);
        if (zd.zero_discord) CHECK(dr.discord < 1e-4);
        if (dr.discord < 1e-6) {
            const auto relaxed = zero_discord_test(rho, 1e-4);
            CHECK(relaxed.zero_discord);
        }
    }
    for (int rep = 0; rep < 4; ++rep) {
        const TwoSpinState rho = random_state(gen);
        const auto dr = discord(rho, 32);
        CHECK(dr.discord >= -1e-8);
    }
}

TEST_CASE("zero discord basis sweep option") {
    // the criterion is basis-independent; the sweep is a diagnostic that
    // must not change verdicts on clean cases
    const auto bad = zero_discord_test(appendix_state(), 1e-8, 4);
    CHECK_FALSE(bad.zero_discord);
    REQUIRE(bad.witness.has_value());

    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    rho(0, 0) = 0.55;
    rho(3, 3) = 0.45;
    CHECK(zero_discord_test(TwoSpinState{rho}, 1e-8, 4).zero_discord);
}

TEST_CASE("swapped exchanges the qubit roles") {
    std::mt19937 gen(29);
    const TwoSpinState rho = random_state(gen);
    const TwoSpinState sw = rho.swapped();
    CHECK((sw.swapped().mat - rho.mat).cwiseAbs().maxCoeff() == 0.0);
    CHECK((reduced_first(sw) - reduced_second(rho)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(concurrence(sw) == doctest::Approx(concurrence(rho)).epsilon(1e-10));
}
