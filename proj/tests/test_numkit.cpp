#include "doctest.h"

#include "triconv/numkit.hpp"
#include "triconv/random.hpp"

#include <cmath>

using namespace triconv;

namespace {

CMat perm2() {
    CMat p(2, 2);
    p << 0, 1, 1, 0;
    return p;
}

CMat random_hermitian(int n, Rng& rng) {
    CMat g = gaussian_matrix(n, n, rng);
    return (g + g.adjoint()) / 2.0;
}

}  // namespace

TEST_CASE("kron identity and delta selection") {
    CHECK(max_abs_diff(kron(identity(2), identity(2)), identity(4)) == 0.0);

    CMat d1 = CMat::Zero(2, 2), d2 = CMat::Zero(2, 2);
    d1(0, 0) = 1.0;
    d2(1, 1) = 1.0;
    CMat expect = CMat::Zero(4, 4);
    expect(1, 1) = 1.0;
    CHECK(max_abs_diff(kron(d1, d2), expect) == 0.0);
}

TEST_CASE("kron of shift matrices moves basis indices by index arithmetic") {
    // (P2 x P2)(e_0 x e_0) should land on index 1*2 + 1 = 3
    CMat p = kron(perm2(), perm2());
    CVec e0 = CVec::Zero(4);
    e0(0) = 1.0;
    CVec out = p * e0;
    for (int i = 0; i < 4; ++i) CHECK(std::abs(out(i) - (i == 3 ? 1.0 : 0.0)) == 0.0);
}

TEST_CASE("kron associativity") {
    Rng rng = make_rng(11);
    for (int t = 0; t < 5; ++t) {
        CMat a = gaussian_matrix(2, 3, rng), b = gaussian_matrix(3, 2, rng),
             c = gaussian_matrix(2, 2, rng);
        CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) <= 1e-13);
    }
}

TEST_CASE("partial trace of a product state") {
    Rng rng = make_rng(7);
    CMat rho = random_density(3, rng);
    CMat sigma = random_density(4, rng);
    sigma *= 0.7;  // non-unit trace exercises the Tr(sigma) factor
    CMat joint = kron(rho, sigma);
    CMat back = partial_trace(joint, SubsystemShape{3, 4}, {0});
    CHECK(max_abs_diff(back, 0.7 * rho) <= 1e-13);

    CHECK(max_abs_diff(partial_trace(identity(4), SubsystemShape{2, 2}, {0}), 2.0 * identity(2)) ==
          0.0);
}

TEST_CASE("partial trace of the maximally entangled projector") {
    CVec phi = CVec::Zero(4);
    phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
    CMat proj = phi * phi.adjoint();

    // brute-force oracle: (Tr_2 M)_{ab} = sum_j M_{(a,j),(b,j)}
    CMat oracle = CMat::Zero(2, 2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int j = 0; j < 2; ++j) oracle(a, b) += proj(a * 2 + j, b * 2 + j);

    CMat got = partial_trace(proj, SubsystemShape{2, 2}, {0});
    CHECK(max_abs_diff(got, oracle) == 0.0);
    CHECK(max_abs_diff(got, identity(2) / 2.0) <= 1e-15);
}

TEST_CASE("partial trace over everything equals the scalar trace") {
    Rng rng = make_rng(3);
    CMat m = gaussian_matrix(12, 12, rng);
    CMat tr = partial_trace(m, SubsystemShape{2, 3, 2}, {});
    CHECK(std::abs(tr(0, 0) - m.trace()) <= 1e-12);
}

TEST_CASE("partial trace shape mismatch") {
    CHECK_THROWS_AS(partial_trace(identity(5), SubsystemShape{2, 2}, {0}), DimensionError);
}

TEST_CASE("herm_eig basics") {
    HermEig e = herm_eig(identity(5));
    for (int i = 0; i < 5; ++i) CHECK(e.eigenvalues(i) == doctest::Approx(1.0));

    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    HermEig ed = herm_eig(d);
    CHECK(ed.eigenvalues(0) == doctest::Approx(3.0));
    CHECK(ed.eigenvalues(1) == doctest::Approx(1.0));
    CHECK(std::abs(ed.eigenvectors(0, 0)) == doctest::Approx(1.0));

    // sigma_x: eigenvalues {1,-1}, eigenvectors Hadamard columns up to phase
    HermEig ex = herm_eig(perm2());
    CHECK(ex.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(ex.eigenvalues(1) == doctest::Approx(-1.0));
    for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 2; ++r)
            CHECK(std::abs(ex.eigenvectors(r, c)) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("herm_eig reconstruction on random matrices up to side 64") {
    Rng rng = make_rng(99);
    for (int n : {2, 7, 16, 64}) {
        CMat m = random_hermitian(n, rng);
        HermEig e = herm_eig(m);
        CMat recon =
            e.eigenvectors * e.eigenvalues.cast<cxd>().asDiagonal() * e.eigenvectors.adjoint();
        CHECK(max_abs_diff(recon, m) <= 1e-10);
        for (int i = 1; i < n; ++i) CHECK(e.eigenvalues(i - 1) >= e.eigenvalues(i));
    }
}

TEST_CASE("herm_eig rejects non-Hermitian input") {
    CMat m = CMat::Zero(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(herm_eig(m), ValidationError);
}

TEST_CASE("von Neumann entropy") {
    CHECK(von_neumann_entropy(identity(6) / 6.0) == doctest::Approx(std::log(6.0)));

    CVec psi = CVec::Zero(3);
    psi(1) = 1.0;
    CHECK(von_neumann_entropy(psi * psi.adjoint()) == doctest::Approx(0.0));

    const int side = 9;  // N^2 with two equal nonzero levels
    CMat half = CMat::Zero(side, side);
    half(0, 0) = half(1, 1) = 0.5;
    CHECK(von_neumann_entropy(half) == doctest::Approx(std::log(2.0)));

    CMat bad = CMat::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    CHECK_THROWS_AS(von_neumann_entropy(bad), ValidationError);
}

TEST_CASE("subsystem shape flattening is row-major with subsystem 0 slowest") {
    SubsystemShape s{2, 3, 2};
    CHECK(s.total() == 12);
    CHECK(s.flatten({1, 2, 0}) == 10);
    CHECK(s.unflatten(10) == std::vector<int>{1, 2, 0});
}
