#include "doctest.h"

#include "triconv/qubitconv.hpp"

#include <cmath>

using namespace triconv;

namespace {

CMat bloch_to_density(double x, double y, double z) {
    CMat m(2, 2);
    m(0, 0) = 0.5 * (1.0 + z);
    m(1, 1) = 0.5 * (1.0 - z);
    m(0, 1) = 0.5 * cxd(x, -y);
    m(1, 0) = 0.5 * cxd(x, y);
    return m;
}

std::array<double, 3> bloch_vector(const CMat& rho) {
    return {2.0 * rho(1, 0).real(), 2.0 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

}  // namespace

TEST_CASE("u4 at the origin and unitarity across a grid") {
    CMat u0 = u4(ConvParams(0, 0, 0));
    CMat expect(4, 4);
    expect << 1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1, 0;
    CHECK(max_abs_diff(u0, expect) == 0.0);

    for (int a = 0; a < 5; ++a)
        for (int t = 0; t < 5; ++t)
            for (int f = 0; f < 5; ++f) {
                ConvParams p(a * 1.3, t * 1.1 - 2.0, f * 1.7);
                CMat u = u4(p);
                CHECK(max_abs_diff(u.adjoint() * u, identity(4)) <= 1e-12);
                // rows 1 and 2 carry no parameters
                CHECK(u(0, 0) == cxd(1.0, 0.0));
                CHECK(u(1, 3) == cxd(1.0, 0.0));
            }
}

TEST_CASE("u4(0,0,pi) is a DCNOT variant exactly") {
    CMat u = u4(ConvParams(0, 0, M_PI));
    CMat dcnot = CMat::Zero(4, 4);  // |ab> -> |a^b, a>
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) dcnot(((a ^ b) << 1) | a, (a << 1) | b) = 1.0;
    CHECK(max_abs_diff(u, dcnot) <= 1e-15);
}

TEST_CASE("qubit kraus pair") {
    KrausSet k0 = qubit_kraus(ConvParams(0, 0, 0));
    CHECK(k0.ops[0](0, 0) == cxd(1.0, 0.0));
    CHECK(k0.ops[0](1, 1) == cxd(1.0, 0.0));
    CHECK(std::abs(k0.ops[0](1, 2)) == 0.0);
    CHECK(k0.ops[1](0, 3) == cxd(1.0, 0.0));

    // completeness across a parameter grid (KrausSet validates on build)
    for (int a = 0; a < 10; ++a)
        for (int t = 0; t < 10; ++t)
            for (int f = 0; f < 10; ++f) {
                KrausSet k = qubit_kraus(ConvParams(0.63 * a, 0.63 * t - M_PI, 0.63 * f));
                CMat acc = CMat::Zero(4, 4);
                for (const CMat& op : k.ops) acc += op.adjoint() * op;
                CHECK(max_abs_diff(acc, identity(4)) <= 1e-14);
            }
}

TEST_CASE("tracing the dilation reproduces the Kraus channel action") {
    Rng rng = make_rng(5);
    for (int t = 0; t < 20; ++t) {
        ConvParams p(1.1 * t, 0.7 * t - M_PI, 0.9 * t);
        CMat u = u4(p);
        KrausSet k = qubit_kraus(p);
        CMat rho = random_density(2, rng), sigma = random_density(2, rng);
        CMat via_kraus = CMat::Zero(2, 2);
        for (const CMat& op : k.ops) via_kraus += op * kron(rho, sigma) * op.adjoint();
        CMat big = u * kron(rho, sigma) * u.adjoint();
        CMat via_u = partial_trace(big, SubsystemShape{2, 2}, {0});
        CHECK(max_abs_diff(via_u, via_kraus) <= 1e-12);
    }
}

TEST_CASE("decomposition reproduces u4 up to a global phase") {
    for (ConvParams p : {ConvParams(0, 0, 0), ConvParams(M_PI / 3, M_PI / 2, M_PI / 5),
                         ConvParams(5.1, -2.3, 0.4)}) {
        GateCircuit c = decompose_u4(p);
        CHECK(distance_up_to_phase(u4(p), circuit_to_unitary(c)) <= 1e-12);
    }
}

TEST_CASE("factored form: phase gates around the theta-only core") {
    // u4(a,t,f) = [Z(a + f/2) x Z(f)] u4(0,t,0) [Z(-f/2) x Z(-f/2)], exactly
    for (ConvParams p : {ConvParams(0.9, 1.7, 2.8), ConvParams(0.1, -0.4, 5.9)}) {
        GateCircuit pre{{Gate::z(0, -p.phi / 2.0), Gate::z(1, -p.phi / 2.0)}};
        GateCircuit post{{Gate::z(0, p.alpha + p.phi / 2.0), Gate::z(1, p.phi)}};
        CMat m = circuit_to_unitary(post) * u4(ConvParams(0.0, p.theta, 0.0)) *
                 circuit_to_unitary(pre);
        CHECK(max_abs_diff(m, u4(p)) <= 1e-12);
    }
}

TEST_CASE("circuit_to_unitary basics") {
    CHECK(max_abs_diff(circuit_to_unitary(GateCircuit{}), identity(4)) == 0.0);

    CMat h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    CHECK(max_abs_diff(circuit_to_unitary(GateCircuit{{Gate::h(0)}}), kron(h, identity(2))) <=
          1e-15);

    GateCircuit two_cnots{{Gate::cnot(0, 1), Gate::cnot(0, 1)}};
    CHECK(max_abs_diff(circuit_to_unitary(two_cnots), identity(4)) <= 1e-15);

    GateCircuit bad{{Gate::cnot(1, 1)}};
    CHECK_THROWS_AS(circuit_to_unitary(bad), ValidationError);
}

TEST_CASE("circuit emitters") {
    GateCircuit c = decompose_u4(ConvParams(0.0, 0.7, 0.3));
    std::string text = circuit_text(c);
    CHECK(text.find("H 0\n") != std::string::npos);
    CHECK(text.find("CNOT 0,1\n") != std::string::npos);
    CHECK(text.find("CZ 0,1 ") != std::string::npos);

    std::string qasm = circuit_qasm(c);
    CHECK(qasm.find("OPENQASM 3.0;") != std::string::npos);
    CHECK(qasm.find("h q[0];") != std::string::npos);
    CHECK(qasm.find("cx q[0],q[1];") != std::string::npos);
    CHECK(qasm.find("cp(") != std::string::npos);
}

TEST_CASE("operator entanglement anchors") {
    CHECK(operator_entanglement(identity(4)) == doctest::Approx(0.0));
    CHECK(operator_entanglement(swap_matrix(2)) == doctest::Approx(0.75));

    CMat cnot = CMat::Zero(4, 4);
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    CHECK(operator_entanglement(cnot) == doctest::Approx(0.5));

    CHECK(operator_entanglement(swap_matrix(3)) == doctest::Approx(1.0 - 1.0 / 9.0));

    CHECK_THROWS_AS(operator_entanglement(CMat::Zero(4, 4)), ValidationError);
    CHECK_THROWS_AS(operator_entanglement(CMat::Zero(4, 3)), DimensionError);
}

TEST_CASE("entangling power and gate typicality anchors") {
    CHECK(entangling_power(swap_matrix(2)) == doctest::Approx(0.0));
    CHECK(gate_typicality(swap_matrix(2)) == doctest::Approx(1.0));
    CHECK(gate_typicality(identity(4)) == doctest::Approx(0.0));

    CMat cnot = CMat::Zero(4, 4);
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    CHECK(entangling_power(cnot) == doctest::Approx(2.0 / 3.0));
    CHECK(gate_typicality(cnot) == doctest::Approx(1.0 / 3.0));

    Rng rng = make_rng(7);
    CMat local = kron(haar_unitary(2, rng), haar_unitary(2, rng));
    CHECK(entangling_power(local) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(gate_typicality(local) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("family metrics across the grid") {
    for (int a = 0; a < 5; ++a)
        for (int t = 0; t < 5; ++t)
            for (int f = 0; f < 5; ++f) {
                ConvParams p(1.1 * a, 1.3 * t - M_PI, 1.2 * f);
                ConvMetrics m = conv_metrics(p);
                CHECK(std::abs(m.entangling_power - 2.0 / 3.0) <= 1e-10);
                CHECK(std::abs(m.gate_typicality - (3.0 - std::cos(p.theta)) / 6.0) <= 1e-10);
            }
    CHECK(conv_metrics(ConvParams(0, 0, 0)).gate_typicality == doctest::Approx(1.0 / 3.0));
    CHECK(conv_metrics(ConvParams(0, M_PI, 0)).gate_typicality == doctest::Approx(2.0 / 3.0));
    CHECK(conv_metrics(ConvParams(0, M_PI / 2, 0)).gate_typicality == doctest::Approx(0.5));

    // the two dilation conventions are complementary
    CMat u = u4(ConvParams(0.3, 1.1, 2.0));
    CHECK(gate_typicality(swap_matrix(2) * u) == doctest::Approx(1.0 - gate_typicality(u)));
}

TEST_CASE("monte-carlo entangling power") {
    McEstimate sw = mc_entangling_power(swap_matrix(2), 2000, 9);
    CHECK(sw.value == doctest::Approx(0.0));
    CHECK(sw.stderr_ == doctest::Approx(0.0));

    McEstimate est = mc_entangling_power(u4(ConvParams(0, M_PI / 2, 0)), 100000, 10);
    CHECK(std::abs(est.value - 2.0 / 3.0) <= 3.0 * est.stderr_);

    Rng rng = make_rng(11);
    for (int t = 0; t < 20; ++t) {
        CMat u = haar_unitary(4, rng);
        McEstimate mc = mc_entangling_power(u, 20000, 100 + static_cast<std::uint64_t>(t));
        CHECK(std::abs(mc.value - entangling_power(u)) <= 3.0 * mc.stderr_ + 1e-6);
    }

    CHECK_THROWS_AS(mc_entangling_power(identity(4), 0, 1), ValidationError);
}

TEST_CASE("noise rotation") {
    CMat rz = noise_rotation({0, 0, 1});
    CMat expect = CMat::Zero(2, 2);
    expect(0, 0) = cxd(0, 1);
    expect(1, 1) = cxd(0, -1);
    CHECK(max_abs_diff(rz, expect) <= 1e-15);

    CHECK(max_abs_diff(noise_rotation({0, 0, 0}), identity(2)) == 0.0);
    CHECK(max_abs_diff(noise_rotation({0, 0, 2}), -identity(2)) <= 1e-15);

    Rng rng = make_rng(13);
    std::normal_distribution<double> g;
    for (int t = 0; t < 20; ++t) {
        NoiseVector r{g(rng), g(rng), g(rng)};
        CMat rot = noise_rotation(r);
        CHECK(max_abs_diff(rot.adjoint() * rot, identity(2)) <= 1e-14);
    }
}

TEST_CASE("mitigation pipeline against the closed forms") {
    Rng rng = make_rng(17);
    std::normal_distribution<double> g;

    CVec zero = CVec::Zero(2), one = CVec::Zero(2);
    zero(0) = 1.0;
    one(1) = 1.0;

    // no noise: perfect round trip for arbitrary states and parameters
    for (int t = 0; t < 10; ++t) {
        CVec psi = haar_state(2, rng);
        ConvParams p(g(rng), g(rng), g(rng));
        CHECK(mitigation_pipeline(p, {0, 0, 0}, psi) == doctest::Approx(1.0));
    }

    // theta_opt = -pi/2 protects |1> against any collective rotation
    for (int t = 0; t < 50; ++t) {
        NoiseVector r{g(rng), g(rng), g(rng)};
        CHECK(mitigation_pipeline(ConvParams(g(rng), -M_PI / 2, g(rng)), r, one) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }

    // both closed forms across random noise and parameters
    for (int t = 0; t < 100; ++t) {
        NoiseVector r{g(rng), g(rng), g(rng)};
        ConvParams p(g(rng), g(rng), g(rng));
        CHECK(std::abs(mitigation_pipeline(p, r, zero) - mitigation_closed_form(p.theta, r, 0)) <=
              1e-9);
        CHECK(std::abs(mitigation_pipeline(p, r, one) - mitigation_closed_form(p.theta, r, 1)) <=
              1e-9);
    }

    CVec unnorm = CVec::Zero(2);
    unnorm(0) = 2.0;
    CHECK_THROWS_AS(mitigation_pipeline(ConvParams(0, 0, 0), {1, 0, 0}, unnorm), ValidationError);
}

TEST_CASE("mitigation closed forms at pinned points") {
    CHECK(mitigation_closed_form(-M_PI / 2, {0.3, -1.2, 0.8}, 1) == doctest::Approx(1.0));
    // noise along z: w = 0, basis 1 is untouched for any theta
    CHECK(mitigation_closed_form(2.2, {0, 0, 1.7}, 1) == doctest::Approx(1.0));
    CHECK(mitigation_closed_form(0.0, {1, 0, 0}, 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mitigation_closed_form(0.0, {1, 0, 0}, 2), ValidationError);
}

TEST_CASE("outputs of the theta sweep stay in a plane of the Bloch ball") {
    Rng rng = make_rng(19);
    CVec a = haar_state(2, rng), b = haar_state(2, rng);
    CMat rho = a * a.adjoint(), sigma = b * b.adjoint();

    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i < 40; ++i) {
        double theta = -M_PI + i * (2.0 * M_PI / 40.0);
        KrausSet k = qubit_kraus(ConvParams(0.0, theta, 0.0));
        CMat out = CMat::Zero(2, 2);
        for (const CMat& op : k.ops) out += op * kron(rho, sigma) * op.adjoint();
        pts.push_back(bloch_vector(out));
    }
    // affine rank <= 2: third singular value of the centered point cloud vanishes
    Eigen::MatrixXd m(3, static_cast<Eigen::Index>(pts.size() - 1));
    for (size_t i = 1; i < pts.size(); ++i)
        for (int c = 0; c < 3; ++c)
            m(c, static_cast<Eigen::Index>(i - 1)) = pts[i][static_cast<size_t>(c)] -
                                                     pts[0][static_cast<size_t>(c)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    CHECK(svd.singularValues()(2) <= 1e-9);
}

TEST_CASE("gate convention report singles out the matching reading") {
    auto report = dcnot_convention_report();
    int matches = 0;
    for (const auto& f : report) {
        if (!f.matches) continue;
        ++matches;
        CHECK(f.point == "(0,3.14159,0)");
        CHECK(f.arg_order == "(alpha,phi,theta)");
        bool known = f.target == "DCNOT |ab>->|a^b,a>" || f.target == "SWAP.CNOT";
        CHECK(known);
    }
    CHECK(matches == 2);
    // at (0,0,pi/2) nothing matches even up to a global phase
    for (const auto& f : report)
        if (f.point.find("1.5707") != std::string::npos) CHECK_FALSE(f.matches);
}

TEST_CASE("params normalize into their ranges") {
    ConvParams p(7.0, 4.0, -1.0);
    CHECK(p.alpha >= 0.0);
    CHECK(p.alpha < 2.0 * M_PI);
    CHECK(p.theta >= -M_PI);
    CHECK(p.theta <= M_PI);
    CHECK(p.phi >= 0.0);
    CHECK(p.phi < 2.0 * M_PI);
    CHECK(max_abs_diff(u4(p), u4(ConvParams(7.0 - 2.0 * M_PI, 4.0 - 2.0 * M_PI, -1.0 + 2.0 * M_PI))) <=
          1e-12);
    CHECK_THROWS_AS(ConvParams(std::nan(""), 0.0, 0.0), ValidationError);
}

TEST_CASE("bloch helper is consistent") {
    CMat rho = bloch_to_density(0.3, -0.2, 0.5);
    auto v = bloch_vector(rho);
    CHECK(v[0] == doctest::Approx(0.3));
    CHECK(v[1] == doctest::Approx(-0.2));
    CHECK(v[2] == doctest::Approx(0.5));
}
