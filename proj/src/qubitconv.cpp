#include "triconv/qubitconv.hpp"

#include "triconv/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace triconv {

namespace {

double wrap_to(double x, double lo, double hi) {
    const double span = hi - lo;
    double y = std::fmod(x - lo, span);
    if (y < 0) y += span;
    return y + lo;
}

const cxd kI(0.0, 1.0);

}  // namespace

ConvParams::ConvParams(double a, double t, double f) {
    if (!std::isfinite(a) || !std::isfinite(t) || !std::isfinite(f))
        throw ValidationError("convolution parameters must be finite");
    alpha = wrap_to(a, 0.0, 2.0 * M_PI);
    theta = wrap_to(t, -M_PI, M_PI);
    phi = wrap_to(f, 0.0, 2.0 * M_PI);
}

CMat u4(const ConvParams& p) {
    const double c = std::cos(p.theta / 2.0), s = std::sin(p.theta / 2.0);
    const cxd ea = std::polar(1.0, p.alpha), ef = std::polar(1.0, p.phi);
    CMat u = CMat::Zero(4, 4);
    u(0, 0) = 1.0;
    u(1, 3) = 1.0;
    u(2, 1) = ea * c;
    u(2, 2) = ea * s;
    u(3, 1) = ea * ef * s;
    u(3, 2) = -ea * ef * c;
    return u;
}

KrausSet qubit_kraus(const ConvParams& p) {
    const double c = std::cos(p.theta / 2.0), s = std::sin(p.theta / 2.0);
    const cxd ea = std::polar(1.0, p.alpha), ef = std::polar(1.0, p.phi);
    CMat k1 = CMat::Zero(2, 4), k2 = CMat::Zero(2, 4);
    k1(0, 0) = 1.0;
    k1(1, 1) = ea * c;
    k1(1, 2) = ea * s;
    k2(0, 3) = 1.0;
    k2(1, 1) = ea * ef * s;
    k2(1, 2) = -ea * ef * c;
    return KrausSet({k1, k2});
}

Gate Gate::h(int wire) { return {GateKind::H, wire, -1, 0.0}; }
Gate Gate::cnot(int control, int target) { return {GateKind::CNOT, control, target, 0.0}; }
Gate Gate::z(int wire, double angle) { return {GateKind::Z, wire, -1, angle}; }
Gate Gate::x(int wire, double angle) { return {GateKind::X, wire, -1, angle}; }
Gate Gate::cz(int control, int target, double angle) { return {GateKind::CZ, control, target, angle}; }
Gate Gate::cx(int control, int target, double angle) { return {GateKind::CX, control, target, angle}; }
Gate Gate::phase(int wire, double angle) { return {GateKind::PHASE, wire, -1, angle}; }

namespace {

CMat single_qubit_matrix(GateKind kind, double a) {
    CMat m(2, 2);
    switch (kind) {
        case GateKind::H:
            m << 1, 1, 1, -1;
            return m / std::sqrt(2.0);
        case GateKind::Z:
            m << 1, 0, 0, std::polar(1.0, a);
            return m;
        case GateKind::X: {
            // |+><+| + e^{ia} |-><-|
            CMat h(2, 2);
            h << 1, 1, 1, -1;
            h /= std::sqrt(2.0);
            CMat z(2, 2);
            z << 1, 0, 0, std::polar(1.0, a);
            return h * z * h;
        }
        case GateKind::PHASE:
            return std::polar(1.0, a) * CMat::Identity(2, 2);
        default:
            throw ValidationError("not a single-qubit gate");
    }
}

CMat embed_single(const CMat& g, int wire) {
    if (wire == 0) return kron(g, CMat::Identity(2, 2));
    if (wire == 1) return kron(CMat::Identity(2, 2), g);
    throw ValidationError("wire out of range for a two-wire circuit");
}

CMat controlled(const CMat& g, int control, int target) {
    if (control == target || control < 0 || control > 1 || target < 0 || target > 1)
        throw ValidationError("controlled gate needs distinct wires in {0,1}");
    CMat m = CMat::Identity(4, 4);
    // basis index b = 2*w0 + w1
    for (int t = 0; t < 2; ++t)
        for (int t2 = 0; t2 < 2; ++t2) {
            int row = control == 0 ? (2 + (t ? 1 : 0)) : (t * 2 + 1);
            int col = control == 0 ? (2 + (t2 ? 1 : 0)) : (t2 * 2 + 1);
            m(row, col) = g(t, t2);
        }
    return m;
}

}  // namespace

CMat circuit_to_unitary(const GateCircuit& c) {
    CMat u = CMat::Identity(4, 4);
    for (const Gate& g : c.gates) {
        CMat gm;
        switch (g.kind) {
            case GateKind::H:
            case GateKind::Z:
            case GateKind::X:
            case GateKind::PHASE:
                gm = embed_single(single_qubit_matrix(g.kind, g.param), g.wire);
                break;
            case GateKind::CNOT: {
                CMat x(2, 2);
                x << 0, 1, 1, 0;
                gm = controlled(x, g.wire, g.wire2);
                break;
            }
            case GateKind::CZ: {
                CMat z(2, 2);
                z << 1, 0, 0, std::polar(1.0, g.param);
                gm = controlled(z, g.wire, g.wire2);
                break;
            }
            case GateKind::CX:
                gm = controlled(single_qubit_matrix(GateKind::X, g.param), g.wire, g.wire2);
                break;
        }
        u = gm * u;
    }
    return u;
}

GateCircuit decompose_u4(const ConvParams& p) {
    GateCircuit c;
    c.gates = {
        Gate::h(0),
        Gate::h(1),
        Gate::cnot(0, 1),
        Gate::h(0),
        Gate::h(1),
        Gate::cnot(0, 1),
        Gate::z(0, p.alpha - p.theta / 2.0),
        Gate::cz(0, 1, M_PI / 2.0),
        Gate::cx(0, 1, p.theta),
        Gate::cz(0, 1, p.phi + M_PI / 2.0),
    };
    return c;
}

namespace {

std::string gate_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "H";
        case GateKind::CNOT: return "CNOT";
        case GateKind::Z: return "Z";
        case GateKind::X: return "X";
        case GateKind::CZ: return "CZ";
        case GateKind::CX: return "CX";
        case GateKind::PHASE: return "PHASE";
    }
    return "?";
}

bool has_param(GateKind k) { return k != GateKind::H && k != GateKind::CNOT; }

}  // namespace

std::string circuit_text(const GateCircuit& c) {
    std::ostringstream os;
    os.precision(17);
    for (const Gate& g : c.gates) {
        os << gate_name(g.kind) << " " << g.wire;
        if (g.wire2 >= 0) os << "," << g.wire2;
        if (has_param(g.kind)) os << " " << g.param;
        os << "\n";
    }
    return os.str();
}

std::string circuit_qasm(const GateCircuit& c) {
    std::ostringstream os;
    os.precision(17);
    os << "OPENQASM 3.0;\ninclude \"stdgates.inc\";\nqubit[2] q;\n";
    for (const Gate& g : c.gates) {
        switch (g.kind) {
            case GateKind::H:
                os << "h q[" << g.wire << "];\n";
                break;
            case GateKind::CNOT:
                os << "cx q[" << g.wire << "],q[" << g.wire2 << "];\n";
                break;
            case GateKind::Z:
                os << "p(" << g.param << ") q[" << g.wire << "];\n";
                break;
            case GateKind::X:
                os << "h q[" << g.wire << "];\np(" << g.param << ") q[" << g.wire
                   << "];\nh q[" << g.wire << "];\n";
                break;
            case GateKind::CZ:
                os << "cp(" << g.param << ") q[" << g.wire << "],q[" << g.wire2 << "];\n";
                break;
            case GateKind::CX:
                os << "h q[" << g.wire2 << "];\ncp(" << g.param << ") q[" << g.wire << "],q["
                   << g.wire2 << "];\nh q[" << g.wire2 << "];\n";
                break;
            case GateKind::PHASE:
                os << "gphase(" << g.param << ");\n";
                break;
        }
    }
    return os.str();
}

CMat swap_matrix(int n) {
    CMat s = CMat::Zero(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(i * n + j, j * n + i) = 1.0;
    return s;
}

double operator_entanglement(const CMat& u) {
    const int side = static_cast<int>(u.rows());
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(side))));
    if (n * n != side || u.cols() != side)
        throw DimensionError("operator_entanglement expects an N^2 x N^2 matrix");
    if (max_abs_diff(u.adjoint() * u, CMat::Identity(side, side)) > 1e-8)
        throw ValidationError("operator_entanglement: input is not unitary");

    // realignment Util_{(i,j),(k,l)} = U_{(i,k),(j,l)}
    CMat r(side, side);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) r(i * n + j, k * n + l) = u(i * n + k, j * n + l);
    Eigen::JacobiSVD<CMat> svd(r);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        const double pi = svd.singularValues()(i) * svd.singularValues()(i) / (n * n);
        sum += pi * pi;
    }
    return 1.0 - sum;
}

double entangling_power(const CMat& u) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(u.rows()))));
    const CMat s = swap_matrix(n);
    const double es = operator_entanglement(s);
    return (operator_entanglement(u) + operator_entanglement(u * s) - es) / es;
}

double gate_typicality(const CMat& u) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(u.rows()))));
    const CMat s = swap_matrix(n);
    const double es = operator_entanglement(s);
    return (operator_entanglement(u) - operator_entanglement(u * s) + es) / (2.0 * es);
}

ConvMetrics conv_metrics(const ConvParams& p) {
    const CMat u = u4(p);
    ConvMetrics m;
    m.entangling_power = entangling_power(u);
    m.gate_typicality = gate_typicality(swap_matrix(2) * u);
    return m;
}

McEstimate mc_entangling_power(const CMat& u, std::uint64_t samples, std::uint64_t seed) {
    if (samples == 0) throw ValidationError("mc_entangling_power needs at least one sample");
    const int side = static_cast<int>(u.rows());
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(side))));
    if (n * n != side) throw DimensionError("mc_entangling_power expects an N^2 x N^2 matrix");

    Rng rng = make_rng(seed);
    double acc = 0.0, acc2 = 0.0;
    for (std::uint64_t t = 0; t < samples; ++t) {
        CVec a = haar_state(n, rng), b = haar_state(n, rng);
        CVec in(side);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) in(i * n + j) = a(i) * b(j);
        CVec out = u * in;
        // rho_A = M M^dag with M the n x n reshaping of the output
        CMat mtx(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) mtx(i, j) = out(i * n + j);
        CMat rho_a = mtx * mtx.adjoint();
        const double lin = 1.0 - (rho_a * rho_a).trace().real();
        acc += lin;
        acc2 += lin * lin;
    }
    const double factor = static_cast<double>(n + 1) / static_cast<double>(n - 1);
    const double mean = acc / static_cast<double>(samples);
    const double var = std::max(acc2 / static_cast<double>(samples) - mean * mean, 0.0);
    McEstimate est;
    est.value = factor * mean;
    est.stderr_ = factor * std::sqrt(var / static_cast<double>(samples));
    est.samples = samples;
    return est;
}

double NoiseVector::magnitude() const { return std::sqrt(r1 * r1 + r2 * r2 + r3 * r3); }

double NoiseVector::unit3() const {
    const double m = magnitude();
    return m > 0.0 ? r3 / m : 0.0;
}

CMat noise_rotation(const NoiseVector& r) {
    const double m = r.magnitude();
    if (m == 0.0) return CMat::Identity(2, 2);
    const double c = std::cos(M_PI * m / 2.0), s = std::sin(M_PI * m / 2.0);
    const double x = r.r1 / m, y = r.r2 / m, z = r.r3 / m;
    CMat out(2, 2);
    out(0, 0) = c + kI * s * z;
    out(0, 1) = kI * s * x + s * y;
    out(1, 0) = kI * s * x - s * y;
    out(1, 1) = c - kI * s * z;
    return out;
}

double mitigation_pipeline(const ConvParams& p, const NoiseVector& r, const CVec& psi) {
    if (psi.size() != 2) throw DimensionError("mitigation_pipeline expects a qubit state");
    if (std::abs(psi.norm() - 1.0) > 1e-9)
        throw ValidationError("mitigation_pipeline: state is not normalized");
    const CMat u = u4(p);
    const CMat rot = noise_rotation(r);
    const CMat w = u * kron(rot, rot) * u.adjoint();
    CMat zero = CMat::Zero(2, 2);
    zero(0, 0) = 1.0;
    CMat rho = psi * psi.adjoint();
    CMat big = w * kron(rho, zero) * w.adjoint();
    CMat out = partial_trace(big, SubsystemShape::uniform(2, 2), {0});
    return std::real((psi.adjoint() * out * psi)(0, 0));
}

double mitigation_closed_form(double theta, const NoiseVector& r, int basis_state) {
    const double m = r.magnitude();
    const double r3 = r.unit3();
    const double w = 1.0 - r3 * r3;
    if (basis_state == 0) {
        const double s = std::sin(M_PI * m / 2.0);
        const double t = w * std::cos(M_PI * m) + r3 * r3 + 1.0;
        return w * w * s * s * s * s + 0.25 * t * t;
    }
    if (basis_state == 1) {
        const double loss = r3 * r3 * std::pow(std::cos(M_PI * m) - 1.0, 2) +
                            std::pow(std::sin(M_PI * m), 2);
        return 1.0 - 0.5 * w * (std::sin(theta) + 1.0) * loss;
    }
    throw ValidationError("basis_state must be 0 or 1");
}

double distance_up_to_phase(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("shape mismatch");
    Eigen::Index bi = 0, bj = 0;
    double best = 0.0;
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j)
            if (std::abs(b(i, j)) > best) {
                best = std::abs(b(i, j));
                bi = i;
                bj = j;
            }
    cxd phase(1.0, 0.0);
    if (best > 1e-12) {
        phase = a(bi, bj) / b(bi, bj);
        const double mag = std::abs(phase);
        phase = mag > 1e-12 ? phase / mag : cxd(1.0, 0.0);
    }
    return max_abs_diff(a, phase * b);
}

double convolution_entropy_growth(const ConvParams& p, int steps, int trials, std::uint64_t seed,
                                  bool fresh_inputs) {
    if (steps < 1 || trials < 1)
        throw ValidationError("convolution_entropy_growth needs steps >= 1 and trials >= 1");
    KrausSet k = qubit_kraus(p);
    Rng rng = make_rng(seed);
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
        CVec a = haar_state(2, rng);
        CMat omega = a * a.adjoint();
        for (int s = 0; s < steps; ++s) {
            CMat partner = omega;
            if (fresh_inputs) {
                CVec c = haar_state(2, rng);
                partner = c * c.adjoint();
            }
            CMat in = kron(omega, partner);
            CMat out = CMat::Zero(2, 2);
            for (const CMat& op : k.ops) out += op * in * op.adjoint();
            omega = (out + out.adjoint()) / 2.0;
            omega /= omega.trace().real();
        }
        acc += von_neumann_entropy(omega);
    }
    return acc / trials;
}

std::vector<GateMatchFinding> dcnot_convention_report() {
    CMat dcnot_b(4, 4), dcnot_a(4, 4);
    dcnot_b.setZero();
    dcnot_a.setZero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            dcnot_b((b << 1) | (a ^ b), (a << 1) | b) = 1.0;  // |ab> -> |b, a^b>
            dcnot_a(((a ^ b) << 1) | a, (a << 1) | b) = 1.0;  // |ab> -> |a^b, a>
        }
    CMat cnot(4, 4);
    cnot.setZero();
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    CMat scnot = swap_matrix(2) * cnot;

    struct Target {
        std::string name;
        CMat m;
    };
    std::vector<Target> targets = {{"DCNOT |ab>->|b,a^b>", dcnot_b},
                                   {"DCNOT |ab>->|a^b,a>", dcnot_a},
                                   {"SWAP.CNOT", scnot}};
    struct Order {
        std::string name;
        int map[3];  // printed slot -> (alpha, theta, phi) slot
    };
    std::vector<Order> orders = {{"(alpha,theta,phi)", {0, 1, 2}},
                                 {"(alpha,phi,theta)", {0, 2, 1}},
                                 {"(theta,alpha,phi)", {1, 0, 2}},
                                 {"(phi,theta,alpha)", {2, 1, 0}}};
    std::vector<std::array<double, 3>> points = {{0.0, 0.0, M_PI / 2.0}, {0.0, M_PI, 0.0}};

    std::vector<GateMatchFinding> out;
    for (const auto& pt : points) {
        std::ostringstream pn;
        pn << "(" << pt[0] << "," << pt[1] << "," << pt[2] << ")";
        for (const Order& ord : orders) {
            double vals[3] = {0.0, 0.0, 0.0};
            for (int slot = 0; slot < 3; ++slot) vals[ord.map[slot]] = pt[static_cast<size_t>(slot)];
            CMat u = u4(ConvParams(vals[0], vals[1], vals[2]));
            for (const Target& t : targets) {
                GateMatchFinding f;
                f.point = pn.str();
                f.arg_order = ord.name;
                f.target = t.name;
                f.distance = distance_up_to_phase(t.m, u);
                f.matches = f.distance <= 1e-10;
                out.push_back(std::move(f));
            }
        }
    }
    return out;
}

}  // namespace triconv
