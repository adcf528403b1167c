#include "triconv/coherify.hpp"

#include <algorithm>
#include <cmath>

namespace triconv {

std::string to_string(BlockScheme s) {
    switch (s) {
        case BlockScheme::identity: return "identity";
        case BlockScheme::fourier: return "fourier";
        case BlockScheme::mub: return "mub";
        case BlockScheme::custom: return "custom";
    }
    return "custom";
}

BlockScheme block_scheme_from_string(const std::string& s) {
    if (s == "identity") return BlockScheme::identity;
    if (s == "fourier") return BlockScheme::fourier;
    if (s == "mub") return BlockScheme::mub;
    if (s == "custom") return BlockScheme::custom;
    throw ValidationError("unknown block scheme '" + s + "'");
}

BlockBasisFamily::BlockBasisFamily(std::vector<CMat> b, BlockScheme s)
    : blocks(std::move(b)), scheme(s) {
    if (blocks.empty()) throw ValidationError("block family needs at least one block");
    const Eigen::Index n = blocks[0].rows();
    for (const CMat& blk : blocks) {
        if (blk.rows() != n || blk.cols() != n)
            throw DimensionError("all blocks must be square of the family dimension");
        if (max_abs_diff(blk.adjoint() * blk, CMat::Identity(n, n)) > 1e-9)
            throw ValidationError("block is not unitary within tolerance");
    }
}

namespace {

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

CMat fourier_matrix(int n) {
    CMat f(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            f(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                                 2.0 * M_PI * j * k / static_cast<double>(n));
    return f;
}

}  // namespace

BlockScheme default_scheme_for(int n) {
    return is_prime(n) ? BlockScheme::mub : BlockScheme::fourier;
}

BlockBasisFamily default_blocks(int n, BlockScheme scheme) {
    std::vector<CMat> blocks;
    switch (scheme) {
        case BlockScheme::identity:
            blocks.assign(static_cast<size_t>(n), CMat::Identity(n, n));
            break;
        case BlockScheme::fourier: {
            blocks.push_back(CMat::Identity(n, n));
            CMat f = fourier_matrix(n);
            for (int k = 1; k < n; ++k) blocks.push_back(f);
            break;
        }
        case BlockScheme::mub: {
            if (!is_prime(n)) throw ValidationError("mub blocks require prime dimension");
            blocks.push_back(CMat::Identity(n, n));
            // Wootters-Fields bases: row m of block j has components
            // w^{j k^2 + m k} / sqrt(N). For N = 2 this reduces to the
            // Hadamard-like basis with a phase.
            for (int j = 1; j < n; ++j) {
                CMat b(n, n);
                for (int m = 0; m < n; ++m)
                    for (int k = 0; k < n; ++k) {
                        const double phase = 2.0 * M_PI * ((j * k * k + m * k) % n) / n;
                        b(m, k) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), phase);
                    }
                blocks.push_back(b);
            }
            break;
        }
        case BlockScheme::custom:
            throw ValidationError("custom scheme has no default blocks");
    }
    return BlockBasisFamily(std::move(blocks), scheme);
}

DynamicalMatrix coherify_diagonal(const StochTensor& a) {
    AxisReport rep = validate(a);
    if (!rep.axis_stochastic(0))
        throw ValidationError("coherify_diagonal requires a tensor stochastic along axis 1");
    const auto& data = a.data();
    const int side = static_cast<int>(data.size());
    CMat d = CMat::Zero(side, side);
    for (int i = 0; i < side; ++i) d(i, i) = data[static_cast<size_t>(i)];
    return DynamicalMatrix(a.order(), a.dim(), std::move(d));
}

Coherification coherify_permutation(const StochTensor& t, const BlockBasisFamily& basis) {
    if (t.order() != 3) throw DimensionError("coherify_permutation expects an order-3 tensor");
    AxisReport rep = validate(t);
    if (!rep.is_permutation())
        throw ValidationError("coherify_permutation requires a tristochastic permutation tensor (" +
                              rep.classification() + ")");
    const int n = t.dim();
    if (basis.n_blocks() != n || basis.dim() != n)
        throw DimensionError("block family must hold N blocks of side N");

    std::vector<CMat> ops(static_cast<size_t>(n), CMat::Zero(n, n * n));
    for (int j = 0; j < n; ++j) {
        // nonzero columns of row j, ascending
        int slot = 0;
        for (int col = 0; col < n * n; ++col) {
            const int k = col / n, l = col % n;
            if (t.at({j, k, l}) < 0.5) continue;
            for (int i = 0; i < n; ++i)
                ops[static_cast<size_t>(i)](j, col) = basis.blocks[static_cast<size_t>(j)](slot, i);
            ++slot;
        }
        if (slot != n) throw ValidationError("permutation tensor row does not have N unit entries");
    }
    KrausSet kraus(std::move(ops));
    DynamicalMatrix choi = kraus_to_choi(kraus);
    return {std::move(kraus), std::move(choi)};
}

double channel_purity(const DynamicalMatrix& d) {
    return d.jamiolkowski_state().squaredNorm();
}

double c2_coherence(const DynamicalMatrix& d) {
    CMat r = d.jamiolkowski_state();
    double total = r.squaredNorm();
    double diag = r.diagonal().cwiseAbs2().sum();
    return total - diag;
}

double entropic_coherence(const DynamicalMatrix& d) {
    CMat r = d.jamiolkowski_state();
    RVec diag = r.diagonal().real().cwiseMax(0.0);
    HermEig eig = herm_eig(r);
    RVec vals = eig.eigenvalues.cwiseMax(0.0);
    return entropy_of_distribution(diag) - entropy_of_distribution(vals);
}

CoherenceReport coherence_report(const DynamicalMatrix& d) {
    CoherenceReport rep;
    rep.c2 = c2_coherence(d);
    rep.entropic = entropic_coherence(d);
    rep.purity = channel_purity(d);
    HermEig eig = herm_eig(d.jamiolkowski_state());
    rep.choi_spectrum.assign(eig.eigenvalues.data(), eig.eigenvalues.data() + eig.eigenvalues.size());
    return rep;
}

StochTensor qubit_tristochastic_tensor(double x) {
    if (x < 0.0 || x > 1.0) throw ValidationError("x must lie in [0,1]");
    const double y = 1.0 - x;
    return StochTensor(3, 2, {x, y, y, x, y, x, x, y});
}

Coherification coherify_qubit_tristochastic(double x, const CMat& u) {
    if (x < 0.0 || x > 1.0) throw ValidationError("x must lie in [0,1]");
    if (u.rows() != 2 || u.cols() != 2 || max_abs_diff(u.adjoint() * u, CMat::Identity(2, 2)) > 1e-9)
        throw ValidationError("linking matrix must be a 2x2 unitary");

    const double sx = std::sqrt(x), sy = std::sqrt(1.0 - x);
    CVec e1(2), e2(2);
    e1 << 1, 0;
    e2 << 0, 1;
    // column vectors of the two Kraus operators: norms fixed by A(x),
    // orthogonal pairs a|d, e|h, b|c, f|g, bases linked by -u
    CVec a = sx * e1, d = sx * e2;
    CVec b = sy * e1, c = sy * e2;
    CVec e = sy * (u * e1), h = sy * (u * e2);
    CVec f = -sx * (u * e1), g = -sx * (u * e2);

    std::vector<CMat> ops;
    for (int i = 0; i < 2; ++i) {
        CMat k(2, 4);
        k << a(i), b(i), c(i), d(i), e(i), f(i), g(i), h(i);
        ops.push_back(std::move(k));
    }
    KrausSet kraus(std::move(ops));
    DynamicalMatrix choi = kraus_to_choi(kraus);
    return {std::move(kraus), std::move(choi)};
}

Coherification coherify_qubit_tristochastic(double x) {
    CMat u(2, 2);  // theta = pi/2 rotation, the MUB preference
    const double r = 1.0 / std::sqrt(2.0);
    u << r, r, r, -r;
    return coherify_qubit_tristochastic(x, u);
}

bool diagonal_dependence_check(const KrausSet& k, const StochTensor& t, int trials,
                               std::uint64_t seed) {
    const int n = t.dim();
    const int m = t.order();
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto apply = [&](const std::vector<CMat>& args) {
        std::vector<CMat> factors = args;
        CMat in = kron_all(factors);
        CMat out = CMat::Zero(n, n);
        for (const CMat& op : k.ops) out += op * in * op.adjoint();
        return out;
    };

    for (int trial = 0; trial < trials; ++trial) {
        std::vector<CMat> base, perturbed;
        std::vector<ProbVector> diags;
        for (int arg = 0; arg < m - 1; ++arg) {
            CMat rho = random_density(n, rng);
            base.push_back(rho);
            // same diagonal, different off-diagonal entries
            CMat other = random_density(n, rng);
            CMat mix = other;
            for (int i = 0; i < n; ++i) mix(i, i) = rho(i, i);
            // mix may lose positivity; scale off-diagonals toward zero until PSD
            double scale = 1.0;
            for (int attempt = 0; attempt < 60; ++attempt) {
                CMat cand = mix;
                for (int r = 0; r < n; ++r)
                    for (int c2 = 0; c2 < n; ++c2)
                        if (r != c2) cand(r, c2) *= scale;
                Eigen::SelfAdjointEigenSolver<CMat> es(cand, Eigen::EigenvaluesOnly);
                if (es.eigenvalues().minCoeff() >= 0.0) {
                    mix = cand;
                    break;
                }
                scale *= 0.5;
            }
            perturbed.push_back(mix);
            diags.emplace_back(ProbVector(rho.diagonal().real()));
        }
        CMat out_base = apply(base);
        CMat out_pert = apply(perturbed);
        RVec d_base = out_base.diagonal().real();
        RVec d_pert = out_pert.diagonal().real();
        if ((d_base - d_pert).cwiseAbs().maxCoeff() > 1e-11) return false;
        ProbVector classical = apply_m(t, diags);
        if ((d_base - classical.entries).cwiseAbs().maxCoeff() > 1e-11) return false;
    }
    return true;
}

}  // namespace triconv
