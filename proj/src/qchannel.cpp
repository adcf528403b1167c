#include "triconv/qchannel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace triconv {

DensityMatrix::DensityMatrix(CMat m) : matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols()) throw DimensionError("density matrix must be square");
    if (!is_hermitian(matrix, tols().herm))
        throw ValidationError("density matrix is not Hermitian within tolerance");
    const double tr = matrix.trace().real();
    if (std::abs(tr - 1.0) > 1e-7)
        throw ValidationError("density matrix trace " + std::to_string(tr) + " != 1");
    Eigen::SelfAdjointEigenSolver<CMat> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tols().psd)
        throw ValidationError("density matrix has negative eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()));
}

RVec DensityMatrix::diagonal() const { return matrix.diagonal().real(); }

DensityMatrix DensityMatrix::maximally_mixed(int n) {
    return DensityMatrix(CMat::Identity(n, n) / static_cast<double>(n));
}

DensityMatrix DensityMatrix::basis_state(int n, int k) {
    CMat m = CMat::Zero(n, n);
    m(k, k) = 1.0;
    return DensityMatrix(m);
}

DensityMatrix DensityMatrix::pure(const CVec& psi) {
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-9) throw ValidationError("pure state is not normalized");
    return DensityMatrix(psi * psi.adjoint());
}

double hs_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return (a.matrix - b.matrix).norm();
}

DynamicalMatrix::DynamicalMatrix(int parts_, int local_dim_, CMat m)
    : parts(parts_), local_dim(local_dim_), matrix(std::move(m)) {
    if (parts < 2) throw ValidationError("dynamical matrix needs at least 2 parts");
    long long side = 1;
    for (int i = 0; i < parts; ++i) side *= local_dim;
    if (matrix.rows() != matrix.cols() || matrix.rows() != side)
        throw DimensionError("dynamical matrix side != N^m");
    if (!is_hermitian(matrix, tols().herm))
        throw ValidationError("dynamical matrix is not Hermitian within tolerance");
}

CMat DynamicalMatrix::jamiolkowski_state() const {
    double denom = 1.0;
    for (int i = 0; i < parts - 1; ++i) denom *= local_dim;
    return matrix / denom;
}

KrausSet::KrausSet(std::vector<CMat> k) : ops(std::move(k)) {
    if (ops.empty()) throw ValidationError("empty Kraus set");
    const Eigen::Index rows = ops[0].rows();
    const Eigen::Index cols = ops[0].cols();
    CMat acc = CMat::Zero(cols, cols);
    for (const CMat& op : ops) {
        if (op.rows() != rows || op.cols() != cols)
            throw DimensionError("Kraus operators must share a common shape");
        acc += op.adjoint() * op;
    }
    const double dev = max_abs_diff(acc, CMat::Identity(cols, cols));
    if (dev > 1e-7) {
        std::ostringstream os;
        os << "Kraus completeness violated: ||sum K^dag K - I|| = " << dev;
        throw ValidationError(os.str());
    }
}

SubspaceBasis::SubspaceBasis(CMat c) : columns(std::move(c)) {
    if (columns.cols() == 0) throw ValidationError("empty subspace basis");
    const double dev =
        max_abs_diff(columns.adjoint() * columns, CMat::Identity(columns.cols(), columns.cols()));
    if (dev > 1e-8) throw ValidationError("subspace basis columns are not orthonormal");
}

SubspaceBasis SubspaceBasis::orthogonal_complement() const {
    const int n = ambient_dim();
    const int k = dim();
    if (k >= n) throw ValidationError("complement of the full space is empty");
    // complete the basis via full QR
    Eigen::HouseholderQR<CMat> qr(columns);
    CMat q = qr.householderQ();
    return SubspaceBasis(q.rightCols(n - k));
}

SubspaceBasis SubspaceBasis::coordinate(int n, const IndexSet& members) {
    if (members.members.empty()) throw ValidationError("empty coordinate subspace");
    CMat c = CMat::Zero(n, members.size());
    for (int j = 0; j < members.size(); ++j) c(members.members[static_cast<size_t>(j)], j) = 1.0;
    return SubspaceBasis(c);
}

bool is_channel(const DynamicalMatrix& d) {
    Eigen::SelfAdjointEigenSolver<CMat> es(d.matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tols().psd) return false;
    const int rest = d.side() / d.local_dim;
    std::vector<int> keep;
    for (int k = 1; k < d.parts; ++k) keep.push_back(k);
    CMat marg = partial_trace(d.matrix, d.shape(), keep);
    return max_abs_diff(marg, CMat::Identity(rest, rest)) <= 1e-8;
}

bool is_m_stochastic(const DynamicalMatrix& d) {
    if (!is_channel(d)) return false;
    const int rest = d.side() / d.local_dim;
    for (int traced = 0; traced < d.parts; ++traced) {
        std::vector<int> keep;
        for (int k = 0; k < d.parts; ++k)
            if (k != traced) keep.push_back(k);
        CMat marg = partial_trace(d.matrix, d.shape(), keep);
        if (max_abs_diff(marg, CMat::Identity(rest, rest)) > 1e-8) return false;
    }
    return true;
}

CMat apply_channel_raw(const DynamicalMatrix& d, const std::vector<CMat>& args) {
    const int m = d.parts;
    const int n = d.local_dim;
    if (static_cast<int>(args.size()) != m - 1)
        throw DimensionError("channel arity mismatch: expected " + std::to_string(m - 1) +
                             " inputs");
    std::vector<CMat> factors;
    factors.push_back(CMat::Identity(n, n));
    for (const CMat& a : args) {
        if (a.rows() != n || a.cols() != n) throw DimensionError("channel input dimension mismatch");
        factors.push_back(a.transpose());
    }
    CMat big = d.matrix * kron_all(factors);
    return partial_trace(big, d.shape(), {0});
}

DensityMatrix quantum_convolve(const DynamicalMatrix& d, const DensityMatrix& rho,
                               const DensityMatrix& sigma) {
    if (d.parts != 3) throw DimensionError("quantum_convolve needs a tripartite dynamical matrix");
    if (!is_channel(d)) throw ValidationError("quantum_convolve: dynamical matrix is not a channel");
    return DensityMatrix(apply_channel_raw(d, {rho.matrix, sigma.matrix}));
}

DensityMatrix apply_m_channel(const DynamicalMatrix& d, const std::vector<DensityMatrix>& args) {
    if (!is_channel(d)) throw ValidationError("apply_m_channel: dynamical matrix is not a channel");
    std::vector<CMat> raw;
    raw.reserve(args.size());
    for (const auto& a : args) raw.push_back(a.matrix);
    return DensityMatrix(apply_channel_raw(d, raw));
}

KrausSet choi_to_kraus(const DynamicalMatrix& d) {
    HermEig eig = herm_eig(d.matrix);
    const double lmax = eig.eigenvalues.size() ? eig.eigenvalues(0) : 0.0;
    if (lmax <= 0.0) throw ValidationError("choi_to_kraus: matrix is not positive");
    if (eig.eigenvalues.minCoeff() < -tols().psd)
        throw ValidationError("choi_to_kraus: matrix has negative eigenvalue " +
                              std::to_string(eig.eigenvalues.minCoeff()));
    const int n = d.local_dim;
    const int rest = d.side() / n;
    std::vector<CMat> ops;
    for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
        const double lam = eig.eigenvalues(i);
        if (lam < 1e-10 * lmax) break;
        CVec v = std::sqrt(lam) * eig.eigenvectors.col(i);
        CMat k(n, rest);
        for (int a = 0; a < n; ++a)
            for (int c = 0; c < rest; ++c) k(a, c) = v(a * rest + c);
        ops.push_back(std::move(k));
    }
    return KrausSet(std::move(ops));
}

DynamicalMatrix kraus_to_choi(const KrausSet& k) {
    const int n = k.out_dim();
    const int rest = k.in_dim();
    const int side = n * rest;
    int parts = 1;
    int acc = 1;
    while (acc < rest) {
        acc *= n;
        ++parts;
    }
    if (acc != rest) throw DimensionError("kraus_to_choi: input dimension is not a power of N");

    CMat d = CMat::Zero(side, side);
    for (const CMat& op : k.ops) {
        CVec v(side);
        for (int a = 0; a < n; ++a)
            for (int c = 0; c < rest; ++c) v(a * rest + c) = op(a, c);
        d += v * v.adjoint();
    }
    return DynamicalMatrix(parts, n, std::move(d));
}

CMat kraus_to_unitary(const KrausSet& k) {
    const int n = k.out_dim();
    if (k.count() != n)
        throw ValidationError("kraus_to_unitary needs exactly N operators, got " +
                              std::to_string(k.count()));
    if (k.in_dim() != n * n) throw DimensionError("kraus_to_unitary expects N x N^2 operators");
    CMat u = CMat::Zero(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a) u.row(a * n + i) = k.ops[static_cast<size_t>(i)].row(a);
    const double dev = max_abs_diff(u.adjoint() * u, CMat::Identity(n * n, n * n));
    if (dev > 1e-8)
        throw ValidationError("kraus_to_unitary: resulting matrix is not unitary, ||U^dag U - I|| = " +
                              std::to_string(dev));
    return u;
}

CMat unitary_channel_apply(const CMat& u, const CMat& rho, const CMat& sigma) {
    const int n = static_cast<int>(rho.rows());
    CMat big = u * kron(rho, sigma) * u.adjoint();
    return partial_trace(big, SubsystemShape::uniform(2, n), {0});
}

QBoundaryDecomposition decompose_interior_state(const DensityMatrix& rho0) {
    const int n = rho0.dim();
    HermEig eig = herm_eig(rho0.matrix);
    const double lmin = eig.eigenvalues.minCoeff();
    const double alpha = n * lmin;
    if (alpha <= 0.0) return {0.0, rho0};
    if (alpha >= 1.0) throw ValidationError("decompose_interior_state: rho0 is maximally mixed");
    CMat b = (rho0.matrix - (alpha / n) * CMat::Identity(n, n)) / (1.0 - alpha);
    // clip tiny negatives from roundoff
    HermEig be = herm_eig((b + b.adjoint()) / 2.0);
    RVec vals = be.eigenvalues.cwiseMax(0.0);
    CMat fixed = be.eigenvectors * vals.asDiagonal().toDenseMatrix().cast<cxd>() *
                 be.eigenvectors.adjoint();
    fixed /= fixed.trace().real();
    return {alpha, DensityMatrix(fixed)};
}

ChannelFixedPointTrace channel_fixed_point_iterate(
    const DynamicalMatrix& d, const DensityMatrix& rho0, int max_iter, double tol,
    const std::optional<QBoundaryDecomposition>& decomp) {
    if (!is_channel(d)) throw ValidationError("channel_fixed_point_iterate: not a channel");
    const int n = d.local_dim;
    if (rho0.dim() != n) throw DimensionError("channel_fixed_point_iterate: dimension mismatch");
    const int m = d.parts;
    const CMat star = CMat::Identity(n, n) / static_cast<double>(n);

    ChannelFixedPointTrace trace;
    CMat sigma = rho0.matrix;
    CMat p = decomp ? decomp->boundary.matrix : rho0.matrix;
    if (decomp) trace.alpha = decomp->alpha;

    trace.residual.push_back((sigma - star).norm());
    if (decomp) trace.boundary_norm.push_back(p.norm());

    for (int it = 0; it < max_iter; ++it) {
        std::vector<CMat> args(static_cast<size_t>(m - 1), sigma);
        CMat next = apply_channel_raw(d, args);
        next /= next.trace().real();  // trace roundoff compounds under the multilinear map
        const double step = (next - sigma).norm();
        sigma = next;
        ++trace.iterations;
        trace.residual.push_back((sigma - star).norm());
        if (decomp) {
            std::vector<CMat> pargs(static_cast<size_t>(m - 1), p);
            p = apply_channel_raw(d, pargs);
            p /= p.trace().real();
            trace.boundary_norm.push_back(p.norm());
        }
        if (step <= tol) {
            trace.converged = true;
            break;
        }
    }

    if (decomp) {
        // ||sigma^(n) - rho_*|| = (1-alpha)^{(m-1)^n} ||rho^(n) - rho_*||
        const double one_minus = 1.0 - decomp->alpha;
        double exponent = 1.0;
        for (size_t nstep = 0; nstep < trace.residual.size(); ++nstep) {
            const double scale = std::pow(one_minus, exponent);
            const double boundary_res =
                std::sqrt(std::max(trace.boundary_norm[nstep] * trace.boundary_norm[nstep] - 1.0 / n, 0.0));
            const double predicted = scale * boundary_res;
            if (trace.residual[nstep] > 1e-12 || predicted > 1e-12)
                trace.decay_identity_max_err =
                    std::max(trace.decay_identity_max_err, std::abs(trace.residual[nstep] - predicted));
            exponent *= static_cast<double>(m - 1);
        }
    }

    // final state may carry tiny negative eigenvalues from roundoff
    CMat sym = (sigma + sigma.adjoint()) / 2.0;
    trace.fixed_point = DensityMatrix(sym / sym.trace().real());
    return trace;
}

DensityMatrix eigenstate_from_reducing_subspace(const SubspaceBasis& v_perp) {
    CMat p = v_perp.projector();
    return DensityMatrix(p / static_cast<double>(v_perp.dim()));
}

bool channel_reducing_check(const DynamicalMatrix& d, const SubspaceBasis& v) {
    if (v.dim() >= v.ambient_dim())
        throw ValidationError("channel_reducing_check: subspace must be proper");
    SubspaceBasis perp = v.orthogonal_complement();
    std::vector<CMat> factors;
    factors.push_back(v.projector());
    for (int k = 1; k < d.parts; ++k) factors.push_back(perp.projector());
    CMat big = kron_all(factors);
    const double val = (d.matrix * big).trace().real();
    return std::abs(val) <= 1e-9;
}

namespace {

/// Choi matrix of the identity channel, [D_I]^{ik}_{jl} = delta_{ik} delta_{jl}.
CMat identity_channel_choi(int n) {
    CMat d = CMat::Zero(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) d(i * n + i, k * n + k) = 1.0;
    return d;
}

}  // namespace

IdentityCheck verify_identity_detailed(const DynamicalMatrix& d, const DensityMatrix& rho) {
    if (d.parts != 3) throw DimensionError("verify_identity needs a tripartite dynamical matrix");
    if (!is_channel(d)) throw ValidationError("verify_identity: not a channel");
    const int n = d.local_dim;

    IdentityCheck out;
    // rho * sigma = sigma * rho = sigma on the matrix-unit basis, by linearity
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            CMat unit = CMat::Zero(n, n);
            unit(j, k) = 1.0;
            worst = std::max(worst, max_abs_diff(apply_channel_raw(d, {rho.matrix, unit}), unit));
            worst = std::max(worst, max_abs_diff(apply_channel_raw(d, {unit, rho.matrix}), unit));
        }
    out.is_identity = worst <= 1e-9;

    HermEig eig = herm_eig(rho.matrix);
    out.pure = eig.eigenvalues(0) >= 1.0 - 1e-9;

    // support projector of the candidate
    int rank = 0;
    while (rank < n && eig.eigenvalues(rank) > 1e-9) ++rank;
    CMat support = eig.eigenvectors.leftCols(rank);
    CMat proj = support * support.adjoint();

    CMat di = identity_channel_choi(n);
    SubsystemShape shp = d.shape();
    CMat eye = CMat::Identity(n, n);

    // reading 1: sandwich with the projector, trace the full factor
    CMat sand_right = kron_all({eye, eye, proj}) * d.matrix * kron_all({eye, eye, proj});
    CMat sand_left = kron_all({eye, proj, eye}) * d.matrix * kron_all({eye, proj, eye});
    CMat right1 = partial_trace(sand_right, shp, {0, 1});
    CMat left1 = partial_trace(sand_left, shp, {0, 2});

    // reading 2: trace over the support subspace only, sum of <v| . |v>
    CMat right2 = CMat::Zero(n * n, n * n);
    CMat left2 = CMat::Zero(n * n, n * n);
    for (int v = 0; v < rank; ++v) {
        CVec psi = support.col(v);
        for (int r = 0; r < n * n; ++r)
            for (int c = 0; c < n * n; ++c) {
                cxd acc3 = 0.0, acc2 = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        acc3 += std::conj(psi(a)) * psi(b) * d.matrix(r * n + a, c * n + b);
                        const int r1 = r / n, r2 = r % n;
                        const int c1 = c / n, c2 = c % n;
                        acc2 += std::conj(psi(a)) * psi(b) *
                                d.matrix((r1 * n + a) * n + r2, (c1 * n + b) * n + c2);
                    }
                right2(r, c) += acc3;
                left2(r, c) += acc2;
            }
    }

    out.right_marginal_err = max_abs_diff(right1, di);
    out.left_marginal_err = max_abs_diff(left1, di);
    out.reading_discrepancy =
        std::max(max_abs_diff(right1, right2), max_abs_diff(left1, left2));
    return out;
}

bool verify_identity(const DynamicalMatrix& d, const DensityMatrix& rho) {
    return verify_identity_detailed(d, rho).is_identity;
}

bool verify_inverse(const DynamicalMatrix& d, const DensityMatrix& rho, const DensityMatrix& sigma,
                    const DensityMatrix& identity) {
    if (!verify_identity(d, identity))
        throw NoChannelIdentityError("verify_inverse: supplied identity is not verified");
    CMat left = apply_channel_raw(d, {rho.matrix, sigma.matrix});
    CMat right = apply_channel_raw(d, {sigma.matrix, rho.matrix});
    const bool ok = max_abs_diff(left, identity.matrix) <= 1e-9 &&
                    max_abs_diff(right, identity.matrix) <= 1e-9;
    if (ok) {
        // projector-trace cross-checks; the states are pure here, so the
        // span projector is the top eigenvector's
        auto span_projector = [](const DensityMatrix& s) {
            HermEig e = herm_eig(s.matrix);
            CVec v = e.eigenvectors.col(0);
            return CMat(v * v.adjoint());
        };
        CMat pi = span_projector(identity), pr = span_projector(rho), ps = span_projector(sigma);
        CMat a = kron_all({pi, pr, ps});
        CMat b = kron_all({pi, ps, pr});
        const double t1 = (a * d.matrix * a).trace().real();
        const double t2 = (b * d.matrix * b).trace().real();
        if (std::abs(t1 - 1.0) > 1e-7 || std::abs(t2 - 1.0) > 1e-7)
            throw ValidationError("verify_inverse: projector-trace cross-check failed: " +
                                  std::to_string(t1) + ", " + std::to_string(t2));
    }
    return ok;
}

std::optional<DensityMatrix> find_basis_identity(const DynamicalMatrix& d) {
    for (int k = 0; k < d.local_dim; ++k) {
        DensityMatrix cand = DensityMatrix::basis_state(d.local_dim, k);
        if (verify_identity(d, cand)) return cand;
    }
    return std::nullopt;
}

}  // namespace triconv
