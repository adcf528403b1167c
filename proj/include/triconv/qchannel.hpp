#pragma once

#include "triconv/classical.hpp"
#include "triconv/numkit.hpp"

#include <optional>
#include <vector>

namespace triconv {

/// Hermitian PSD unit-trace matrix.
struct DensityMatrix {
    CMat matrix;

    DensityMatrix() = default;
    explicit DensityMatrix(CMat m);

    int dim() const { return static_cast<int>(matrix.rows()); }
    RVec diagonal() const;

    static DensityMatrix maximally_mixed(int n);
    static DensityMatrix basis_state(int n, int k);
    static DensityMatrix pure(const CVec& psi);
};

double hs_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Dynamical (Choi) matrix of an m-input channel: Hermitian matrix on the
/// m-fold product space, subsystem 0 the output. Positivity and the trace
/// condition are checked by is_channel, not at construction, so invalid
/// candidates can be represented and rejected.
struct DynamicalMatrix {
    int parts = 0;      // m
    int local_dim = 0;  // N
    CMat matrix;        // side N^m

    DynamicalMatrix() = default;
    DynamicalMatrix(int parts, int local_dim, CMat m);

    SubsystemShape shape() const { return SubsystemShape::uniform(parts, local_dim); }
    int side() const { return static_cast<int>(matrix.rows()); }

    /// Jamiolkowski state D / N^{m-1}.
    CMat jamiolkowski_state() const;
};

/// Kraus operators of an m-input channel: rectangular N x N^{m-1} blocks
/// with sum K^dag K = I.
struct KrausSet {
    std::vector<CMat> ops;

    KrausSet() = default;
    explicit KrausSet(std::vector<CMat> k);

    int count() const { return static_cast<int>(ops.size()); }
    int out_dim() const { return static_cast<int>(ops.at(0).rows()); }
    int in_dim() const { return static_cast<int>(ops.at(0).cols()); }
};

/// Orthonormal columns spanning a subspace of C^N.
struct SubspaceBasis {
    CMat columns;

    SubspaceBasis() = default;
    explicit SubspaceBasis(CMat c);

    int ambient_dim() const { return static_cast<int>(columns.rows()); }
    int dim() const { return static_cast<int>(columns.cols()); }
    CMat projector() const { return columns * columns.adjoint(); }
    SubspaceBasis orthogonal_complement() const;

    static SubspaceBasis coordinate(int n, const IndexSet& members);
};

bool is_channel(const DynamicalMatrix& d);

/// Tr_k D = I for every subsystem k.
bool is_m_stochastic(const DynamicalMatrix& d);

/// Linear action on arbitrary square inputs (no density validation);
/// args.size() must be parts-1.
CMat apply_channel_raw(const DynamicalMatrix& d, const std::vector<CMat>& args);

/// Tr_{2..m}[D (I x rho^T x sigma^T)] for m = 3.
DensityMatrix quantum_convolve(const DynamicalMatrix& d, const DensityMatrix& rho,
                               const DensityMatrix& sigma);

DensityMatrix apply_m_channel(const DynamicalMatrix& d, const std::vector<DensityMatrix>& args);

/// Spectral Kraus extraction K_i = sqrt(lambda_i) unvec(v_i) (row-major
/// unvec), dropping eigenvalues below 1e-10 * lambda_max.
KrausSet choi_to_kraus(const DynamicalMatrix& d);

/// D_{(a,c),(b,d)} = sum_i K_i[a,c] conj(K_i[b,d]).
DynamicalMatrix kraus_to_choi(const KrausSet& k);

/// Stinespring unitary U = sum_i K_i (x) |i> for a rank-N binary channel;
/// row index (a, i) with the output index a slowest. The channel action is
/// Tr_2[U (rho x sigma) U^dag].
CMat kraus_to_unitary(const KrausSet& k);

/// Channel action through a dilation unitary, tracing the second factor.
CMat unitary_channel_apply(const CMat& u, const CMat& rho, const CMat& sigma);

struct QBoundaryDecomposition {
    double alpha = 0.0;  // rho0 = alpha rho_* + (1-alpha) boundary
    DensityMatrix boundary;
};

/// Largest-alpha decomposition rho0 = alpha rho_* + (1-alpha) rho_b with
/// rho_b on the boundary of the state set (singular).
QBoundaryDecomposition decompose_interior_state(const DensityMatrix& rho0);

struct ChannelFixedPointTrace {
    DensityMatrix fixed_point;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual;       // ||sigma^(n) - rho_*||_2 (HS norm)
    std::vector<double> boundary_norm;  // ||rho^(n)||_2 when decomposition given
    double alpha = 0.0;
    double decay_identity_max_err = 0.0;
};

ChannelFixedPointTrace channel_fixed_point_iterate(
    const DynamicalMatrix& d, const DensityMatrix& rho0, int max_iter, double tol,
    const std::optional<QBoundaryDecomposition>& decomp = std::nullopt);

/// Maximally mixed state on a subspace, P / dim.
DensityMatrix eigenstate_from_reducing_subspace(const SubspaceBasis& v_perp);

/// Tr[D (P_V x P_Vperp x ... x P_Vperp)] <= tol; by positivity this is
/// equivalent to the pure-state quantified condition.
bool channel_reducing_check(const DynamicalMatrix& d, const SubspaceBasis& v);

struct IdentityCheck {
    bool is_identity = false;
    bool pure = false;  // rank-1 check on the candidate
    /// Deviation of the projected marginal from the identity-channel Choi
    /// when the candidate is inserted in the first (left) or second (right)
    /// argument slot.
    double left_marginal_err = 0.0;
    double right_marginal_err = 0.0;
    /// Max difference between the two readings of the projected marginal:
    /// full-factor trace of the sandwiched matrix vs the trace over the
    /// support subspace only. They coincide identically; the value is
    /// reported as evidence rather than assumed.
    double reading_discrepancy = 0.0;
};

/// Detailed identity verification: rho is an identity iff rho * sigma =
/// sigma * rho = sigma for a complete operator basis of sigma. The
/// projected-marginal conditions are measured per slot under both readings.
IdentityCheck verify_identity_detailed(const DynamicalMatrix& d, const DensityMatrix& rho);

bool verify_identity(const DynamicalMatrix& d, const DensityMatrix& rho);

struct NoChannelIdentityError : ValidationError {
    using ValidationError::ValidationError;
};

/// rho * sigma = sigma * rho = identity within tolerance; on success the
/// projector-trace conditions are asserted as cross-checks. Throws
/// NoChannelIdentityError when `identity` is not verified first.
bool verify_inverse(const DynamicalMatrix& d, const DensityMatrix& rho, const DensityMatrix& sigma,
                    const DensityMatrix& identity);

/// Finite search for an identity among computational-basis pure states.
std::optional<DensityMatrix> find_basis_identity(const DynamicalMatrix& d);

}  // namespace triconv
