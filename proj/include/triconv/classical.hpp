#pragma once

#include "triconv/numkit.hpp"
#include "triconv/random.hpp"

#include <optional>
#include <string>
#include <vector>

namespace triconv {

/// Point of the probability simplex: nonnegative entries summing to one
/// (both within tols().structural).
struct ProbVector {
    RVec entries;

    ProbVector() = default;
    explicit ProbVector(RVec v);

    int dim() const { return static_cast<int>(entries.size()); }
    double operator[](int i) const { return entries(i); }

    static ProbVector uniform(int n);
    static ProbVector basis(int n, int k);

    /// Index of the single unit entry, or nullopt if not a delta vector.
    std::optional<int> delta_index() const;
};

double l1_distance(const ProbVector& a, const ProbVector& b);

/// Order-m dimension-N nonnegative tensor, entries stored flat row-major
/// (axis 0 slowest). Axis 0 indexes the output of the induced multilinear
/// map; axes 1..m-1 index the arguments.
class StochTensor {
public:
    StochTensor(int order, int dim, std::vector<double> entries);

    int order() const { return order_; }
    int dim() const { return dim_; }
    const std::vector<double>& data() const { return entries_; }

    double at(const std::vector<int>& idx) const { return entries_[static_cast<size_t>(offset(idx))]; }
    double& at(const std::vector<int>& idx) { return entries_[static_cast<size_t>(offset(idx))]; }
    int offset(const std::vector<int>& idx) const;

    /// Axes (0-based) whose marginal sums are all 1 within tolerance.
    std::vector<int> stochastic_axes() const;

private:
    int order_;
    int dim_;
    std::vector<double> entries_;
};

/// Subset of {0,...,N-1}, kept sorted.
struct IndexSet {
    std::vector<int> members;

    IndexSet() = default;
    explicit IndexSet(std::vector<int> m);

    int size() const { return static_cast<int>(members.size()); }
    bool contains(int i) const;
    std::vector<int> complement(int n) const;
};

struct AxisMarginal {
    int axis = 0;
    double max_deviation = 0.0;  // of marginal sums from 1
};

/// Structural report for a tensor: never rejects, only measures.
struct AxisReport {
    std::vector<AxisMarginal> axes;
    double min_entry = 0.0;
    double max_binary_deviation = 0.0;  // distance of entries from {0,1}

    bool axis_stochastic(int axis) const;
    int stochastic_axis_count() const;
    bool is_m_stochastic() const;  // all axes
    bool is_permutation() const;
    /// "stochastic" / "bistochastic" / "tristochastic" / "m-stochastic"
    /// plus ", permutation" when 0/1-valued; "not stochastic" otherwise.
    std::string classification() const;
};

AxisReport validate(const StochTensor& t);

/// r_i = sum_{jk} A_{ijk} p_j q_k for an order-3 tensor stochastic along
/// axis 0.
ProbVector convolve(const StochTensor& a, const ProbVector& p, const ProbVector& q);

/// Multilinear contraction A[p_1,...,p_{m-1}] over axes 1..m-1.
ProbVector apply_m(const StochTensor& a, const std::vector<ProbVector>& args);

/// A_{ijk} == A_{ikj} within tolerance.
bool is_commutative(const StochTensor& a);

/// Contraction identity sum_i A_{ail} A_{ijk} == sum_i A_{aji} A_{ikl}
/// for all a,j,k,l, equivalent to (p*q)*r == p*(q*r).
bool is_associative(const StochTensor& a);

/// Permutation-averaged convolution
/// (1/(N-1)!) sum_sigma (p . P_sigma r) P_sigma^{-1} q. Guarded to N <= 7.
ProbVector perm_average_convolve(const ProbVector& r, const ProbVector& p, const ProbVector& q);

/// All proper nonempty subsets I with A_{i1...} = 0 for i1 in I and all
/// other indices outside I. Lexicographic order; exhaustive with the
/// k >= N/2 prune for m >= 3. Guarded to N <= 20.
std::vector<IndexSet> find_reducing_sets(const StochTensor& a);

/// Restriction of the tensor to indices outside a reducing set.
StochTensor truncate(const StochTensor& a, const IndexSet& i);

struct ProbEigenvector {
    ProbVector vector;
    double eigenvalue = 1.0;
    IndexSet zero_set;  // empty set encodes the uniform eigenvector
};

/// All probability eigenvectors of an m-stochastic tensor, m >= 3: one per
/// reducing set, plus the uniform vector for the empty set.
std::vector<ProbEigenvector> probability_eigenvectors(const StochTensor& a);

struct BoundaryDecomposition {
    double alpha = 0.0;  // q0 = alpha e + (1-alpha) p0
    ProbVector p0;
};

/// Largest-alpha decomposition q0 = alpha e + (1-alpha) p0 with p0 on the
/// simplex boundary.
BoundaryDecomposition decompose_interior(const ProbVector& q0);

struct FixedPointTrace {
    ProbVector fixed_point;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_sq;       // ||q^(n) - e||_2^2, n = 0..iterations
    std::vector<double> boundary_norm_sq;  // ||p^(n)||_2^2 when a decomposition was supplied
    double alpha = 0.0;
    /// Max error of ||q^(n)-e||^2 = (1-alpha)^(2(m-1)^n) (||p^(n)||^2 - 1/N)
    /// over steps above the numerical floor.
    double decay_identity_max_err = 0.0;
};

FixedPointTrace fixed_point_iterate(const StochTensor& a, const ProbVector& q0, int max_iter,
                                    double tol,
                                    const std::optional<BoundaryDecomposition>& decomp = std::nullopt);

/// Unique basis vector e_k with A_{ijk} = A_{ikj} = delta_ij, if any.
std::optional<ProbVector> find_identity(const StochTensor& a);

struct NoIdentityError : ValidationError {
    using ValidationError::ValidationError;
};

/// Inverse of p under the convolution, when the tensor has an identity and
/// p is a basis vector with a matching partner. Throws NoIdentityError if
/// the tensor has no identity at all.
std::optional<ProbVector> find_inverse(const StochTensor& a, const ProbVector& p);

// ---- tensor builders ------------------------------------------------------

/// Cyclic-convolution tensor A_{ijk} = [i == j+k mod N] (0-based); the
/// standard convolution, with identity e_0.
StochTensor make_cyclic_convolution_tensor(int n);

/// T2 = (I, P2): slice A_{.,.,0} = I, A_{.,.,1} = P2.
StochTensor make_t2();

/// T3 with slices over axis 0 equal to (I, P3, P3^2), P3 the cyclic shift.
StochTensor make_t3();

/// Permutation tensor from a Latin square: A_{ijk} = [i == L(j,k)].
StochTensor tensor_from_latin_square(const std::vector<std::vector<int>>& square);

/// Random order-3 permutation tensor (random Latin square: isotopy
/// scrambling of the cyclic square plus intercalate flips).
StochTensor random_permutation_tensor(int n, Rng& rng);

/// Convex mixture of random permutation tensors.
StochTensor random_tristochastic(int n, int num_terms, Rng& rng);

/// Random order-m m-stochastic tensor: mixture of affine permutation
/// tensors A_{i j1..j(m-1)} = [i == pi0(pi1(j1)+...+pi(m-1)(j(m-1)) mod N)].
StochTensor random_m_stochastic(int order, int n, int num_terms, Rng& rng);

/// Reducible tristochastic tensor with reducing set of size n - sub_dim,
/// built from a Latin square holding a sub-square on `sub_dim` symbols
/// (requires sub_dim <= n/2). Returns the tensor and the planted set.
struct ReducibleConstruction {
    StochTensor tensor;
    IndexSet planted;
};
ReducibleConstruction random_reducible_tensor(int n, int sub_dim, Rng& rng);

}  // namespace triconv
