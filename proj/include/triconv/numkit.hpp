#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace triconv {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

/// Raised when a value fails a domain invariant (non-Hermitian input,
/// broken marginals, invalid probability vector, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when operand dimensions are incompatible.
struct DimensionError : ValidationError {
    using ValidationError::ValidationError;
};

/// Central numerical tolerances. Overridable once at startup (CLI flag);
/// all structural predicates read these.
struct Tolerances {
    double herm = 1e-9;        // Hermiticity check
    double psd = 1e-9;         // eigenvalue >= -psd
    double recon = 1e-10;      // eigendecomposition reconstruction
    double structural = 1e-9;  // marginals, permutation entries, symmetry
};

Tolerances& tols();

/// Ordered local dimensions of a tensor-product space. All multi-indices
/// flatten row-major with subsystem 0 slowest.
struct SubsystemShape {
    std::vector<int> dims;

    SubsystemShape() = default;
    SubsystemShape(std::initializer_list<int> d) : dims(d) {}
    explicit SubsystemShape(std::vector<int> d) : dims(std::move(d)) {}
    static SubsystemShape uniform(int parts, int local_dim);

    int total() const;
    int parts() const { return static_cast<int>(dims.size()); }
    int flatten(const std::vector<int>& idx) const;
    std::vector<int> unflatten(int flat) const;
};

CMat kron(const CMat& a, const CMat& b);
CMat kron_all(const std::vector<CMat>& ms);

/// Traces out every subsystem not listed in `keep` (0-based, kept order
/// is ascending regardless of the order given).
CMat partial_trace(const CMat& m, const SubsystemShape& shape, const std::vector<int>& keep);

struct HermEig {
    RVec eigenvalues;  // descending
    CMat eigenvectors; // orthonormal columns, matching order
};

/// Eigendecomposition of a Hermitian matrix; rejects inputs that are not
/// Hermitian within tols().herm.
HermEig herm_eig(const CMat& m);

/// -sum lambda ln lambda in nats, with 0 ln 0 := 0. Input must be a state:
/// Hermitian, PSD within tols().psd and unit trace.
double von_neumann_entropy(const CMat& m);

double entropy_of_distribution(const RVec& p);

bool is_hermitian(const CMat& m, double tol);
double max_abs(const CMat& m);
double max_abs_diff(const CMat& a, const CMat& b);

CMat identity(int n);
CMat dag(const CMat& m);

std::string format_dims(const CMat& m);

}  // namespace triconv
