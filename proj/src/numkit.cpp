#include "triconv/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace triconv {

Tolerances& tols() {
    static Tolerances t;
    return t;
}

SubsystemShape SubsystemShape::uniform(int parts, int local_dim) {
    SubsystemShape s;
    s.dims.assign(static_cast<size_t>(parts), local_dim);
    return s;
}

int SubsystemShape::total() const {
    int t = 1;
    for (int d : dims) t *= d;
    return t;
}

int SubsystemShape::flatten(const std::vector<int>& idx) const {
    if (idx.size() != dims.size()) throw DimensionError("multi-index arity mismatch");
    int flat = 0;
    for (size_t k = 0; k < dims.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= dims[k]) throw DimensionError("multi-index out of range");
        flat = flat * dims[k] + idx[k];
    }
    return flat;
}

std::vector<int> SubsystemShape::unflatten(int flat) const {
    std::vector<int> idx(dims.size());
    for (size_t k = dims.size(); k-- > 0;) {
        idx[k] = flat % dims[k];
        flat /= dims[k];
    }
    return idx;
}

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMat kron_all(const std::vector<CMat>& ms) {
    CMat out = CMat::Identity(1, 1);
    for (const CMat& m : ms) out = kron(out, m);
    return out;
}

CMat partial_trace(const CMat& m, const SubsystemShape& shape, const std::vector<int>& keep) {
    const int side = shape.total();
    if (m.rows() != m.cols()) throw DimensionError("partial_trace: matrix not square");
    if (m.rows() != side)
        throw DimensionError("partial_trace: shape " + std::to_string(side) +
                             " does not match matrix side " + std::to_string(m.rows()));

    std::vector<int> keep_sorted(keep);
    std::sort(keep_sorted.begin(), keep_sorted.end());
    keep_sorted.erase(std::unique(keep_sorted.begin(), keep_sorted.end()), keep_sorted.end());
    for (int k : keep_sorted)
        if (k < 0 || k >= shape.parts()) throw DimensionError("partial_trace: keep index out of range");

    std::vector<int> traced;
    for (int k = 0; k < shape.parts(); ++k)
        if (!std::binary_search(keep_sorted.begin(), keep_sorted.end(), k)) traced.push_back(k);

    int keep_dim = 1;
    for (int k : keep_sorted) keep_dim *= shape.dims[k];
    int traced_dim = 1;
    for (int k : traced) traced_dim *= shape.dims[k];

    CMat out = CMat::Zero(keep_dim, keep_dim);
    std::vector<int> full_r(shape.parts()), full_c(shape.parts());
    for (int r = 0; r < keep_dim; ++r) {
        // expand r over kept subsystems
        int tmp = r;
        for (size_t q = keep_sorted.size(); q-- > 0;) {
            full_r[keep_sorted[q]] = tmp % shape.dims[keep_sorted[q]];
            tmp /= shape.dims[keep_sorted[q]];
        }
        for (int c = 0; c < keep_dim; ++c) {
            tmp = c;
            for (size_t q = keep_sorted.size(); q-- > 0;) {
                full_c[keep_sorted[q]] = tmp % shape.dims[keep_sorted[q]];
                tmp /= shape.dims[keep_sorted[q]];
            }
            cxd acc = 0.0;
            for (int t = 0; t < traced_dim; ++t) {
                tmp = t;
                for (size_t q = traced.size(); q-- > 0;) {
                    int v = tmp % shape.dims[traced[q]];
                    tmp /= shape.dims[traced[q]];
                    full_r[traced[q]] = v;
                    full_c[traced[q]] = v;
                }
                acc += m(shape.flatten(full_r), shape.flatten(full_c));
            }
            out(r, c) = acc;
        }
    }
    return out;
}

bool is_hermitian(const CMat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return max_abs_diff(m, m.adjoint()) <= tol;
}

double max_abs(const CMat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double max_abs_diff(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("max_abs_diff: shape mismatch " + format_dims(a) + " vs " + format_dims(b));
    return max_abs(a - b);
}

HermEig herm_eig(const CMat& m) {
    if (!is_hermitian(m, tols().herm))
        throw ValidationError("herm_eig: input is not Hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<CMat> solver(m);
    if (solver.info() != Eigen::Success) throw ValidationError("herm_eig: eigensolver failed");
    const Eigen::Index n = m.rows();
    HermEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {  // Eigen sorts ascending
        out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
        out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

double entropy_of_distribution(const RVec& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) s -= p(i) * std::log(p(i));
    }
    return s;
}

double von_neumann_entropy(const CMat& m) {
    HermEig eig = herm_eig(m);
    double trace = eig.eigenvalues.sum();
    if (std::abs(trace - 1.0) > 1e-6)
        throw ValidationError("von_neumann_entropy: trace " + std::to_string(trace) + " != 1");
    RVec clamped = eig.eigenvalues;
    for (Eigen::Index i = 0; i < clamped.size(); ++i) {
        if (clamped(i) < -tols().psd)
            throw ValidationError("von_neumann_entropy: negative eigenvalue " +
                                  std::to_string(clamped(i)));
        clamped(i) = std::max(clamped(i), 0.0);
    }
    return entropy_of_distribution(clamped);
}

CMat identity(int n) { return CMat::Identity(n, n); }

CMat dag(const CMat& m) { return m.adjoint(); }

std::string format_dims(const CMat& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

}  // namespace triconv
