#include "triconv/classical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>

namespace triconv {

namespace {

long long ipow(long long b, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

ProbVector::ProbVector(RVec v) : entries(std::move(v)) {
    const double tol = tols().structural;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < entries.size(); ++i) {
        if (entries(i) < -tol)
            throw ValidationError("probability vector has negative entry " +
                                  std::to_string(entries(i)));
        sum += entries(i);
    }
    if (std::abs(sum - 1.0) > std::max(tol, 1e-9 * entries.size()))
        throw ValidationError("probability vector sums to " + std::to_string(sum));
}

ProbVector ProbVector::uniform(int n) {
    return ProbVector(RVec::Constant(n, 1.0 / n));
}

ProbVector ProbVector::basis(int n, int k) {
    RVec v = RVec::Zero(n);
    v(k) = 1.0;
    return ProbVector(v);
}

std::optional<int> ProbVector::delta_index() const {
    const double tol = tols().structural;
    int hit = -1;
    for (int i = 0; i < dim(); ++i) {
        if (std::abs(entries(i) - 1.0) <= tol) {
            if (hit >= 0) return std::nullopt;
            hit = i;
        } else if (std::abs(entries(i)) > tol) {
            return std::nullopt;
        }
    }
    return hit >= 0 ? std::optional<int>(hit) : std::nullopt;
}

double l1_distance(const ProbVector& a, const ProbVector& b) {
    return (a.entries - b.entries).cwiseAbs().sum();
}

StochTensor::StochTensor(int order, int dim, std::vector<double> entries)
    : order_(order), dim_(dim), entries_(std::move(entries)) {
    if (order_ < 2) throw ValidationError("tensor order must be >= 2");
    if (dim_ < 1) throw ValidationError("tensor dimension must be >= 1");
    const long long expected = ipow(dim_, order_);
    if (static_cast<long long>(entries_.size()) != expected)
        throw DimensionError("tensor entry count " + std::to_string(entries_.size()) +
                             " != dim^order = " + std::to_string(expected));
    const double tol = tols().structural;
    for (double e : entries_)
        if (e < -tol) throw ValidationError("tensor has negative entry " + std::to_string(e));
}

int StochTensor::offset(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != order_) throw DimensionError("tensor index arity mismatch");
    int flat = 0;
    for (int k = 0; k < order_; ++k) {
        if (idx[static_cast<size_t>(k)] < 0 || idx[static_cast<size_t>(k)] >= dim_)
            throw DimensionError("tensor index out of range");
        flat = flat * dim_ + idx[static_cast<size_t>(k)];
    }
    return flat;
}

std::vector<int> StochTensor::stochastic_axes() const {
    AxisReport rep = validate(*this);
    std::vector<int> axes;
    for (int k = 0; k < order_; ++k)
        if (rep.axis_stochastic(k)) axes.push_back(k);
    return axes;
}

IndexSet::IndexSet(std::vector<int> m) : members(std::move(m)) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
}

bool IndexSet::contains(int i) const {
    return std::binary_search(members.begin(), members.end(), i);
}

std::vector<int> IndexSet::complement(int n) const {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (!contains(i)) out.push_back(i);
    return out;
}

bool AxisReport::axis_stochastic(int axis) const {
    return axes[static_cast<size_t>(axis)].max_deviation <= tols().structural &&
           min_entry >= -tols().structural;
}

int AxisReport::stochastic_axis_count() const {
    int c = 0;
    for (size_t k = 0; k < axes.size(); ++k)
        if (axis_stochastic(static_cast<int>(k))) ++c;
    return c;
}

bool AxisReport::is_m_stochastic() const {
    return stochastic_axis_count() == static_cast<int>(axes.size());
}

bool AxisReport::is_permutation() const {
    return is_m_stochastic() && max_binary_deviation <= tols().structural;
}

std::string AxisReport::classification() const {
    const int m = static_cast<int>(axes.size());
    std::string base;
    if (is_m_stochastic()) {
        if (m == 3)
            base = "tristochastic";
        else
            base = std::to_string(m) + "-stochastic";
    } else if (stochastic_axis_count() >= 2 && axis_stochastic(0)) {
        base = "bistochastic";  // partial degree of stochasticity
    } else if (axis_stochastic(0)) {
        base = "stochastic";
    } else if (stochastic_axis_count() > 0) {
        base = "stochastic (not along axis 1)";
    } else {
        base = "not stochastic";
    }
    if (is_permutation()) base += ", permutation";
    return base;
}

AxisReport validate(const StochTensor& t) {
    const int m = t.order();
    const int n = t.dim();
    AxisReport rep;
    rep.axes.resize(static_cast<size_t>(m));
    rep.min_entry = t.data().empty() ? 0.0 : *std::min_element(t.data().begin(), t.data().end());
    rep.max_binary_deviation = 0.0;
    for (double e : t.data())
        rep.max_binary_deviation = std::max(rep.max_binary_deviation, std::min(std::abs(e), std::abs(e - 1.0)));

    const long long total = static_cast<long long>(t.data().size());
    for (int axis = 0; axis < m; ++axis) {
        rep.axes[static_cast<size_t>(axis)].axis = axis;
        const long long stride = ipow(n, m - 1 - axis);
        const long long block = stride * n;
        double worst = 0.0;
        // iterate over all fixings of the other indices
        for (long long base = 0; base < total; base += block) {
            for (long long off = 0; off < stride; ++off) {
                double sum = 0.0;
                for (int v = 0; v < n; ++v) sum += t.data()[static_cast<size_t>(base + off + v * stride)];
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
        rep.axes[static_cast<size_t>(axis)].max_deviation = worst;
    }
    return rep;
}

ProbVector convolve(const StochTensor& a, const ProbVector& p, const ProbVector& q) {
    if (a.order() != 3) throw DimensionError("convolve requires an order-3 tensor");
    if (p.dim() != a.dim() || q.dim() != a.dim())
        throw DimensionError("convolve: vector dimension does not match tensor");
    const int n = a.dim();
    RVec r = RVec::Zero(n);
    const auto& d = a.data();
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                acc += d[static_cast<size_t>((i * n + j) * n + k)] * p.entries(j) * q.entries(k);
        r(i) = acc;
    }
    return ProbVector(r);
}

ProbVector apply_m(const StochTensor& a, const std::vector<ProbVector>& args) {
    const int m = a.order();
    const int n = a.dim();
    if (static_cast<int>(args.size()) != m - 1)
        throw DimensionError("apply_m: expected " + std::to_string(m - 1) + " arguments, got " +
                             std::to_string(args.size()));
    for (const auto& v : args)
        if (v.dim() != n) throw DimensionError("apply_m: argument dimension mismatch");

    // contract axes m-1, m-2, ..., 1 in turn
    std::vector<double> cur = a.data();
    long long cur_size = static_cast<long long>(cur.size());
    for (int axis = m - 1; axis >= 1; --axis) {
        const RVec& v = args[static_cast<size_t>(axis - 1)].entries;
        const long long out_size = cur_size / n;
        std::vector<double> next(static_cast<size_t>(out_size), 0.0);
        for (long long o = 0; o < out_size; ++o) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += cur[static_cast<size_t>(o * n + k)] * v(k);
            next[static_cast<size_t>(o)] = acc;
        }
        cur = std::move(next);
        cur_size = out_size;
    }
    RVec r(n);
    for (int i = 0; i < n; ++i) r(i) = cur[static_cast<size_t>(i)];
    return ProbVector(r);
}

bool is_commutative(const StochTensor& a) {
    if (a.order() != 3) throw DimensionError("is_commutative requires an order-3 tensor");
    const int n = a.dim();
    const double tol = tols().structural;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < j; ++k)
                if (std::abs(a.at({i, j, k}) - a.at({i, k, j})) > tol) return false;
    return true;
}

bool is_associative(const StochTensor& a) {
    if (a.order() != 3) throw DimensionError("is_associative requires an order-3 tensor");
    const int n = a.dim();
    const double tol = tols().structural;
    for (int x = 0; x < n; ++x)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double lhs = 0.0, rhs = 0.0;
                    for (int i = 0; i < n; ++i) {
                        lhs += a.at({x, i, l}) * a.at({i, j, k});
                        rhs += a.at({x, j, i}) * a.at({i, k, l});
                    }
                    if (std::abs(lhs - rhs) > tol) return false;
                }
    return true;
}

ProbVector perm_average_convolve(const ProbVector& r, const ProbVector& p, const ProbVector& q) {
    const int n = r.dim();
    if (p.dim() != n || q.dim() != n) throw DimensionError("perm_average_convolve: dimension mismatch");
    if (n > 7) throw ValidationError("perm_average_convolve guarded to N <= 7 (factorial sum)");

    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double fact1 = 1.0;
    for (int i = 2; i < n; ++i) fact1 *= i;  // (N-1)!

    RVec out = RVec::Zero(n);
    do {
        // P_sigma maps e_j -> e_{sigma(j)}: (P_sigma r)_i = r_{sigma^{-1}(i)}
        double weight = 0.0;
        for (int j = 0; j < n; ++j) weight += p.entries(perm[static_cast<size_t>(j)]) * r.entries(j);
        // (P_sigma^{-1} q)_i = q_{sigma(i)}
        for (int i = 0; i < n; ++i) out(i) += weight * q.entries(perm[static_cast<size_t>(i)]);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return ProbVector(out / fact1);
}

namespace {

/// A_{i1,...} == 0 for all i1 in I and i2..im outside I.
bool is_reducing_mask(const StochTensor& a, std::uint32_t mask) {
    const int m = a.order();
    const int n = a.dim();
    const double tol = tols().structural;
    std::vector<int> idx(static_cast<size_t>(m), 0);
    std::vector<int> outside;
    for (int i = 0; i < n; ++i)
        if (!(mask >> i & 1u)) outside.push_back(i);
    const long long rest = ipow(static_cast<long long>(outside.size()), m - 1);
    for (int i1 = 0; i1 < n; ++i1) {
        if (!(mask >> i1 & 1u)) continue;
        idx[0] = i1;
        for (long long c = 0; c < rest; ++c) {
            long long tmp = c;
            for (int k = m - 1; k >= 1; --k) {
                idx[static_cast<size_t>(k)] = outside[static_cast<size_t>(tmp % outside.size())];
                tmp /= static_cast<long long>(outside.size());
            }
            if (std::abs(a.at(idx)) > tol) return false;
        }
    }
    return true;
}

}  // namespace

std::vector<IndexSet> find_reducing_sets(const StochTensor& a) {
    const int n = a.dim();
    if (n > 20) throw ValidationError("find_reducing_sets guarded to N <= 20");
    AxisReport rep = validate(a);
    if (!rep.is_m_stochastic())
        throw ValidationError("find_reducing_sets requires an m-stochastic tensor (" +
                              rep.classification() + ")");

    std::vector<IndexSet> out;
    const std::uint32_t full = (n >= 32) ? 0xffffffffu : ((1u << n) - 1u);
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        const int k = std::popcount(mask);
        if (a.order() >= 3 && 2 * k < n) continue;  // Lemma: #I >= N/2
        if (!is_reducing_mask(a, mask)) continue;
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1u) members.push_back(i);
        out.emplace_back(std::move(members));
    }
    std::sort(out.begin(), out.end(),
              [](const IndexSet& x, const IndexSet& y) { return x.members < y.members; });
    return out;
}

namespace {

StochTensor restrict_to(const StochTensor& a, const std::vector<int>& keep) {
    const int m = a.order();
    const int nn = static_cast<int>(keep.size());
    std::vector<double> entries(static_cast<size_t>(ipow(nn, m)));
    std::vector<int> idx(static_cast<size_t>(m));
    for (long long c = 0; c < static_cast<long long>(entries.size()); ++c) {
        long long tmp = c;
        for (int k = m - 1; k >= 0; --k) {
            idx[static_cast<size_t>(k)] = keep[static_cast<size_t>(tmp % nn)];
            tmp /= nn;
        }
        entries[static_cast<size_t>(c)] = a.at(idx);
    }
    return StochTensor(m, nn, std::move(entries));
}

}  // namespace

StochTensor truncate(const StochTensor& a, const IndexSet& i) {
    if (i.members.empty()) return a;
    const int n = a.dim();
    for (int v : i.members)
        if (v < 0 || v >= n) throw DimensionError("truncate: index out of range");
    if (i.size() >= n) throw ValidationError("truncate: reducing set must be proper");

    StochTensor out = restrict_to(a, i.complement(n));
    AxisReport rep = validate(out);
    std::uint32_t mask = 0;
    for (int v : i.members) mask |= 1u << v;
    if (!is_reducing_mask(a, mask) || !rep.is_m_stochastic()) {
        double worst = 0.0;
        for (const auto& ax : rep.axes) worst = std::max(worst, ax.max_deviation);
        std::ostringstream os;
        os << "truncate: {";
        for (size_t k = 0; k < i.members.size(); ++k) os << (k ? "," : "") << i.members[k] + 1;
        os << "} is not a reducing set; restricted marginal deviation " << worst;
        throw ValidationError(os.str());
    }
    return out;
}

std::vector<ProbEigenvector> probability_eigenvectors(const StochTensor& a) {
    if (a.order() < 3)
        throw ValidationError("probability_eigenvectors: matrix case (m = 2) unsupported");
    const int n = a.dim();
    std::vector<ProbEigenvector> out;
    out.push_back({ProbVector::uniform(n), 1.0, IndexSet{}});
    for (const IndexSet& red : find_reducing_sets(a)) {
        RVec v = RVec::Zero(n);
        const double val = 1.0 / (n - red.size());
        for (int i = 0; i < n; ++i)
            if (!red.contains(i)) v(i) = val;
        out.push_back({ProbVector(v), 1.0, red});
    }
    return out;
}

BoundaryDecomposition decompose_interior(const ProbVector& q0) {
    const int n = q0.dim();
    const double alpha = n * q0.entries.minCoeff();
    if (alpha <= 0.0)
        return {0.0, q0};  // already on the boundary
    if (alpha >= 1.0)
        throw ValidationError("decompose_interior: q0 is the uniform vector");
    RVec p = (q0.entries - RVec::Constant(n, alpha / n)) / (1.0 - alpha);
    p = p.cwiseMax(0.0);
    return {alpha, ProbVector(p / p.sum())};
}

FixedPointTrace fixed_point_iterate(const StochTensor& a, const ProbVector& q0, int max_iter,
                                    double tol, const std::optional<BoundaryDecomposition>& decomp) {
    const int n = a.dim();
    if (q0.dim() != n) throw DimensionError("fixed_point_iterate: dimension mismatch");
    const int m = a.order();
    const ProbVector e = ProbVector::uniform(n);

    FixedPointTrace trace;
    ProbVector q = q0;
    ProbVector p = decomp ? decomp->p0 : q0;
    if (decomp) trace.alpha = decomp->alpha;

    auto res_sq = [&](const ProbVector& v) { return (v.entries - e.entries).squaredNorm(); };
    trace.residual_sq.push_back(res_sq(q));
    if (decomp) trace.boundary_norm_sq.push_back(p.entries.squaredNorm());

    for (int it = 0; it < max_iter; ++it) {
        std::vector<ProbVector> args(static_cast<size_t>(m - 1), q);
        ProbVector next = apply_m(a, args);
        next.entries /= next.entries.sum();  // marginal roundoff compounds under the quadratic map
        const double step = l1_distance(next, q);
        q = next;
        ++trace.iterations;
        trace.residual_sq.push_back(res_sq(q));
        if (decomp) {
            std::vector<ProbVector> pargs(static_cast<size_t>(m - 1), p);
            p = apply_m(a, pargs);
            p.entries /= p.entries.sum();
            trace.boundary_norm_sq.push_back(p.entries.squaredNorm());
        }
        if (step <= tol) {
            trace.converged = true;
            break;
        }
    }

    if (decomp) {
        const double one_minus = 1.0 - decomp->alpha;
        double exponent = 2.0;  // 2 (m-1)^nstep
        for (size_t nstep = 0; nstep < trace.residual_sq.size(); ++nstep) {
            const double scale = std::pow(one_minus, exponent);
            const double predicted = scale * (trace.boundary_norm_sq[nstep] - 1.0 / n);
            if (trace.residual_sq[nstep] > 1e-14 || predicted > 1e-14)
                trace.decay_identity_max_err =
                    std::max(trace.decay_identity_max_err, std::abs(trace.residual_sq[nstep] - predicted));
            exponent *= static_cast<double>(m - 1);
        }
    }

    trace.fixed_point = q;
    return trace;
}

std::optional<ProbVector> find_identity(const StochTensor& a) {
    if (a.order() != 3) throw DimensionError("find_identity requires an order-3 tensor");
    const int n = a.dim();
    const double tol = tols().structural;
    for (int k = 0; k < n; ++k) {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j) {
                const double want = (i == j) ? 1.0 : 0.0;
                if (std::abs(a.at({i, j, k}) - want) > tol || std::abs(a.at({i, k, j}) - want) > tol)
                    ok = false;
            }
        if (ok) return ProbVector::basis(n, k);  // unique by the counting argument
    }
    return std::nullopt;
}

std::optional<ProbVector> find_inverse(const StochTensor& a, const ProbVector& p) {
    std::optional<ProbVector> id = find_identity(a);
    if (!id) throw NoIdentityError("find_inverse: the tensor has no identity");
    const int k = *id->delta_index();
    std::optional<int> mi = p.delta_index();
    if (!mi) return std::nullopt;  // only delta vectors are invertible
    const int n = a.dim();
    const double tol = tols().structural;
    for (int cand = 0; cand < n; ++cand) {
        if (std::abs(a.at({k, *mi, cand}) - 1.0) <= tol && std::abs(a.at({k, cand, *mi}) - 1.0) <= tol)
            return ProbVector::basis(n, cand);
    }
    return std::nullopt;
}

// ---- builders ---------------------------------------------------------------

StochTensor make_cyclic_convolution_tensor(int n) {
    std::vector<double> e(static_cast<size_t>(ipow(n, 3)), 0.0);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) e[static_cast<size_t>((((j + k) % n) * n + j) * n + k)] = 1.0;
    return StochTensor(3, n, std::move(e));
}

StochTensor make_t2() {
    // slices over axis 0: (I, P2); P2 symmetric so all displays agree
    return StochTensor(3, 2, {1, 0, 0, 1, 0, 1, 1, 0});
}

StochTensor make_t3() {
    std::vector<double> e(27, 0.0);
    auto set = [&](int i, int j, int k) { e[static_cast<size_t>((i * 3 + j) * 3 + k)] = 1.0; };
    // A_{0,.,.} = I, A_{1,.,.} = P3, A_{2,.,.} = P3^2 with P3 = [[0,1,0],[0,0,1],[1,0,0]]
    for (int j = 0; j < 3; ++j) set(0, j, j);
    for (int j = 0; j < 3; ++j) set(1, j, (j + 1) % 3);
    for (int j = 0; j < 3; ++j) set(2, j, (j + 2) % 3);
    return StochTensor(3, 3, std::move(e));
}

StochTensor tensor_from_latin_square(const std::vector<std::vector<int>>& square) {
    const int n = static_cast<int>(square.size());
    std::vector<double> e(static_cast<size_t>(ipow(n, 3)), 0.0);
    for (int j = 0; j < n; ++j) {
        if (static_cast<int>(square[static_cast<size_t>(j)].size()) != n)
            throw DimensionError("latin square is not square");
        for (int k = 0; k < n; ++k) {
            const int i = square[static_cast<size_t>(j)][static_cast<size_t>(k)];
            if (i < 0 || i >= n) throw ValidationError("latin square symbol out of range");
            e[static_cast<size_t>((i * n + j) * n + k)] = 1.0;
        }
    }
    StochTensor t(3, n, std::move(e));
    if (!validate(t).is_permutation()) throw ValidationError("array is not a latin square");
    return t;
}

namespace {

std::vector<std::vector<int>> cyclic_square(int n) {
    std::vector<std::vector<int>> sq(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n)));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) sq[static_cast<size_t>(j)][static_cast<size_t>(k)] = (j + k) % n;
    return sq;
}

void intercalate_flips(std::vector<std::vector<int>>& sq, int attempts, Rng& rng) {
    const int n = static_cast<int>(sq.size());
    if (n < 2) return;
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int t = 0; t < attempts; ++t) {
        int r1 = pick(rng), r2 = pick(rng), c1 = pick(rng), c2 = pick(rng);
        if (r1 == r2 || c1 == c2) continue;
        auto& a = sq[static_cast<size_t>(r1)][static_cast<size_t>(c1)];
        auto& b = sq[static_cast<size_t>(r1)][static_cast<size_t>(c2)];
        auto& c = sq[static_cast<size_t>(r2)][static_cast<size_t>(c1)];
        auto& d = sq[static_cast<size_t>(r2)][static_cast<size_t>(c2)];
        if (a == d && b == c && a != b) {
            std::swap(a, b);
            std::swap(c, d);
        }
    }
}

}  // namespace

StochTensor random_permutation_tensor(int n, Rng& rng) {
    auto sq = cyclic_square(n);
    intercalate_flips(sq, 20 * n * n, rng);
    auto rows = random_permutation(n, rng);
    auto cols = random_permutation(n, rng);
    auto syms = random_permutation(n, rng);
    std::vector<std::vector<int>> out(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n)));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            out[static_cast<size_t>(j)][static_cast<size_t>(k)] = syms[static_cast<size_t>(
                sq[static_cast<size_t>(rows[static_cast<size_t>(j)])][static_cast<size_t>(cols[static_cast<size_t>(k)])])];
    return tensor_from_latin_square(out);
}

StochTensor random_tristochastic(int n, int num_terms, Rng& rng) {
    RVec w = random_probability(num_terms, rng);
    std::vector<double> acc(static_cast<size_t>(ipow(n, 3)), 0.0);
    for (int t = 0; t < num_terms; ++t) {
        StochTensor perm = random_permutation_tensor(n, rng);
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += w(t) * perm.data()[i];
    }
    return StochTensor(3, n, std::move(acc));
}

StochTensor random_m_stochastic(int order, int n, int num_terms, Rng& rng) {
    RVec w = random_probability(num_terms, rng);
    std::vector<double> acc(static_cast<size_t>(ipow(n, order)), 0.0);
    std::vector<int> idx(static_cast<size_t>(order));
    for (int t = 0; t < num_terms; ++t) {
        std::vector<std::vector<int>> perms;
        for (int k = 0; k < order; ++k) perms.push_back(random_permutation(n, rng));
        const long long args = ipow(n, order - 1);
        for (long long c = 0; c < args; ++c) {
            long long tmp = c;
            int sum = 0;
            for (int k = order - 1; k >= 1; --k) {
                idx[static_cast<size_t>(k)] = static_cast<int>(tmp % n);
                tmp /= n;
                sum += perms[static_cast<size_t>(k)][static_cast<size_t>(idx[static_cast<size_t>(k)])];
            }
            idx[0] = perms[0][static_cast<size_t>(sum % n)];
            long long flat = 0;
            for (int k = 0; k < order; ++k) flat = flat * n + idx[static_cast<size_t>(k)];
            acc[static_cast<size_t>(flat)] += w(t);
        }
    }
    return StochTensor(order, n, std::move(acc));
}

namespace {

/// Extend a Latin rectangle (rows 0..filled-1 complete) by one row via
/// bipartite matching columns -> unused symbols; Hall's condition holds for
/// rectangle extension, so this always succeeds.
bool complete_row(std::vector<std::vector<int>>& sq, int row, Rng& rng) {
    const int n = static_cast<int>(sq.size());
    std::vector<std::vector<int>> avail(static_cast<size_t>(n));
    for (int col = 0; col < n; ++col) {
        std::vector<bool> used(static_cast<size_t>(n), false);
        for (int r = 0; r < row; ++r) used[static_cast<size_t>(sq[static_cast<size_t>(r)][static_cast<size_t>(col)])] = true;
        for (int s = 0; s < n; ++s)
            if (!used[static_cast<size_t>(s)]) avail[static_cast<size_t>(col)].push_back(s);
        std::shuffle(avail[static_cast<size_t>(col)].begin(), avail[static_cast<size_t>(col)].end(), rng);
    }
    std::vector<int> sym_of_col(static_cast<size_t>(n), -1), col_of_sym(static_cast<size_t>(n), -1);
    std::vector<bool> seen;
    std::function<bool(int)> augment = [&](int col) -> bool {
        for (int s : avail[static_cast<size_t>(col)]) {
            if (seen[static_cast<size_t>(s)]) continue;
            seen[static_cast<size_t>(s)] = true;
            if (col_of_sym[static_cast<size_t>(s)] < 0 || augment(col_of_sym[static_cast<size_t>(s)])) {
                col_of_sym[static_cast<size_t>(s)] = col;
                sym_of_col[static_cast<size_t>(col)] = s;
                return true;
            }
        }
        return false;
    };
    for (int col = 0; col < n; ++col) {
        seen.assign(static_cast<size_t>(n), false);
        if (!augment(col)) return false;
    }
    for (int col = 0; col < n; ++col) sq[static_cast<size_t>(row)][static_cast<size_t>(col)] = sym_of_col[static_cast<size_t>(col)];
    return true;
}

}  // namespace

ReducibleConstruction random_reducible_tensor(int n, int sub_dim, Rng& rng) {
    if (sub_dim < 1 || 2 * sub_dim > n)
        throw ValidationError("random_reducible_tensor needs 1 <= sub_dim <= N/2");
    const int c = sub_dim;
    const int k = n - c;

    // Reducibility with I = {c..n-1} only constrains the top-left c x c
    // block of the Latin square to use symbols < c. Fill the first c rows
    // explicitly, then complete row by row (Hall).
    std::vector<std::vector<int>> sq(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n), -1));
    auto tl = cyclic_square(c);
    intercalate_flips(tl, 10 * c * c, rng);
    for (int j = 0; j < c; ++j)
        for (int l = 0; l < c; ++l) sq[static_cast<size_t>(j)][static_cast<size_t>(l)] = tl[static_cast<size_t>(j)][static_cast<size_t>(l)];
    auto colshift = random_permutation(k, rng);
    for (int j = 0; j < c; ++j)
        for (int l = 0; l < k; ++l)
            sq[static_cast<size_t>(j)][static_cast<size_t>(c + colshift[static_cast<size_t>(l)])] = c + (j + l) % k;
    for (int row = c; row < n; ++row) {
        if (!complete_row(sq, row, rng))
            throw ValidationError("reducible construction: rectangle completion failed");
    }

    std::vector<int> planted;
    for (int i = c; i < n; ++i) planted.push_back(i);
    return {tensor_from_latin_square(sq), IndexSet(std::move(planted))};
}

}  // namespace triconv
