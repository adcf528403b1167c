#include "triconv/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace triconv {

CMat gaussian_matrix(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = cxd(g(rng), g(rng));
    return m;
}

CMat haar_unitary(int n, Rng& rng) {
    CMat g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<CMat> qr(g);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
        cxd d = r(i, i);
        double a = std::abs(d);
        q.col(i) *= (a > 0 ? d / a : cxd(1.0));
    }
    return q;
}

CVec haar_state(int n, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = cxd(g(rng), g(rng));
    return v / v.norm();
}

CMat random_density(int n, Rng& rng) {
    CMat g = gaussian_matrix(n, n, rng);
    CMat m = g * g.adjoint();
    return m / m.trace().real();
}

RVec random_probability(int n, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    RVec p(n);
    for (int i = 0; i < n; ++i) p(i) = e(rng);
    return p / p.sum();
}

std::vector<int> random_permutation(int n, Rng& rng) {
    std::vector<int> p(static_cast<size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

}  // namespace triconv
