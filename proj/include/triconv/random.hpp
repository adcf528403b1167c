#pragma once

#include "triconv/numkit.hpp"

#include <cstdint>
#include <random>

namespace triconv {

using Rng = std::mt19937_64;

constexpr std::uint64_t kDefaultSeed = 20230517;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Complex standard Gaussian entries.
CMat gaussian_matrix(int rows, int cols, Rng& rng);

/// Haar-random unitary via QR of a Ginibre matrix with phase fix.
CMat haar_unitary(int n, Rng& rng);

/// Haar-random pure state on C^n.
CVec haar_state(int n, Rng& rng);

/// Full-rank random density matrix G G^dag / Tr.
CMat random_density(int n, Rng& rng);

/// Dirichlet(1,...,1)-distributed probability vector.
RVec random_probability(int n, Rng& rng);

std::vector<int> random_permutation(int n, Rng& rng);

}  // namespace triconv
