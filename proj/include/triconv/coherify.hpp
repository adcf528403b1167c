#pragma once

#include "triconv/classical.hpp"
#include "triconv/qchannel.hpp"

#include <string>
#include <vector>

namespace triconv {

enum class BlockScheme { identity, fourier, mub, custom };

std::string to_string(BlockScheme s);
BlockScheme block_scheme_from_string(const std::string& s);

/// N unitary blocks of side N; row n of block j is the basis vector
/// |B^j_n> whose components run over the Kraus index.
struct BlockBasisFamily {
    std::vector<CMat> blocks;
    BlockScheme scheme = BlockScheme::custom;

    BlockBasisFamily() = default;
    BlockBasisFamily(std::vector<CMat> b, BlockScheme s);

    int n_blocks() const { return static_cast<int>(blocks.size()); }
    int dim() const { return static_cast<int>(blocks.at(0).rows()); }
};

/// identity: all blocks I. fourier: B^1 = I, the rest F_N. mub: B^1 = I and
/// the remaining blocks from the prime-dimension MUB family (requires
/// prime N).
BlockBasisFamily default_blocks(int n, BlockScheme scheme);

/// mub for prime N, fourier otherwise.
BlockScheme default_scheme_for(int n);

struct CoherenceReport {
    double c2 = 0.0;
    double entropic = 0.0;  // nats
    double purity = 0.0;
    std::vector<double> choi_spectrum;  // eigenvalues of the Jamiolkowski state, descending
};

CoherenceReport coherence_report(const DynamicalMatrix& d);

struct Coherification {
    KrausSet kraus;
    DynamicalMatrix choi;
};

/// Diagonal (classical) embedding: D = diag(flattened tensor).
DynamicalMatrix coherify_diagonal(const StochTensor& a);

/// Optimal coherification of a tristochastic permutation tensor: N Kraus
/// operators whose row-j nonzero columns follow the tensor pattern and
/// carry the block-basis vectors.
Coherification coherify_permutation(const StochTensor& t, const BlockBasisFamily& basis);

/// (1/N^{2(m-1)}) [ sum |D_ab|^2 - sum |D_aa|^2 ].
double c2_coherence(const DynamicalMatrix& d);

/// S(diag(rho_Phi)) - S(rho_Phi).
double entropic_coherence(const DynamicalMatrix& d);

/// Tr[rho_Phi^2].
double channel_purity(const DynamicalMatrix& d);

/// Two-Kraus coherification of the tristochastic qubit tensor A(x); the
/// free unitary u links the paired bases (defaults to the theta = pi/2
/// rotation when omitted by callers).
Coherification coherify_qubit_tristochastic(double x, const CMat& u);
Coherification coherify_qubit_tristochastic(double x);

/// A(x): slices [[x,1-x],[1-x,x]] and [[1-x,x],[x,1-x]].
StochTensor qubit_tristochastic_tensor(double x);

/// Over `trials` random input pairs differing only off the diagonal, the
/// output diagonals agree and equal the classical tensor action on the
/// input diagonals (permutation-tensor coherifications only).
bool diagonal_dependence_check(const KrausSet& k, const StochTensor& t, int trials,
                               std::uint64_t seed);

}  // namespace triconv
