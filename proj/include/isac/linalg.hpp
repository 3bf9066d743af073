// Dense complex linear-algebra kernels shared by every solver:
// Hermitian eigendecomposition, full SVD, HPD inverses, PSD projections,
// and deterministic reductions. Decompositions are Eigen-backed; wrappers
// pin the conventions the optimizers rely on (ascending eigenvalues,
// descending singular values, symmetrize-before-decompose).

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "isac/rng.hpp"

namespace isac {

using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;
using cplx = std::complex<double>;

struct HermitianEig {
    cmat basis;   // unitary, columns are eigenvectors
    rvec values;  // ascending
};

struct Svd {
    cmat left;      // full, rows x rows
    rvec singulars; // descending, min(rows, cols) entries
    cmat right;     // full, cols x cols
};

// Throws std::invalid_argument on non-square or non-finite input.
// The input is symmetrized as (A + A^H)/2 before decomposing.
HermitianEig eig_hermitian(const cmat& a);

Svd svd(const cmat& a);

// Entries i.i.d. CN(0,1), drawn row-major so results are layout-independent.
cmat sample_cscg(Eigen::Index rows, Eigen::Index cols, Philox& rng);

// Anti-diagonal 0/1 involution; conjugating a diagonal matrix by it
// reverses the diagonal order.
cmat flip_permutation(Eigen::Index k);

// Inverse of a Hermitian positive-definite matrix via Cholesky.
// A failed factorization gets one retry with 1e-12*(tr/dim) jitter,
// after which a std::runtime_error reports the conditioning problem.
cmat hpd_inverse(const cmat& a);

// Nearest (Frobenius) PSD matrix: symmetrize and clip negative eigenvalues.
cmat psd_clip(const cmat& a);

// Frobenius projection onto {X psd, tr(X) <= budget}: eigenvalue clipping
// plus the exact water-shift on the eigenvalues when the trace cap binds.
cmat project_trace_ball(const cmat& a, double budget);

// Power-capped Frobenius ball used by every precoder iteration:
// rescale by sqrt(budget/|w|_F^2) when outside, identity otherwise.
cmat project_power(const cmat& w, double budget);

// Summation with a fixed pairwise reduction tree; the result depends only
// on the element order, never on chunking, so traces stay bit-stable.
double pairwise_sum(const std::vector<double>& xs);

struct MeanSe {
    double mean;
    double se;  // sample standard error of the mean
};

MeanSe mean_se(const std::vector<double>& xs);

}  // namespace isac
