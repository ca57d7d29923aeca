#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "qfc/types.hpp"

namespace qfc {

/// Standard antisymmetric form [[0, I], [-I, 0]] for (x..., y...) ordering.
template <typename Scalar>
Mat<Scalar> symplectic_form(int n);

/// ||M Om M^dag - Om|| / ||Om||. Zero for (complex-)symplectic M.
template <typename Scalar>
double symplectic_defect(const Mat<Scalar>& m);

/// Relative Frobenius distance ||a - b|| / ||b||.
template <typename Scalar>
double relative_residual(const Mat<Scalar>& a, const Mat<Scalar>& b);

template <typename Scalar>
struct PolarFactors {
  Mat<Scalar> p;  // Hermitian positive definite
  Mat<Scalar> y;  // unitary (orthogonal when real)
};

/// S = P Y from an SVD. Throws DegenerateInputError for singular S.
template <typename Scalar>
PolarFactors<Scalar> polar_decompose(const Mat<Scalar>& s);

/// Principal square root of a unitary matrix. Eigenvalues on or within 1e-12
/// of the negative real axis are rotated to +i sqrt|lambda| deterministically.
MatrixXc principal_sqrt(const MatrixXc& x);

struct TakagiFactors {
  MatrixXc w;        // unitary
  VectorXd lambda;   // descending, non-negative
};

/// M = W diag(lambda) W^T for complex symmetric M. Throws ConfigError when
/// ||M - M^T|| exceeds 1e-10 ||M||.
TakagiFactors takagi(const MatrixXc& m);

template <typename Scalar>
struct BlochMessiahFactors {
  Mat<Scalar> u;
  VectorXd d;  // (xi_1..xi_n, 1/xi_1..1/xi_n)
  Mat<Scalar> v_dagger;
  double omega = 0;
  double residual = 0;  // ||U D V^dag - S|| / ||S||

  int n() const { return static_cast<int>(d.size() / 2); }
  Mat<Scalar> reconstruct() const { return u * d.asDiagonal() * v_dagger; }
};

/// Real factorization: polar, block partition, Takagi of the complex
/// symmetric block, orthogonal-symplectic U. No tolerance check (lossy
/// inputs are legal; inspect `residual`).
BlochMessiahFactors<double> abmd_at_zero(const MatrixXd& s);

/// Complex factorization for frequency-resolved transfer matrices: the
/// ladder-basis polar factor is split by an SVD of its off-diagonal block.
BlochMessiahFactors<cplx> abmd(const MatrixXc& s);

/// Overload set used by the continuation.
inline BlochMessiahFactors<double> decompose(const MatrixXd& s) { return abmd_at_zero(s); }
inline BlochMessiahFactors<cplx> decompose(const MatrixXc& s) { return abmd(s); }

/// Same factorization with factors checked: throws ConsistencyError if the
/// reconstruction residual exceeds `tol`.
template <typename Scalar>
BlochMessiahFactors<Scalar> decompose_checked(const Mat<Scalar>& s, double tol = 1e-8);

template <typename Scalar>
struct GeneratorPair {
  Mat<Scalar> h;  // U' = U H
  Mat<Scalar> k;  // V' = V K
  VectorXd d_prime;

  int n() const { return static_cast<int>(d_prime.size() / 2); }
  Mat<Scalar> h1() const { return h.topLeftCorner(n(), n()); }
  Mat<Scalar> h2() const { return h.topRightCorner(n(), n()); }
  Mat<Scalar> k1() const { return k.topLeftCorner(n(), n()); }
  Mat<Scalar> k2() const { return k.topRightCorner(n(), n()); }
};

/// Generators from Q = U^dag S' V = H D - D K + D'. Entries whose singular
/// values coincide within 1e-8 max(D) throw DegeneracyError unless their
/// right-hand side vanishes.
template <typename Scalar>
GeneratorPair<Scalar> generators(const BlochMessiahFactors<Scalar>& f, const Mat<Scalar>& s_prime);

/// Matrix family returning (S(omega), dS/domega).
template <typename Scalar>
using MatrixFamily = std::function<std::pair<Mat<Scalar>, Mat<Scalar>>(double)>;

struct ContinuationStats {
  int reanchors = 0;
  int substeps = 0;
  double max_residual = 0;
  double min_overlap = 1;
};

struct ContinuationOptions {
  double residual_tol = 1e-6;
  double max_step_norm = 0.05;  // ||H|| dw bound
  bool anchor_every_point = false;  // skip generator steps, align fresh factors only
};

/// Factors on a sorted grid, anchored at the first point and carried by
/// trapezoidal generator steps; re-anchors (with column alignment) when the
/// residual grows or a degeneracy appears. If the anchor itself misses
/// residual_tol every point is re-anchored.
template <typename Scalar>
std::vector<BlochMessiahFactors<Scalar>> continue_decomposition(const MatrixFamily<Scalar>& family,
                                                                const std::vector<double>& grid,
                                                                ContinuationStats* stats = nullptr,
                                                                const ContinuationOptions& opt = {});

/// Reorder/rephase `fresh` so its column pairs (k, k+n) best overlap `prev`.
template <typename Scalar>
BlochMessiahFactors<Scalar> align_to(const BlochMessiahFactors<Scalar>& fresh,
                                     const BlochMessiahFactors<Scalar>& prev);

/// min_k |<u_k(a), u_k(b)>| over all 2n columns.
template <typename Scalar>
double min_column_overlap(const Mat<Scalar>& a, const Mat<Scalar>& b);

/// Quadrature <-> ladder change of basis (1/sqrt2)[[I, I], [-i I, i I]].
MatrixXc ladder_to_quadrature(int n);

}  // namespace qfc
