#include "qfc/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "qfc/errors.hpp"

namespace qfc {

template <typename Scalar>
Mat<Scalar> symplectic_form(int n) {
  Mat<Scalar> om = Mat<Scalar>::Zero(2 * n, 2 * n);
  om.topRightCorner(n, n).setIdentity();
  om.bottomLeftCorner(n, n) = -Mat<Scalar>::Identity(n, n);
  return om;
}

template <typename Scalar>
double symplectic_defect(const Mat<Scalar>& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) throw ConfigError("symplectic_defect: need a square even-sized matrix");
  const Mat<Scalar> om = symplectic_form<Scalar>(static_cast<int>(m.rows() / 2));
  return (m * om * m.adjoint() - om).norm() / om.norm();
}

template <typename Scalar>
double relative_residual(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  const double nb = b.norm();
  return (a - b).norm() / (nb > 0.0 ? nb : 1.0);
}

template <typename Scalar>
PolarFactors<Scalar> polar_decompose(const Mat<Scalar>& s) {
  if (s.rows() != s.cols() || s.rows() == 0) throw ConfigError("polar_decompose: need a non-empty square matrix");
  Eigen::JacobiSVD<Mat<Scalar>> svd;
  Eigen::BDCSVD<Mat<Scalar>> bdc;
  VectorXd sv;
  Mat<Scalar> u, v;
  if (s.rows() <= 64) {
    svd.compute(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sv = svd.singularValues();
    u = svd.matrixU();
    v = svd.matrixV();
  } else {
    bdc.compute(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sv = bdc.singularValues();
    u = bdc.matrixU();
    v = bdc.matrixV();
  }
  if (!(sv.minCoeff() > 1e-14 * sv.maxCoeff())) throw DegenerateInputError("polar_decompose: singular input");
  PolarFactors<Scalar> f;
  f.p = u * sv.asDiagonal() * u.adjoint();
  f.p = 0.5 * (f.p + f.p.adjoint()).eval();
  f.y = u * v.adjoint();
  return f;
}

MatrixXc principal_sqrt(const MatrixXc& x) {
  const int n = static_cast<int>(x.rows());
  Eigen::ComplexSchur<MatrixXc> schur(x);
  const MatrixXc& t = schur.matrixT();
  const MatrixXc& z = schur.matrixU();
  MatrixXc r = MatrixXc::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const cplx l = t(i, i);
    if (std::abs(l.imag()) <= 1e-12 * std::max(1.0, std::abs(l)) && l.real() < 0.0)
      r(i, i) = cplx(0.0, std::sqrt(-l.real()));
    else
      r(i, i) = std::sqrt(l);
  }
  for (int j = 1; j < n; ++j)
    for (int i = j - 1; i >= 0; --i) {
      cplx acc = t(i, j);
      for (int k = i + 1; k < j; ++k) acc -= r(i, k) * r(k, j);
      const cplx den = r(i, i) + r(j, j);
      r(i, j) = std::abs(den) > 0.0 ? acc / den : cplx(0.0);
    }
  return z * r * z.adjoint();
}

TakagiFactors takagi(const MatrixXc& m) {
  if (m.rows() != m.cols()) throw ConfigError("takagi: need a square matrix");
  const double nm = m.norm();
  if ((m - m.transpose()).norm() > 1e-10 * std::max(nm, 1e-300))
    throw ConfigError("takagi: input is not complex symmetric");
  Eigen::JacobiSVD<MatrixXc> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatrixXc& o = svd.matrixU();
  const MatrixXc& q = svd.matrixV();
  const MatrixXc x = (o.transpose() * q).conjugate();
  TakagiFactors f;
  f.w = o * principal_sqrt(x);
  f.lambda = svd.singularValues();
  return f;
}

MatrixXc ladder_to_quadrature(int n) {
  const double s = 1.0 / std::sqrt(2.0);
  MatrixXc t(2 * n, 2 * n);
  const MatrixXc e = MatrixXc::Identity(n, n);
  t << s * e, s * e, -kI * s * e, kI * s * e;
  return t;
}

namespace {

VectorXd squeeze_factors(const VectorXd& lambda) {
  const int n = static_cast<int>(lambda.size());
  VectorXd d(2 * n);
  for (int i = 0; i < n; ++i) {
    const double xi = lambda(i) + std::sqrt(lambda(i) * lambda(i) + 1.0);
    d(i) = xi;
    d(i + n) = 1.0 / xi;
  }
  return d;
}

// Index of the largest-magnitude entry of column c.
template <typename Derived>
int peak_row(const Eigen::MatrixBase<Derived>& w, int c) {
  Eigen::Index r;
  w.col(c).cwiseAbs().maxCoeff(&r);
  return static_cast<int>(r);
}

void check_shape(Eigen::Index rows, Eigen::Index cols) {
  if (rows != cols || rows == 0 || rows % 2 != 0)
    throw ConfigError("Bloch-Messiah decomposition needs a non-empty square matrix of even size");
}

}  // namespace

BlochMessiahFactors<double> abmd_at_zero(const MatrixXd& s) {
  check_shape(s.rows(), s.cols());
  if (!s.allFinite()) throw DegenerateInputError("abmd_at_zero: non-finite input");
  const int n = static_cast<int>(s.rows() / 2);
  const PolarFactors<double> pf = polar_decompose<double>(s);
  const MatrixXd a = pf.p.topLeftCorner(n, n);
  const MatrixXd b = pf.p.topRightCorner(n, n);
  const MatrixXd c = pf.p.bottomRightCorner(n, n);
  MatrixXc m(n, n);
  m.real() = 0.5 * (a - c);
  m.imag() = 0.5 * (b + b.transpose());
  m = 0.5 * (m + m.transpose()).eval();
  TakagiFactors tk = takagi(m);
  // Takagi columns are fixed only up to sign; make the peak entry's real part non-negative.
  for (int k = 0; k < n; ++k) {
    const int r = peak_row(tk.w, k);
    if (tk.w(r, k).real() < 0.0) tk.w.col(k) *= -1.0;
  }
  BlochMessiahFactors<double> f;
  f.u.resize(2 * n, 2 * n);
  f.u << tk.w.real(), -tk.w.imag(), tk.w.imag(), tk.w.real();
  f.d = squeeze_factors(tk.lambda);
  f.v_dagger = f.u.transpose() * pf.y;
  f.residual = relative_residual<double>(f.reconstruct(), s);
  return f;
}

BlochMessiahFactors<cplx> abmd(const MatrixXc& s) {
  check_shape(s.rows(), s.cols());
  if (!s.allFinite()) throw DegenerateInputError("abmd: non-finite input");
  const int n = static_cast<int>(s.rows() / 2);
  const PolarFactors<cplx> pf = polar_decompose<cplx>(s);
  const MatrixXc t = ladder_to_quadrature(n);
  const MatrixXc pl = t.adjoint() * pf.p * t;
  const MatrixXc beta = pl.topRightCorner(n, n);
  MatrixXc o, q;
  VectorXd lambda;
  if (n <= 64) {
    Eigen::JacobiSVD<MatrixXc> svd(beta, Eigen::ComputeFullU | Eigen::ComputeFullV);
    o = svd.matrixU();
    q = svd.matrixV();
    lambda = svd.singularValues();
  } else {
    Eigen::BDCSVD<MatrixXc> svd(beta, Eigen::ComputeFullU | Eigen::ComputeFullV);
    o = svd.matrixU();
    q = svd.matrixV();
    lambda = svd.singularValues();
  }
  for (int k = 0; k < n; ++k) {
    const int r = peak_row(o, k);
    const cplx ph = std::abs(o(r, k)) > 0.0 ? std::conj(o(r, k)) / std::abs(o(r, k)) : cplx(1.0);
    o.col(k) *= ph;
    q.col(k) *= ph;
  }
  MatrixXc blk = MatrixXc::Zero(2 * n, 2 * n);
  blk.topLeftCorner(n, n) = o;
  blk.bottomRightCorner(n, n) = q;
  BlochMessiahFactors<cplx> f;
  f.u = t * blk * t.adjoint();
  f.d = squeeze_factors(lambda);
  f.v_dagger = f.u.adjoint() * pf.y;
  f.residual = relative_residual<cplx>(f.reconstruct(), s);
  return f;
}

template <typename Scalar>
BlochMessiahFactors<Scalar> decompose_checked(const Mat<Scalar>& s, double tol) {
  BlochMessiahFactors<Scalar> f = decompose(s);
  if (!(f.residual <= tol)) {
    std::ostringstream os;
    os << "Bloch-Messiah reconstruction residual " << f.residual << " exceeds " << tol;
    throw ConsistencyError(os.str());
  }
  return f;
}

namespace {

template <typename Scalar>
Scalar i_times(double v) {
  if constexpr (std::is_same_v<Scalar, double>) {
    (void)v;
    return 0.0;
  } else {
    return Scalar(0.0, v);
  }
}

template <typename Scalar>
double imag_of(Scalar z) {
  if constexpr (std::is_same_v<Scalar, double>) {
    (void)z;
    return 0.0;
  } else {
    return z.imag();
  }
}

}  // namespace

template <typename Scalar>
GeneratorPair<Scalar> generators(const BlochMessiahFactors<Scalar>& f, const Mat<Scalar>& s_prime) {
  const int m = static_cast<int>(f.d.size());
  if (s_prime.rows() != m || s_prime.cols() != m) throw ConfigError("generators: derivative has the wrong shape");
  const Mat<Scalar> q = f.u.adjoint() * s_prime * f.v_dagger.adjoint();
  const double dmax = f.d.maxCoeff();
  const double eps = 1e-8 * dmax;
  const double tol = 1e-8 * std::max(q.cwiseAbs().maxCoeff() * dmax, 1e-300);

  GeneratorPair<Scalar> g;
  g.h = Mat<Scalar>::Zero(m, m);
  g.k = Mat<Scalar>::Zero(m, m);
  g.d_prime.resize(m);
  for (int i = 0; i < m; ++i) {
    const double di = f.d(i);
    g.d_prime(i) = std::real(q(i, i));
    g.h(i, i) = i_times<Scalar>(imag_of(q(i, i)) / di);
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const double dj = f.d(j);
      const Scalar qij = q(i, j);
      const Scalar qji_c = Eigen::numext::conj(q(j, i));
      const Scalar num_h = qij * dj + qji_c * di;
      const Scalar num_k = qij * di + qji_c * dj;
      if (std::abs(di - dj) < eps) {
        if (std::abs(num_h) <= tol && std::abs(num_k) <= tol) continue;
        std::ostringstream os;
        os << "generators: singular values " << i << " and " << j << " coincide (" << di
           << "); re-factorize at this point";
        throw DegeneracyError(os.str());
      }
      const double den = dj * dj - di * di;
      g.h(i, j) = num_h / den;
      g.k(i, j) = num_k / den;
    }
  }
  g.h = (0.5 * (g.h - g.h.adjoint())).eval();
  g.k = (0.5 * (g.k - g.k.adjoint())).eval();
  return g;
}

template <typename Scalar>
double min_column_overlap(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  double m = 1.0;
  for (int k = 0; k < a.cols(); ++k) {
    const double na = a.col(k).norm(), nb = b.col(k).norm();
    m = std::min(m, std::abs(a.col(k).dot(b.col(k))) / (na * nb));
  }
  return m;
}

template <typename Scalar>
BlochMessiahFactors<Scalar> align_to(const BlochMessiahFactors<Scalar>& fresh, const BlochMessiahFactors<Scalar>& prev) {
  const int n = fresh.n();
  if (prev.n() != n) throw ConfigError("align_to: size mismatch");
  // Pair overlaps between previous column pairs (i, i+n) and fresh pairs (j, j+n).
  MatrixXd ov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      ov(i, j) = std::norm(prev.u.col(i).dot(fresh.u.col(j))) + std::norm(prev.u.col(i + n).dot(fresh.u.col(j + n)));
  std::vector<int> perm(n, -1);
  std::vector<bool> row_used(n, false), col_used(n, false);
  for (int round = 0; round < n; ++round) {
    double best = -1;
    int bi = 0, bj = 0;
    for (int i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < n; ++j)
        if (!col_used[j] && ov(i, j) > best) {
          best = ov(i, j);
          bi = i;
          bj = j;
        }
    }
    perm[bi] = bj;
    row_used[bi] = true;
    col_used[bj] = true;
  }

  BlochMessiahFactors<Scalar> out = fresh;
  Mat<Scalar> v = fresh.v_dagger.adjoint();
  Mat<Scalar> vo = v;
  for (int i = 0; i < n; ++i) {
    const int j = perm[i];
    out.u.col(i) = fresh.u.col(j);
    out.u.col(i + n) = fresh.u.col(j + n);
    out.d(i) = fresh.d(j);
    out.d(i + n) = fresh.d(j + n);
    vo.col(i) = v.col(j);
    vo.col(i + n) = v.col(j + n);
  }

  // Groups of (near-)equal squeeze factors share a unitary gauge; fix it by Procrustes.
  const double eps = 1e-8 * out.d.maxCoeff();
  std::vector<bool> done(n, false);
  for (int i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<int> g;
    for (int j = i; j < n; ++j)
      if (!done[j] && std::abs(out.d(j) - out.d(i)) < eps) {
        g.push_back(j);
        done[j] = true;
      }
    const int k = static_cast<int>(g.size());
    Mat<Scalar> x = Mat<Scalar>::Zero(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        x(a, b) = out.u.col(g[a]).dot(prev.u.col(g[b])) + out.u.col(g[a] + n).dot(prev.u.col(g[b] + n));
    Eigen::JacobiSVD<Mat<Scalar>> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat<Scalar> r = svd.matrixU() * svd.matrixV().adjoint();
    Mat<Scalar> u1(out.u.rows(), k), u2(out.u.rows(), k), v1(vo.rows(), k), v2(vo.rows(), k);
    for (int a = 0; a < k; ++a) {
      u1.col(a) = out.u.col(g[a]);
      u2.col(a) = out.u.col(g[a] + n);
      v1.col(a) = vo.col(g[a]);
      v2.col(a) = vo.col(g[a] + n);
    }
    u1 = (u1 * r).eval();
    u2 = (u2 * r).eval();
    v1 = (v1 * r).eval();
    v2 = (v2 * r).eval();
    for (int a = 0; a < k; ++a) {
      out.u.col(g[a]) = u1.col(a);
      out.u.col(g[a] + n) = u2.col(a);
      vo.col(g[a]) = v1.col(a);
      vo.col(g[a] + n) = v2.col(a);
    }
  }
  out.v_dagger = vo.adjoint();
  return out;
}

template <typename Scalar>
std::vector<BlochMessiahFactors<Scalar>> continue_decomposition(const MatrixFamily<Scalar>& family,
                                                                const std::vector<double>& grid,
                                                                ContinuationStats* stats,
                                                                const ContinuationOptions& opt) {
  if (grid.empty()) return {};
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ConfigError("continue_decomposition: grid must be strictly increasing");
  ContinuationStats st;

  auto eval = [&](double w) {
    try {
      auto r = family(w);
      if (!r.first.allFinite() || !r.second.allFinite()) throw DegenerateInputError("non-finite matrix");
      return r;
    } catch (const StabilityError& e) {
      std::ostringstream os;
      os << e.what() << " at omega = " << w;
      throw StabilityError(os.str(), e.max_real_eigenvalue());
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "matrix family failed at omega = " << w << ": " << e.what();
      throw std::runtime_error(os.str());
    }
  };

  std::vector<BlochMessiahFactors<Scalar>> out;
  auto [s0, ds0] = eval(grid[0]);
  BlochMessiahFactors<Scalar> cur = decompose(s0);
  cur.omega = grid[0];
  st.max_residual = cur.residual;
  out.push_back(cur);

  // An inexact anchor (non-symplectic input) cannot be carried by generators;
  // fall back to fresh, aligned factors at every point.
  const bool carry = !opt.anchor_every_point && cur.residual <= opt.residual_tol;
  Mat<Scalar> s_a = s0, ds_a = ds0;
  for (std::size_t idx = 1; idx < grid.size(); ++idx) {
    const double w0 = grid[idx - 1], w1 = grid[idx];
    const BlochMessiahFactors<Scalar> prev = cur;
    bool reanchor = !carry;
    Mat<Scalar> s_end, ds_end;
    if (!reanchor) {
      try {
        double w = w0;
        while (w < w1) {
          const GeneratorPair<Scalar> g0 = generators(cur, ds_a);
          const double gn = std::max(g0.h.norm(), g0.k.norm());
          double h = w1 - w;
          if (gn * h > opt.max_step_norm) h = opt.max_step_norm / gn;
          if (w + h > w1 || w1 - (w + h) < 1e-12 * std::abs(w1 - w0)) h = w1 - w;
          ++st.substeps;
          auto [s1, ds1] = eval(w + h);
          BlochMessiahFactors<Scalar> pred = cur;
          pred.u = cur.u * Mat<Scalar>(g0.h * h).exp();
          pred.v_dagger = (cur.v_dagger.adjoint() * Mat<Scalar>(g0.k * h).exp()).adjoint();
          pred.d = cur.d + h * g0.d_prime;
          const GeneratorPair<Scalar> g1 = generators(pred, ds1);
          BlochMessiahFactors<Scalar> nxt = cur;
          nxt.u = cur.u * Mat<Scalar>((0.5 * h) * (g0.h + g1.h)).exp();
          nxt.v_dagger = (cur.v_dagger.adjoint() * Mat<Scalar>((0.5 * h) * (g0.k + g1.k)).exp()).adjoint();
          nxt.d = cur.d + (0.5 * h) * (g0.d_prime + g1.d_prime);
          if (!(nxt.d.minCoeff() > 0.0)) throw DegeneracyError("continuation: squeeze factor crossed zero");
          cur = nxt;
          w += h;
          s_a = s1;
          ds_a = ds1;
        }
        s_end = s_a;
        ds_end = ds_a;
        cur.omega = w1;
        cur.residual = relative_residual<Scalar>(cur.reconstruct(), s_end);
        if (!(cur.residual <= opt.residual_tol)) reanchor = true;
      } catch (const DegeneracyError&) {
        reanchor = true;
      }
    }
    if (reanchor) {
      auto [s1, ds1] = eval(w1);
      s_a = s1;
      ds_a = ds1;
      cur = align_to(decompose(s1), prev);
      cur.omega = w1;
      cur.residual = relative_residual<Scalar>(cur.reconstruct(), s1);
      ++st.reanchors;
    }
    st.max_residual = std::max(st.max_residual, cur.residual);
    st.min_overlap = std::min(st.min_overlap, min_column_overlap<Scalar>(prev.u, cur.u));
    out.push_back(cur);
  }
  if (stats) *stats = st;
  return out;
}

#define QFC_INSTANTIATE(S)                                                                                       \
  template Mat<S> symplectic_form<S>(int);                                                                       \
  template double symplectic_defect<S>(const Mat<S>&);                                                           \
  template double relative_residual<S>(const Mat<S>&, const Mat<S>&);                                            \
  template PolarFactors<S> polar_decompose<S>(const Mat<S>&);                                                    \
  template BlochMessiahFactors<S> decompose_checked<S>(const Mat<S>&, double);                                   \
  template GeneratorPair<S> generators<S>(const BlochMessiahFactors<S>&, const Mat<S>&);                         \
  template double min_column_overlap<S>(const Mat<S>&, const Mat<S>&);                                           \
  template BlochMessiahFactors<S> align_to<S>(const BlochMessiahFactors<S>&, const BlochMessiahFactors<S>&);     \
  template std::vector<BlochMessiahFactors<S>> continue_decomposition<S>(const MatrixFamily<S>&,                 \
                                                                         const std::vector<double>&,             \
                                                                         ContinuationStats*, const ContinuationOptions&);

QFC_INSTANTIATE(double)
QFC_INSTANTIATE(cplx)

#undef QFC_INSTANTIATE

}  // namespace qfc
