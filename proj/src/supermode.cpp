#include "qfc/supermode.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qfc/errors.hpp"

namespace qfc {

const char* band_name(BandSelection b) {
  switch (b) {
    case BandSelection::all:
      return "all";
    case BandSelection::subharmonic:
      return "sub";
    case BandSelection::pump:
      return "pump";
  }
  return "all";
}

MultimodeBackground average_background(const std::vector<ModeState>& states, double delta, double delta_p) {
  if (states.empty()) throw ConfigError("average_background: no snapshots");
  MultimodeBackground bg;
  bg.alpha = VectorXc::Zero(states.front().alpha.size());
  bg.beta = VectorXc::Zero(states.front().beta.size());
  for (const ModeState& s : states) {
    if (s.alpha.size() != bg.alpha.size() || s.beta.size() != bg.beta.size())
      throw ConfigError("average_background: snapshots differ in size");
    bg.alpha += s.alpha;
    bg.beta += s.beta;
  }
  bg.alpha /= static_cast<double>(states.size());
  bg.beta /= static_cast<double>(states.size());
  bg.delta = delta;
  bg.delta_p = delta_p;
  return bg;
}

namespace {

// (rows x M) * diag(f) * (M x cols)
MatrixXc sandwich(const MatrixXc& left, const VectorXc& f, const MatrixXc& right) {
  return (left * f.asDiagonal()) * right;
}

double max_real_eig(const MatrixXc& m) {
  return Eigen::ComplexEigenSolver<MatrixXc>(m, false).eigenvalues().real().maxCoeff();
}

}  // namespace

FluctuationMatrix build_fluctuation_matrix(MultimodeBackground& bg, const ResonatorParams& p) {
  const int n = bg.n();
  if (n < 1 || bg.beta.size() != n) throw ConfigError("build_fluctuation_matrix: band sizes differ or are empty");
  const int m = grid_size_for(n);
  const int first = first_relative_mode(n);

  // Basis of active modes on the padded fast-time grid.
  MatrixXc g_in(m, n);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) g_in(k, i) = std::exp(kI * (2.0 * kPi * (first + i) * k / m));
  const MatrixXc g_in_c = g_in.conjugate();
  const MatrixXc g_out = g_in.adjoint() / static_cast<double>(m);
  const MatrixXc g_out_c = g_in.transpose() / static_cast<double>(m);

  const VectorXc a = to_time_domain(bg.alpha, m);
  const VectorXc b = to_time_domain(bg.beta, m);
  const VectorXc ac = a.conjugate();
  const VectorXc bc = b.conjugate();
  const cplx ig = kI * p.g0;

  FluctuationMatrix fm;
  fm.n = n;
  fm.m_a = MatrixXc::Zero(4 * n, 4 * n);
  for (int i = 0; i < n; ++i) {
    const int l = first + i;
    const cplx ca(-p.big_gamma, -subharmonic_detuning(l, bg.delta, p));
    const cplx cb(-p.big_gamma_pump, -pump_mode_detuning(l, bg.delta_p, p));
    fm.m_a(i, i) = ca;
    fm.m_a(n + i, n + i) = cb;
    fm.m_a(2 * n + i, 2 * n + i) = std::conj(ca);
    fm.m_a(3 * n + i, 3 * n + i) = std::conj(cb);
  }
  fm.m_a.block(0, n, n, n) = ig * sandwich(g_out, ac, g_in);
  fm.m_a.block(0, 2 * n, n, n) = ig * sandwich(g_out, b, g_in_c);
  fm.m_a.block(n, 0, n, n) = ig * sandwich(g_out, a, g_in);
  fm.m_a.block(2 * n, 0, n, n) = -ig * sandwich(g_out_c, bc, g_in);
  fm.m_a.block(2 * n, 3 * n, n, n) = -ig * sandwich(g_out_c, a, g_in_c);
  fm.m_a.block(3 * n, 2 * n, n, n) = -ig * sandwich(g_out_c, ac, g_in_c);

  fm.max_real_eigenvalue = max_real_eig(fm.m_a);
  bg.stable = fm.max_real_eigenvalue < 0.0;
  return fm;
}

void require_stable(const FluctuationMatrix& fm) {
  if (fm.max_real_eigenvalue >= 0.0) {
    std::ostringstream os;
    os << "linearized analysis requested on an unstable background (max Re lambda = " << fm.max_real_eigenvalue
       << ")";
    throw StabilityError(os.str(), fm.max_real_eigenvalue);
  }
}

namespace {

VectorXd loss_ports(const FluctuationMatrix& fm, const ResonatorParams& p) {
  const double sub = std::sqrt(2.0 * p.mu);
  const double pump = std::sqrt(2.0 * std::max(p.big_gamma_pump - p.gamma, 0.0));
  const int n = fm.n;
  if (fm.band == BandSelection::all) {
    VectorXd u(4 * n);
    u << VectorXd::Constant(n, sub), VectorXd::Constant(n, pump), VectorXd::Constant(n, sub),
        VectorXd::Constant(n, pump);
    return u;
  }
  return VectorXd::Constant(2 * n, fm.band == BandSelection::subharmonic ? sub : pump);
}

}  // namespace

InputOutput input_output(double omega, const FluctuationMatrix& fm, const ResonatorParams& p) {
  const int dim = static_cast<int>(fm.m_a.rows());
  const MatrixXc e = MatrixXc::Identity(dim, dim);
  Eigen::PartialPivLU<MatrixXc> lu(kI * omega * e - fm.m_a);
  if (!(lu.rcond() > 1e-14)) {
    std::ostringstream os;
    os << "input_output: resolvent is singular at omega = " << omega;
    throw StabilityError(os.str(), fm.max_real_eigenvalue);
  }
  InputOutput io;
  io.resolvent = lu.solve(e);
  const double u_in = std::sqrt(2.0 * p.gamma);
  io.m_in = (u_in * u_in) * io.resolvent - e;
  io.m_loss = u_in * io.resolvent * loss_ports(fm, p).asDiagonal();
  return io;
}

MatrixXc quadrature_noise(const MatrixXc& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) throw ConfigError("quadrature_noise: need an even square matrix");
  const MatrixXc t = ladder_to_quadrature(static_cast<int>(m.rows() / 2));
  return t * m * t.adjoint();
}

FluctuationMatrix restrict_band(const FluctuationMatrix& fm, BandSelection band) {
  if (band == BandSelection::all || fm.band != BandSelection::all) return fm;
  const int n = fm.n;
  const int off = band == BandSelection::subharmonic ? 0 : n;
  std::vector<int> idx;
  for (int i = 0; i < n; ++i) idx.push_back(off + i);
  for (int i = 0; i < n; ++i) idx.push_back(2 * n + off + i);
  FluctuationMatrix r;
  r.n = n;
  r.band = band;
  r.m_a.resize(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) r.m_a(i, j) = fm.m_a(idx[i], idx[j]);
  r.max_real_eigenvalue = max_real_eig(r.m_a);
  return r;
}

SupermodeCoefficients supermode_coefficients(const MatrixXc& u, int k, BandSelection band, int n) {
  const int half = static_cast<int>(u.rows() / 2);
  const int first = first_relative_mode(n);
  SupermodeCoefficients c;
  c.supermode = k;
  c.eta_abs.resize(half);
  c.phi.resize(half);
  for (int r = 0; r < half; ++r) {
    const cplx x = u(r, k), y = u(r + half, k);
    c.eta_abs(r) = std::sqrt(std::norm(x) + std::norm(y));
    c.phi(r) = std::atan2(y.real(), x.real());
    Band b = Band::subharmonic;
    if (band == BandSelection::pump || (band == BandSelection::all && r >= n)) b = Band::pump;
    c.band.push_back(b);
    c.mode.push_back(first + r % n);
  }
  return c;
}

double subharmonic_weight(const SupermodeCoefficients& c) {
  double sub = 0, all = 0;
  for (int r = 0; r < c.eta_abs.size(); ++r) {
    const double w = c.eta_abs(r) * c.eta_abs(r);
    all += w;
    if (c.band[r] == Band::subharmonic) sub += w;
  }
  return all > 0.0 ? sub / all : 0.0;
}

SqueezingSpectrum squeezing_spectrum(MultimodeBackground bg, const std::vector<double>& omega_grid,
                                     const ResonatorParams& p, const SqueezingOptions& opt) {
  if (omega_grid.empty()) throw ConfigError("squeezing_spectrum: empty frequency grid");
  FluctuationMatrix full = build_fluctuation_matrix(bg, p);
  require_stable(full);
  const FluctuationMatrix fm = restrict_band(full, opt.band);
  require_stable(fm);
  const int dim = static_cast<int>(fm.m_a.rows());
  const int ns = dim / 2;
  const MatrixXc t = ladder_to_quadrature(ns);
  const double two_gamma = 2.0 * p.gamma;

  MatrixFamily<cplx> family = [&](double w) {
    const InputOutput io = input_output(w, fm, p);
    MatrixXc s = t * io.m_in * t.adjoint();
    MatrixXc ds = t * (two_gamma * (-kI) * (io.resolvent * io.resolvent)) * t.adjoint();
    return std::make_pair(std::move(s), std::move(ds));
  };

  SqueezingSpectrum out;
  out.band = opt.band;
  out.omega = omega_grid;
  const auto factors = continue_decomposition<cplx>(family, omega_grid, &out.stats, opt.continuation);
  const int nw = static_cast<int>(omega_grid.size());
  out.v_minus.resize(nw, ns);
  out.v_plus.resize(nw, ns);
  for (int i = 0; i < nw; ++i) {
    const InputOutput io = input_output(omega_grid[i], fm, p);
    const MatrixXc s = t * io.m_in * t.adjoint();
    const MatrixXc sl = t * io.m_loss * t.adjoint();
    const MatrixXc cov = 0.5 * (s * s.adjoint() + sl * sl.adjoint());
    const MatrixXc& u = factors[i].u;
    for (int k = 0; k < ns; ++k) {
      out.v_plus(i, k) = std::real(u.col(k).dot(cov * u.col(k)));
      out.v_minus(i, k) = std::real(u.col(k + ns).dot(cov * u.col(k + ns)));
    }
    out.residual.push_back(factors[i].residual);
    for (int k = 0; k < std::min(opt.coefficient_supermodes, ns); ++k) {
      SupermodeCoefficients c = supermode_coefficients(u, k, fm.band, fm.n);
      c.omega = omega_grid[i];
      out.coefficients.push_back(std::move(c));
    }
  }
  out.v_minus_db = (out.v_minus / kVacuumVariance).array().log10() * 10.0;
  out.v_plus_db = (out.v_plus / kVacuumVariance).array().log10() * 10.0;
  return out;
}

}  // namespace qfc
