#include "d3pi/spe.h"

#include <cmath>
#include <deque>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "d3pi/csv.h"
#include "d3pi/errors.h"
#include "d3pi/linalg.h"

namespace d3pi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd QuadFeatures(const VectorXd& z) {
  const int p = static_cast<int>(z.size());
  VectorXd out(UnknownCount(p));
  int k = 0;
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) out(k++) = z(i) * z(j);
  }
  return out;
}

VectorXd HalfVectorize(const MatrixXd& h) {
  if (h.rows() != h.cols()) throw DimensionError("vech: matrix not square");
  const int p = static_cast<int>(h.rows());
  VectorXd out(UnknownCount(p));
  int k = 0;
  for (int i = 0; i < p; ++i) {
    out(k++) = h(i, i);
    for (int j = i + 1; j < p; ++j) out(k++) = h(i, j) + h(j, i);
  }
  return out;
}

MatrixXd InverseHalfVectorize(const VectorXd& theta, int p) {
  if (theta.size() != UnknownCount(p)) {
    throw DimensionError("vech^-1: coefficient count does not match p");
  }
  MatrixXd h(p, p);
  int k = 0;
  for (int i = 0; i < p; ++i) {
    h(i, i) = theta(k++);
    for (int j = i + 1; j < p; ++j) {
      h(i, j) = h(j, i) = 0.5 * theta(k++);
    }
  }
  return h;
}

VectorXd Regressor(const VectorXd& z_t, const VectorXd& z_next) {
  if (z_t.size() != z_next.size()) {
    throw DimensionError("regressor: z_t and z_next differ in length");
  }
  return QuadFeatures(z_t) - QuadFeatures(z_next);
}

VectorXd LiteralRegressor(const VectorXd& z_t, const VectorXd& z_next) {
  if (z_t.size() != z_next.size()) {
    throw DimensionError("regressor: z_t and z_next differ in length");
  }
  return QuadFeatures(z_t - z_next);
}

double LocalCost(const VectorXd& x, const VectorXd& u, const MatrixXd& qc,
                 const MatrixXd& rc) {
  if (qc.rows() != x.size() || qc.cols() != x.size() ||
      rc.rows() != u.size() || rc.cols() != u.size()) {
    throw DimensionError("local cost: dimension mismatch");
  }
  return x.dot(qc * x) + u.dot(rc * u);
}

RlsState RlsState::Init(VectorXd theta0, double beta) {
  if (!(beta > 0.0)) throw NumericalError("RLS: beta must be positive");
  RlsState s;
  const auto q = theta0.size();
  s.theta = std::move(theta0);
  s.p = beta * MatrixXd::Identity(q, q);
  return s;
}

void RlsUpdate(RlsState& s, const VectorXd& zeta, double target) {
  if (zeta.size() != s.theta.size()) {
    throw DimensionError("RLS: regressor length does not match theta");
  }
  const VectorXd pz = s.p * zeta;
  const double denom = 1.0 + zeta.dot(pz);
  const double innovation = target - zeta.dot(s.theta);
  if (!std::isfinite(denom) || !std::isfinite(innovation) || denom <= 0.0) {
    throw NumericalError("RLS: non-finite update");
  }
  s.theta.noalias() += pz * (innovation / denom);
  s.p.noalias() -= (pz / denom) * pz.transpose();
  // Rounding in the rank-one downdate is not symmetric.
  s.p = 0.5 * (s.p + s.p.transpose()).eval();
  ++s.steps;
}

RlsState RlsStep(RlsState s, const VectorXd& zeta, double target) {
  RlsUpdate(s, zeta, target);
  return s;
}

HEstimate::HEstimate(MatrixXd h_in, int d_in, int n_in, int m_in)
    : h(std::move(h_in)), d(d_in), n(n_in), m(m_in) {
  if (h.rows() != p() || h.cols() != p()) {
    throw DimensionError("H estimate: expected a d(n+m) square matrix");
  }
}

MatrixXd ProjectBlockPattern(const MatrixXd& m, int d, int rb, int cb) {
  if (m.rows() != d * rb || m.cols() != d * cb) {
    throw DimensionError("block projection: shape mismatch");
  }
  MatrixXd diag = MatrixXd::Zero(rb, cb);
  MatrixXd off = MatrixXd::Zero(rb, cb);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      (i == j ? diag : off) += m.block(i * rb, j * cb, rb, cb);
    }
  }
  diag /= d;
  if (d > 1) off /= static_cast<double>(d) * (d - 1);
  MatrixXd out(m.rows(), m.cols());
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      out.block(i * rb, j * cb, rb, cb) = (i == j) ? diag : off;
    }
  }
  return out;
}

HEstimate ProjectStructure(const HEstimate& est) {
  const int d = est.d;
  const int n = est.n;
  const int m = est.m;
  MatrixXd h(est.p(), est.p());
  const MatrixXd h21 = ProjectBlockPattern(est.h21(), d, m, n);
  h.topLeftCorner(d * n, d * n) =
      linalg::Symmetrize(ProjectBlockPattern(est.h11(), d, n, n));
  h.bottomLeftCorner(d * m, d * n) = h21;
  h.topRightCorner(d * n, d * m) = h21.transpose();
  h.bottomRightCorner(d * m, d * m) =
      linalg::Symmetrize(ProjectBlockPattern(est.h22(), d, m, m));
  return HEstimate(std::move(h), d, n, m);
}

namespace {

/// Factor S with S S^T = Sigma for a PSD covariance.
MatrixXd CovarianceFactor(const MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(linalg::Symmetrize(sigma));
  const VectorXd ev = es.eigenvalues();
  if (ev.size() && ev(0) < -1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff())) {
    throw NumericalError("SPE: exploration covariance is not PSD");
  }
  return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

SpeResult RunSpe(NetworkSimulator& sim, const SubgraphSelection& sel,
                 const MatrixXd& qc, const MatrixXd& rc,
                 const HEstimate& h_prev, const SpeConfig& cfg,
                 std::mt19937_64& rng) {
  const int d = sel.size();
  const int n = sim.system().agent().n();
  const int m = sim.system().agent().m();
  const int p = d * (n + m);
  const int q = UnknownCount(p);
  if (h_prev.p() != p || h_prev.d != d || h_prev.n != n || h_prev.m != m) {
    throw DimensionError("SPE: previous estimate has the wrong shape");
  }
  if (qc.rows() != d * n || rc.rows() != d * m) {
    throw DimensionError("SPE: stage-cost matrices have the wrong shape");
  }
  if (cfg.window < 1) throw ConfigError("SPE: window must be >= 1");

  const MatrixXd sigma = cfg.covariance.size()
                             ? cfg.covariance
                             : MatrixXd(cfg.noise_variance *
                                        MatrixXd::Identity(d * m, d * m));
  if (sigma.rows() != d * m || sigma.cols() != d * m) {
    throw DimensionError("SPE: exploration covariance must be dm x dm");
  }
  const MatrixXd noise_factor = CovarianceFactor(sigma);
  const std::int64_t max_steps = cfg.max_steps > 0 ? cfg.max_steps : 5LL * q;
  const std::int64_t min_steps = cfg.min_steps > 0 ? cfg.min_steps : q;

  RlsState rls = RlsState::Init(HalfVectorize(h_prev.h), cfg.beta);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::deque<VectorXd> history;

  SpeResult result;
  VectorXd x = sim.ObserveSubgraph(sel);
  VectorXd u = sim.SubgraphPolicyInput(sel);
  VectorXd e(d * m);
  VectorXd z(p);
  VectorXd z_next(p);

  for (std::int64_t t = 0; t < max_steps; ++t) {
    for (int i = 0; i < e.size(); ++i) e(i) = normal(rng);
    e = noise_factor * e;
    const VectorXd u_applied = u + e;
    sim.Advance(sel, e);
    const VectorXd x_next = sim.ObserveSubgraph(sel);
    const VectorXd u_next = sim.SubgraphPolicyInput(sel);

    z << x, u_applied;
    z_next << x_next, u_next;
    const VectorXd zeta = cfg.literal_regressor ? LiteralRegressor(z, z_next)
                                                : Regressor(z, z_next);
    const double target = LocalCost(x, u_applied, qc, rc);
    if (cfg.record_trace) {
      result.trace.push_back(
          {t, target - zeta.dot(rls.theta), rls.theta.norm()});
    }
    RlsUpdate(rls, zeta, target);
    result.steps = t + 1;

    history.push_back(rls.theta);
    if (static_cast<int>(history.size()) > cfg.window + 1) history.pop_front();

    x = x_next;
    u = u_next;

    if (result.steps < min_steps ||
        static_cast<int>(history.size()) <= cfg.window) {
      continue;
    }
    const double scale = std::max(1.0, rls.theta.cwiseAbs().maxCoeff());
    const double change =
        (history.back() - history.front()).cwiseAbs().maxCoeff();
    if (change >= cfg.tol * scale) continue;
    // Only accept once the covariance has contracted in every direction; an
    // unexcited regression leaves theta untouched and P at beta * I.
    if (t % cfg.window != 0) continue;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(rls.p, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() < 0.5 * cfg.beta) {
      result.converged = true;
      break;
    }
  }

  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(rls.p, Eigen::EigenvaluesOnly);
    const VectorXd ev = es.eigenvalues();
    result.p_condition = ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0)
                                     : std::numeric_limits<double>::infinity();
  }
  HEstimate est(InverseHalfVectorize(rls.theta, p), d, n, m);
  result.estimate = cfg.project_structure ? ProjectStructure(est) : est;
  return result;
}

void WriteSpeTrace(const std::vector<SpeTraceRow>& trace, std::ostream& out) {
  out << "t,residual,theta_norm\n";
  for (const auto& row : trace) {
    out << row.t << ',' << csv::Format(row.residual) << ','
        << csv::Format(row.theta_norm) << '\n';
  }
}

}  // namespace d3pi
