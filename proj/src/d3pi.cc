#include "d3pi/d3pi.h"

#include <algorithm>
#include <chrono>
#include <string>

#include <Eigen/Eigenvalues>

#include "d3pi/errors.h"
#include "d3pi/linalg.h"
#include "d3pi/patterned.h"

namespace d3pi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

BlockSet RecoverBlocks(const HEstimate& h) {
  const int d = h.d;
  const int n = h.n;
  const int m = h.m;
  if (d < 2) throw DimensionError("recover blocks: need d >= 2");
  if (n < 1 || m < 1 || h.h.rows() != h.p() || h.h.cols() != h.p()) {
    throw DimensionError("recover blocks: inconsistent H estimate");
  }
  const MatrixXd h11 = h.h11();
  const MatrixXd h21 = h.h21();
  const MatrixXd h22 = h.h22();
  BlockSet b;
  b.x1 = h11.block(0, 0, n, n);
  b.x2 = h11.block(0, n, n, n);
  b.y1 = h22.block(0, 0, m, m);
  b.y2 = h22.block(0, m, m, m);
  b.z1 = h21.block(0, 0, m, n);
  b.z2 = h21.block(0, n, m, n);
  return b;
}

FgPair ComputeFg(const MatrixXd& y1, const MatrixXd& y2, int d) {
  if (d < 2) throw DimensionError("F/G: need d >= 2");
  if (y1.rows() != y1.cols() || y2.rows() != y1.rows() ||
      y2.cols() != y1.cols()) {
    throw DimensionError("F/G: Y1 and Y2 must be square and equal-sized");
  }
  const MatrixXd a = linalg::Symmetrize(y1);
  const MatrixXd b = linalg::Symmetrize(y2);
  const PatternedMatrix h22(d, a, b);
  if (!patterned::IsPositiveDefinite(h22)) {
    throw NumericalError("F/G: H22 is not positive definite");
  }
  FgPair out;
  const MatrixXd inner = linalg::CheckedInverse(a + (d - 2) * b, "Y1+(d-2)Y2");
  out.f = linalg::CheckedInverse(a - (d - 1) * b * inner * b, "F bracket");
  out.g = linalg::CheckedInverse(a + (d - 1) * b, "Y1+(d-1)Y2") * b *
          linalg::CheckedInverse(a - b, "Y1-Y2");
  return out;
}

GainPair UpdateGains(const FgPair& fg, const MatrixXd& z1, const MatrixXd& z2,
                     int d) {
  if (fg.f.cols() != z1.rows() || fg.g.cols() != z1.rows() ||
      z1.rows() != z2.rows() || z1.cols() != z2.cols()) {
    throw DimensionError("gain update: dimension mismatch");
  }
  GainPair out;
  out.k = -fg.f * z1 + (d - 1) * fg.g * z2;
  out.l = -fg.f * z2 + fg.g * z1 + (d - 2) * fg.g * z2;
  return out;
}

MatrixXd ComputeXi(const BlockSet& blocks, const MatrixXd& dk,
                   const MatrixXd& q_tilde, const MatrixXd& q2,
                   const MatrixXd& r, XiVariant variant) {
  const MatrixXd dz = blocks.dz();
  if (dk.rows() != dz.rows() || dk.cols() != dz.cols() ||
      q_tilde.rows() != dk.cols() || r.rows() != dk.rows()) {
    throw DimensionError("xi: dimension mismatch");
  }
  MatrixXd xi = blocks.dx() - q_tilde + dk.transpose() * dz +
                dz.transpose() * dk + dk.transpose() * (blocks.dy() - r) * dk;
  if (variant == XiVariant::kAlgorithm) xi += q2;
  return linalg::Symmetrize(xi);
}

Margin ComputeMargin(const MatrixXd& xi, const MatrixXd& dk, const MatrixXd& l,
                     const MatrixXd& dy, const MatrixXd& r,
                     const MatrixXd& q_tilde) {
  const MatrixXd num = linalg::Symmetrize(dk.transpose() * r * dk + q_tilde);
  const MatrixXd den =
      linalg::Symmetrize(xi + l.transpose() * (dy - r) * l);
  // Both matrices are symmetric, so singular values are |eigenvalues|.
  const VectorXd sn =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(num, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .cwiseAbs();
  const VectorXd sd =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(den, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .cwiseAbs();
  Margin out;
  const double smax = sd.maxCoeff();
  if (!(smax > 0.0) || !std::isfinite(smax)) {
    out.degenerate = true;
    out.gamma = std::numeric_limits<double>::infinity();
    out.tau = 0.0;
    return out;
  }
  out.gamma = sn.minCoeff() / smax;
  out.tau = TauFromGamma(out.gamma);
  return out;
}

namespace {

double Seconds(std::chrono::steady_clock::duration d) {
  return std::chrono::duration<double>(d).count();
}

// Learning policy for the uncoordinated comparison: agents outside the
// subgraph run the fixed self-feedback K1 with no neighbor terms.
MatrixXd DecoupleRest(MatrixXd gain, const MatrixXd& k1, const CommGraph& g,
                      const SubgraphSelection& sel) {
  const auto m = k1.rows();
  const auto n = k1.cols();
  for (int i = 0; i < g.node_count(); ++i) {
    if (sel.contains(i)) continue;
    gain.middleRows(i * m, m).setZero();
    gain.block(i * m, i * n, m, n) = k1;
  }
  return gain;
}

}  // namespace

MatrixXd LearningPolicy(const GainState& state, const CommGraph& g,
                        const SubgraphSelection& sel, const D3piConfig& cfg) {
  MatrixXd policy =
      BuildPolicyLearning(state.k_gain, state.l_gain, state.tau, g, sel);
  if (!cfg.coordinate_rest) policy = DecoupleRest(policy, cfg.k1, g, sel);
  return policy;
}

D3piResult RunD3pi(NetworkSimulator& sim, const CommGraph& g,
                   const D3piConfig& cfg) {
  const int n = sim.system().agent().n();
  const int m = sim.system().agent().m();
  if (g.node_count() != sim.system().agents()) {
    throw DimensionError("d3pi: graph and network sizes differ");
  }
  if (cfg.k1.rows() != m || cfg.k1.cols() != n) {
    throw DimensionError("d3pi: K1 must be m x n");
  }
  if (cfg.l1 && (cfg.l1->rows() != m || cfg.l1->cols() != n)) {
    throw DimensionError("d3pi: L1 must be m x n");
  }
  if (cfg.max_iter < 1) throw ConfigError("d3pi: max_iter must be >= 1");

  D3piResult res;
  res.selection = SelectSubgraph(g);
  const SubgraphSelection& sel = res.selection;
  const int d = sel.size();
  if (d < 2) throw DimensionError("d3pi: graph has no edges, d < 2");

  const SubgraphCost cost = MakeSubgraphCost(d, cfg.q1, cfg.q2, cfg.r);
  const MatrixXd qc = cost.q.dense();
  const MatrixXd rc = cost.r.dense();

  std::mt19937_64 rng(cfg.seed);
  const int p = d * (n + m);
  HEstimate h_prev(MatrixXd::Zero(p, p), d, n, m);

  MatrixXd k = cfg.k1;
  MatrixXd l = cfg.l1 ? *cfg.l1 : MatrixXd::Zero(m, n);
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double tau = 0.0;
  MatrixXd xi;
  bool degenerate = false;

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    GainState state;
    state.k = iter;
    state.k_gain = k;
    state.l_gain = l;
    state.gamma = gamma;
    state.tau = tau;
    state.xi = xi;
    state.margin_degenerate = degenerate;
    sim.set_policy(LearningPolicy(state, g, sel, cfg));

    auto t0 = std::chrono::steady_clock::now();
    SpeResult spe = RunSpe(sim, sel, qc, rc, h_prev, cfg.spe, rng);
    state.spe_attempts = 1;
    state.spe_steps = spe.steps;
    if (!spe.converged) {
      SpeConfig retry = cfg.spe;
      const std::int64_t budget =
          cfg.spe.max_steps > 0 ? cfg.spe.max_steps : 5LL * UnknownCount(p);
      retry.max_steps = 2 * budget;
      spe = RunSpe(sim, sel, qc, rc, h_prev, retry, rng);
      state.spe_attempts = 2;
      state.spe_steps += spe.steps;
    }
    state.spe_seconds = Seconds(std::chrono::steady_clock::now() - t0);
    state.p_condition = spe.p_condition;
    res.total_steps += state.spe_steps;
    res.spe_seconds += state.spe_seconds;
    res.history.push_back(state);
    if (!spe.converged) {
      throw NonConvergenceError("d3pi: SPE did not converge at iteration " +
                                std::to_string(iter));
    }

    const BlockSet blocks = RecoverBlocks(spe.estimate);
    const GainPair next =
        UpdateGains(ComputeFg(blocks.y1, blocks.y2, d), blocks.z1, blocks.z2, d);
    const MatrixXd dk_next = next.k - next.l;
    xi = ComputeXi(blocks, dk_next, cost.q_tilde, cfg.q2, cfg.r,
                   cfg.xi_variant);
    const Margin margin =
        ComputeMargin(xi, dk_next, next.l, blocks.dy(), cfg.r, cost.q_tilde);
    gamma = margin.gamma;
    tau = margin.tau;
    degenerate = margin.degenerate;

    const double change =
        std::max((next.k - k).norm(), (next.l - l).norm());
    k = next.k;
    l = next.l;
    h_prev = spe.estimate;

    if (change < cfg.tol) {
      GainState last;
      last.k = iter + 1;
      last.k_gain = k;
      last.l_gain = l;
      last.gamma = gamma;
      last.tau = tau;
      last.xi = xi;
      last.margin_degenerate = degenerate;
      res.history.push_back(last);
      res.converged = true;
      break;
    }
  }
  if (!res.converged) {
    throw NonConvergenceError("d3pi: gains did not converge in " +
                              std::to_string(cfg.max_iter) + " iterations");
  }
  res.k = k;
  res.l = l;
  res.gamma = gamma;
  res.tau = tau;
  res.final_policy = BuildPolicyFinal(k, l, tau, g);
  sim.set_policy(res.final_policy);
  return res;
}

}  // namespace d3pi
