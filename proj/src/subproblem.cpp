#include <algorithm>
#include <cmath>

#include "cfisac/conic.hpp"
#include "cfisac/linalg.hpp"

namespace cfisac {

int SubproblemLayout::num_vars() const {
  const int rho = static_cast<int>(rho_aps.size()) * num_ues;
  return alpha_offset >= 0 ? rho + num_aps : rho;
}

AllocationState SubproblemLayout::unpack(const Vec& x) const {
  AllocationState s;
  s.rho = Vec::Zero(num_aps * num_ues);
  s.alpha = Vec::Zero(num_aps);
  for (std::size_t slot = 0; slot < rho_aps.size(); ++slot) {
    const int k = rho_aps[slot];
    for (int i = 0; i < num_ues; ++i) {
      s.rho(k * num_ues + i) = std::max(0.0, x(rho_index(static_cast<int>(slot), i)));
    }
  }
  if (alpha_offset >= 0) {
    s.alpha = x.segment(alpha_offset, num_aps).cwiseMax(0.0).cwiseMin(1.0);
  } else {
    for (int k : rho_aps) s.alpha(k) = 1.0;
  }
  return s;
}

Vec SubproblemLayout::pack(const AllocationState& s) const {
  Vec x = Vec::Zero(num_vars());
  for (std::size_t slot = 0; slot < rho_aps.size(); ++slot) {
    const int k = rho_aps[slot];
    for (int i = 0; i < num_ues; ++i) x(rho_index(static_cast<int>(slot), i)) = s.rho(k * num_ues + i);
  }
  if (alpha_offset >= 0) x.segment(alpha_offset, num_aps) = s.alpha;
  return x;
}

double activation_cost(const NetworkConfig& cfg, int num_ues) {
  return cfg.p0() + cfg.fronthaul_w_per_rate() * num_ues * cfg.r_min;
}

double model_power(const AllocationState& s, const CommStatistics& stats, const NetworkConfig& cfg) {
  const int K = s.num_aps();
  const int U = s.num_ues();
  double transmit = 0.0;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < U; ++i) {
      const double g = stats.G[k](i);
      transmit += g * g * s.rho(k * U + i) * s.rho(k * U + i);
    }
  }
  return cfg.pa_inefficiency * transmit + activation_cost(cfg, U) * s.alpha.sum();
}

double binary_gap(const Vec& alpha, double weight) {
  return weight * (alpha.array() - alpha.array().square()).sum();
}

AssembledSubproblem assemble_subproblem(const CommStatistics& stats, const SensingForms& forms,
                                        const AllocationState& prev, const NetworkConfig& cfg,
                                        const SubproblemOptions& opts) {
  const int K = stats.num_aps;
  const int U = stats.num_ues;
  if (prev.num_aps() != K || prev.rho.size() != K * U) throw Error("allocation dimension mismatch");

  AssembledSubproblem out;
  SubproblemLayout& lay = out.layout;
  lay.num_aps = K;
  lay.num_ues = U;
  if (opts.optimize_alpha) {
    for (int k = 0; k < K; ++k) lay.rho_aps.push_back(k);
    lay.alpha_offset = K * U;
  } else {
    lay.rho_aps = opts.active_aps;
    std::sort(lay.rho_aps.begin(), lay.rho_aps.end());
    lay.rho_aps.erase(std::unique(lay.rho_aps.begin(), lay.rho_aps.end()), lay.rho_aps.end());
    for (int k : lay.rho_aps) {
      if (k < 0 || k >= K) throw Error("active AP index out of range");
    }
  }
  const int A = static_cast<int>(lay.rho_aps.size());
  const int n = lay.num_vars();
  ConicProblem& p = out.problem;
  p = ConicProblem(n);

  const double sigma_n = std::sqrt(cfg.noise_power);
  const double mu = cfg.binary_penalty_weight;
  const double cost = activation_cost(cfg, U);

  // Objective.
  for (int s = 0; s < A; ++s) {
    const int k = lay.rho_aps[s];
    for (int i = 0; i < U; ++i) {
      const int j = lay.rho_index(s, i);
      if (opts.objective == SubproblemObjective::kSumSquares) {
        p.Q(j, j) = 1.0;
      } else {
        const double g = stats.G[k](i);
        p.Q(j, j) = cfg.pa_inefficiency * g * g;
      }
    }
  }
  if (opts.objective == SubproblemObjective::kPower) {
    if (opts.optimize_alpha) {
      for (int k = 0; k < K; ++k) {
        double coef = cost;
        if (opts.include_penalty) {
          const double ap = prev.alpha(k);
          coef += mu * (1.0 - 2.0 * ap);
          p.constant += mu * ap * ap;
        }
        p.q(lay.alpha_offset + k) = coef;
      }
    } else {
      p.constant = cost * A;
    }
  }

  // Rate SOCs, scaled by 1 / sigma_n.
  const double gamma_th = gamma_threshold(cfg);
  const double rate_scale = 1.0 / (sigma_n * std::sqrt(gamma_th));
  for (int i = 0; i < U; ++i) {
    SocConstraint soc;
    soc.F = Mat::Zero(U * K + 1, n);
    soc.g = Vec::Zero(U * K + 1);
    soc.c = Vec::Zero(n);
    for (int j = 0; j < U; ++j) {
      const Mat& root = stats.sqrtC[i][j];
      for (int s = 0; s < A; ++s) {
        const int k = lay.rho_aps[s];
        soc.F.block(j * K, lay.rho_index(s, j), K, 1) = root.col(k) / sigma_n;
      }
    }
    soc.g(U * K) = 1.0;
    LinearConstraint nonneg;
    for (int s = 0; s < A; ++s) {
      const int k = lay.rho_aps[s];
      soc.c(lay.rho_index(s, i)) = stats.b[i](k) * rate_scale;
      nonneg.terms.emplace_back(lay.rho_index(s, i), -stats.b[i](k) * rate_scale);
    }
    p.socs.push_back(std::move(soc));
    p.linear.push_back(std::move(nonneg));
  }

  // Sensing restriction around prev.rho, lifted to a rotated cone and
  // normalized by the linearization point's signal energy.
  if (opts.include_sensing) {
    for (int k = 0; k < K; ++k) {
      const double sa = std::max(1.0, forms.A[k].cwiseAbs().maxCoeff());
      const double sb = std::max(1.0, forms.B[k].cwiseAbs().maxCoeff());
      if (min_eigenvalue(forms.A[k]) < -1e-8 * sa || min_eigenvalue(forms.B[k]) < -1e-8 * sb) {
        throw Error("statistics not PSD-projected");
      }
    }
    const double sig = cfg.rcs_variance;
    const double gam = cfg.gamma_sen;
    Vec a_c = Vec::Zero(n);
    double s_c = 0.0;
    for (int s = 0; s < A; ++s) {
      const int k = lay.rho_aps[s];
      const Vec seg = prev.rho.segment(k * U, U);
      const Vec ak = sig * forms.A[k] * seg;
      a_c.segment(lay.rho_index(s, 0), U) = ak;
      s_c += seg.dot(ak);
    }
    if (!(s_c > 0.0)) throw Error("sensing linearization point has no target energy");
    std::vector<Mat> factors;
    int rows = 0;
    for (int s = 0; s < A; ++s) {
      factors.push_back(psd_factor(gam * forms.B[lay.rho_aps[s]]));
      rows += static_cast<int>(factors.back().rows());
    }
    SocConstraint soc;
    soc.F = Mat::Zero(rows + 1, n);
    soc.g = Vec::Zero(rows + 1);
    int r = 0;
    const double root = 2.0 / std::sqrt(s_c);
    for (int s = 0; s < A; ++s) {
      const Mat& f = factors[s];
      soc.F.block(r, lay.rho_index(s, 0), f.rows(), U) = root * f;
      r += static_cast<int>(f.rows());
    }
    const double noise_term = gam * forms.noise_floor / s_c;
    soc.c = 2.0 * a_c / s_c;
    soc.d = -noise_term;
    soc.F.row(rows) = soc.c.transpose();
    soc.g(rows) = -2.0 - noise_term;
    p.socs.push_back(std::move(soc));
  }

  // Per-AP power budgets.
  const double root_pmax = std::sqrt(cfg.p_max);
  for (int s = 0; s < A; ++s) {
    const int k = lay.rho_aps[s];
    SocConstraint soc;
    soc.F = Mat::Zero(U, n);
    soc.g = Vec::Zero(U);
    soc.c = Vec::Zero(n);
    for (int i = 0; i < U; ++i) soc.F(i, lay.rho_index(s, i)) = stats.G[k](i);
    if (opts.optimize_alpha) {
      soc.c(lay.alpha_offset + k) = root_pmax;
    } else {
      soc.d = root_pmax;
    }
    p.socs.push_back(std::move(soc));
  }

  // Activity range and the optional linearized binary restriction.
  if (opts.optimize_alpha) {
    for (int k = 0; k < K; ++k) {
      p.lower(lay.alpha_offset + k) = 0.0;
      p.upper(lay.alpha_offset + k) = 1.0;
      if (opts.enforce_binary_restriction) {
        const double ap = prev.alpha(k);
        LinearConstraint row;
        row.terms.emplace_back(lay.alpha_offset + k, 1.0 - 2.0 * ap);
        row.bound = -ap * ap;
        p.linear.push_back(std::move(row));
      }
    }
  }
  for (int s = 0; s < A; ++s) {
    for (int i = 0; i < U; ++i) p.lower(lay.rho_index(s, i)) = 0.0;
  }
  return out;
}

}  // namespace cfisac
