#include "pamri/recon.hpp"

#include <cmath>

namespace pamri {

namespace {

const simd::KernelTable& K() { return simd::active(); }

ComplexImage scaled_sum(const ComplexImage& a, double wa, const ComplexImage& b,
                        double wb) {
  ComplexImage out(a.height(), a.width());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = wa * a.data()[i] + wb * b.data()[i];
  }
  return out;
}

double norm_of_difference(const ComplexImage& a, const ComplexImage& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += std::norm(a.data()[i] - b.data()[i]);
  }
  return std::sqrt(s);
}

}  // namespace

void ReconConfig::validate() const {
  if (stages < 1) throw ConfigError("recon: stage count K must be >= 1");
  if (admm_iters < 1) throw ConfigError("recon: admm_iters must be >= 1");
  if (mu1 < 0.0 || mu2 < 0.0) throw ConfigError("recon: mu1, mu2 must be >= 0");
  if (rho < 0.0) throw ConfigError("recon: rho must be >= 0");
  if (mu2 > 0.0 && rho <= 0.0) {
    throw ConfigError("recon: rho must be > 0 when mu2 > 0");
  }
  if (lambda < 0.0) throw ConfigError("recon: lambda must be >= 0");
  for (double g : gamma) {
    if (g < 0.0) throw ConfigError("recon: gamma weights must be >= 0");
  }
}

ComplexImage dn_stage(const ComplexImage& x_prev, const EncodingOperator& op,
                      const MultiCoilKSpace& y, const ReconConfig& cfg,
                      StageDiagnostics* diag) {
  const double mu1 = cfg.mu1;
  const ComplexImage prior = denoise(cfg.denoiser, x_prev);

  ComplexImage rhs = op.adjoint(y);
  if (mu1 > 0.0) K().axpy(rhs.data(), mu1, prior.data(), rhs.size());

  auto normal = [&](const ComplexImage& v) {
    ComplexImage out = op.normal(v);
    if (mu1 > 0.0) K().axpy(out.data(), mu1, v.data(), out.size());
    return out;
  };

  CGResult cg = cg_solve(normal, rhs, cfg.cg);
  if (diag) {
    diag->dn_cg_iters = cg.iterations;
    diag->dn_cg_residual = cg.relative_residual;
  }
  return std::move(cg.x);
}

ComplexImage pa_stage(const ComplexImage& x_global, const AttentionMap& map,
                      const EncodingOperator& op, const MultiCoilKSpace& y,
                      const ReconConfig& cfg, StageDiagnostics* diag) {
  cfg.validate();
  const double mu1 = cfg.mu1, mu2 = cfg.mu2, rho = cfg.rho;

  const ComplexImage rhs_data = op.adjoint(y);

  ComplexImage x = x_global;
  ComplexImage z = x_global;
  ComplexImage dual(x.height(), x.width());  // starts at zero
  ComplexImage z_prev = z;

  auto normal = [&](const ComplexImage& v) {
    ComplexImage out = op.normal(v);
    const double shift = mu1 + rho;
    if (shift > 0.0) K().axpy(out.data(), shift, v.data(), out.size());
    return out;
  };

  int cg_iters = 0;
  for (int n = 0; n < cfg.admm_iters; ++n) {
    // X-update (data consistency with the denoiser lagged at x^n):
    // rhs = A^H y + mu1 D(x^n) + rho z^n - dual^n.
    ComplexImage rhs = rhs_data;
    if (mu1 > 0.0) {
      const ComplexImage prior = denoise(cfg.denoiser, x);
      K().axpy(rhs.data(), mu1, prior.data(), rhs.size());
    }
    if (rho > 0.0) {
      K().axpy(rhs.data(), rho, z.data(), rhs.size());
      K().axpy(rhs.data(), -1.0, dual.data(), rhs.size());
    }
    CGResult cg = cg_solve(normal, rhs, cfg.cg);
    cg_iters += cg.iterations;
    x = std::move(cg.x);

    // Z-update with the attention-gated enhancement.
    z_prev = z;
    if (rho + mu2 > 0.0) {
      const ComplexImage enhanced = enhance(cfg.enhancer, map, x);
      const double inv = 1.0 / (rho + mu2);
      z = scaled_sum(enhanced, mu2 * inv, x, rho * inv);
      if (rho > 0.0) K().axpy(z.data(), inv, dual.data(), z.size());
    } else {
      z = x;
    }

    // Scaled dual ascent.
    if (rho > 0.0) {
      for (std::size_t i = 0; i < dual.size(); ++i) {
        dual.data()[i] += rho * (x.data()[i] - z.data()[i]);
      }
    }
  }

  if (diag) {
    diag->pa_cg_iters = cg_iters;
    diag->primal_residual = norm_of_difference(x, z);
    diag->dual_residual = rho * norm_of_difference(z, z_prev);
  }
  return x;
}

ReconResult reconstruct(const MultiCoilKSpace& y, const EncodingOperator& op,
                        const ReconConfig& cfg,
                        const AttentionProviderSpec& provider,
                        const std::vector<LesionBox>& boxes) {
  cfg.validate();

  ReconResult result;
  ComplexImage x = op.adjoint(y);

  for (int k = 1; k <= cfg.stages; ++k) {
    StageDiagnostics diag;
    diag.stage = k;

    ComplexImage x_global = dn_stage(x, op, y, cfg, &diag);
    AttentionMap map = attention(provider, x_global, boxes);
    x = pa_stage(x_global, map, op, y, cfg, &diag);

    {
      const MultiCoilKSpace sim = op.forward(x_global);
      double s = 0.0;
      for (int c = 0; c < sim.n_coils(); ++c) {
        for (std::size_t i = 0; i < sim.planes[c].size(); ++i) {
          s += std::norm(sim.planes[c].data()[i] - y.planes[c].data()[i]);
        }
      }
      diag.data_residual = std::sqrt(s);
    }

    result.per_stage.push_back(diag);
    if (k == cfg.stages) {
      result.x_global_final = std::move(x_global);
      result.map_final = std::move(map);
    }
  }
  result.x_final = std::move(x);
  return result;
}

double recon_loss(const ComplexImage& x_final, const ComplexImage& x_global_final,
                  const ComplexImage& gt, const AttentionMap& map,
                  const std::array<double, 3>& gamma) {
  throw_if_shape_mismatch(x_final, gt, "recon_loss");
  throw_if_shape_mismatch(x_global_final, gt, "recon_loss");
  double global_term = 0.0, final_term = 0.0, focus_term = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d_final = std::norm(x_final.data()[i] - gt.data()[i]);
    global_term += std::norm(x_global_final.data()[i] - gt.data()[i]);
    final_term += d_final;
    focus_term += map.weights[i] * map.weights[i] * d_final;
  }
  return gamma[0] * global_term + gamma[1] * final_term + gamma[2] * focus_term;
}

double mask_loss(const ComplexImage& x_final, const ComplexImage& gt,
                 const AttentionMap& map, const SamplingMask& mask,
                 double lambda) {
  throw_if_shape_mismatch(x_final, gt, "mask_loss");

  double fidelity = 0.0;
  ComplexImage diff(gt.height(), gt.width());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    diff.data()[i] = x_final.data()[i] - gt.data()[i];
    fidelity += std::norm(diff.data()[i]);
  }
  if (lambda == 0.0) return fidelity;

  // High-frequency weights only: ACS contributes 0 here.
  std::vector<double> high_weights(mask.plane_size(), 0.0);
  for (std::size_t i = 0; i < mask.plane_size(); ++i) {
    if (mask.acs[i]) continue;
    high_weights[i] = mask.relaxed.has_value() ? (*mask.relaxed)[i]
                                               : (mask.high[i] ? 1.0 : 0.0);
  }

  KSpacePlane k = fft2c(diff);
  K().rmul(k.data(), high_weights.data(), k.data(), k.size());
  const ComplexImage filtered = ifft2c(k);

  double focus = 0.0;
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    focus += map.weights[i] * map.weights[i] * std::norm(filtered.data()[i]);
  }
  return fidelity + lambda * focus;
}

}  // namespace pamri
