#pragma once

#include <array>
#include <vector>

#include "pamri/operators.hpp"
#include "pamri/priors.hpp"

namespace pamri {

/// All scalar hyperparameters of the unrolled reconstructor.
struct ReconConfig {
  int stages = 3;       // K
  int admm_iters = 3;   // inner iterations per refinement stage
  double mu1 = 0.05;    // denoiser coupling
  double mu2 = 0.05;    // attention-gated enhancement coupling
  double rho = 0.1;     // ADMM penalty
  std::array<double, 3> gamma = {1.0, 1.0, 10.0};  // reconstruction loss weights
  double lambda = 1.0;  // mask loss weight
  CGParams cg;
  DenoiserSpec denoiser;
  EnhancerSpec enhancer;

  void validate() const;
};

/// Per-stage solver diagnostics: data-consistency CG statistics plus ADMM
/// primal/dual residual norms of the refinement block.
struct StageDiagnostics {
  int stage = 0;
  int dn_cg_iters = 0;
  double dn_cg_residual = 0.0;
  int pa_cg_iters = 0;  // summed over inner iterations
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double data_residual = 0.0;  // ||forward(x_global) - y|| after the stage
};

struct ReconResult {
  ComplexImage x_final;
  ComplexImage x_global_final;
  AttentionMap map_final;
  std::vector<StageDiagnostics> per_stage;
};

/// Denoise + data consistency: solves
/// (A^H A + mu1 I) x = A^H y + mu1 * denoise(x_prev) by CG.
ComplexImage dn_stage(const ComplexImage& x_prev, const EncodingOperator& op,
                      const MultiCoilKSpace& y, const ReconConfig& cfg,
                      StageDiagnostics* diag = nullptr);

/// Anomaly-aware refinement: ADMM with the denoiser lagged at the previous
/// inner iterate in the X-update, attention-gated enhancement in the
/// Z-update, and a scaled dual ascent step.
ComplexImage pa_stage(const ComplexImage& x_global, const AttentionMap& map,
                      const EncodingOperator& op, const MultiCoilKSpace& y,
                      const ReconConfig& cfg, StageDiagnostics* diag = nullptr);

/// Full unrolled pipeline: x0 = A^H y, then `stages` rounds of
/// dn_stage -> attention -> pa_stage.
ReconResult reconstruct(const MultiCoilKSpace& y, const EncodingOperator& op,
                        const ReconConfig& cfg,
                        const AttentionProviderSpec& provider,
                        const std::vector<LesionBox>& boxes);

/// gamma1 ||x_global - gt||^2 + gamma2 ||x - gt||^2
/// + gamma3 ||map o (x - gt)||^2.
double recon_loss(const ComplexImage& x_final, const ComplexImage& x_global_final,
                  const ComplexImage& gt, const AttentionMap& map,
                  const std::array<double, 3>& gamma);

/// ||x - gt||^2 + lambda ||map o F^H(M2 o F(x - gt))||^2, where M2 is the
/// high-frequency part of the mask (relaxed weights if present).
double mask_loss(const ComplexImage& x_final, const ComplexImage& gt,
                 const AttentionMap& map, const SamplingMask& mask,
                 double lambda);

}  // namespace pamri
