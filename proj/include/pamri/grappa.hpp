#pragma once

#include <vector>

#include "pamri/operators.hpp"

namespace pamri {

/// Interpolation weights for equispaced column undersampling. The kernel
/// footprint is a kernel_rows x kernel_cols k-space patch centered on the
/// missing sample; only patch columns that land on the sampled lattice
/// contribute sources. One weight set per missing-column offset d = 1..R-1:
/// weights[d-1] is row-major [target_coil][source_coil * taps + tap], taps
/// enumerated as (col_offset, row_offset) in ascending order.
struct GrappaKernel {
  int kernel_rows = 5;
  int kernel_cols = 5;
  int R = 2;
  int n_coils = 0;
  std::vector<std::vector<int>> col_offsets;  // per offset d: sampled dc list
  std::vector<std::vector<cdouble>> weights;  // per offset d

  int taps(int d) const {
    return static_cast<int>(col_offsets[d - 1].size()) * kernel_rows;
  }
};

/// Fits the kernel on a fully sampled ACS block (all rows x contiguous ACS
/// columns; acs_col0 is the global index of the block's first column, which
/// fixes the phase relative to the sampled lattice at columns = 0 mod R).
/// Least squares via damped normal equations; `tikhonov_rel` scales the
/// damping relative to the mean diagonal of S^H S (0 disables damping).
GrappaKernel grappa_calibrate(const MultiCoilKSpace& acs_block, int acs_col0,
                              int R, int kernel_rows = 5, int kernel_cols = 5,
                              double tikhonov_rel = 1e-6);

/// Extracts the contiguous ACS column block of `mask` from `y` and
/// calibrates on it.
GrappaKernel grappa_calibrate_from_mask(const MultiCoilKSpace& y,
                                        const SamplingMask& mask, int R,
                                        int kernel_rows = 5, int kernel_cols = 5,
                                        double tikhonov_rel = 1e-6);

/// Fills the missing columns of an equispaced acquisition with the kernel;
/// measured and ACS entries are kept verbatim. Rejects non-equispaced masks
/// (unless nothing is missing, which is a passthrough).
MultiCoilKSpace grappa_fill(const MultiCoilKSpace& y, const SamplingMask& mask,
                            const GrappaKernel& kernel);

/// grappa_fill followed by a root-sum-of-squares magnitude combine.
ComplexImage grappa_reconstruct(const MultiCoilKSpace& y,
                                const SamplingMask& mask,
                                const GrappaKernel& kernel);

/// Zero-filled adjoint baseline with the same coil combine.
ComplexImage zero_filled_rss(const MultiCoilKSpace& y);

}  // namespace pamri
