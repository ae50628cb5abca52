#include "pamri/priors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "pamri/io.hpp"

namespace pamri {

namespace {

constexpr double kPi = 3.14159265358979323846;

int reflect(int i, int n) {
  // symmetric padding: -1 -> 0, n -> n-1
  if (i < 0) i = -i - 1;
  if (i >= n) i = 2 * n - 1 - i;
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution on one real channel with reflect boundaries.
void blur_channel(std::vector<double>& chan, int h, int w,
                  const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(chan.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += kernel[t + radius] * chan[static_cast<std::size_t>(r) * w +
                                         reflect(c + t, w)];
      }
      tmp[static_cast<std::size_t>(r) * w + c] = acc;
    }
  }
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += kernel[t + radius] *
               tmp[static_cast<std::size_t>(reflect(r + t, h)) * w + c];
      }
      chan[static_cast<std::size_t>(r) * w + c] = acc;
    }
  }
}

void split_channels(const ComplexImage& x, std::vector<double>& re,
                    std::vector<double>& im) {
  re.resize(x.size());
  im.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    re[i] = x.data()[i].real();
    im[i] = x.data()[i].imag();
  }
}

ComplexImage join_channels(int h, int w, const std::vector<double>& re,
                           const std::vector<double>& im) {
  ComplexImage out(h, w);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = cdouble{re[i], im[i]};
  }
  return out;
}

// Chambolle's dual projection for the ROF model
//   min_u 1/2 ||u - f||^2 + lambda TV(u)
// run for a fixed iteration count on one real channel.
void tv_prox_channel(std::vector<double>& f, int h, int w, double lambda,
                     int iters) {
  if (lambda <= 0.0) return;
  const std::size_t n = f.size();
  std::vector<double> px(n, 0.0), py(n, 0.0), div(n, 0.0);
  const double tau = 0.25;

  auto idx = [w](int r, int c) { return static_cast<std::size_t>(r) * w + c; };

  for (int it = 0; it < iters; ++it) {
    // div p
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double d = 0.0;
        d += (c < w - 1 ? px[idx(r, c)] : 0.0) - (c > 0 ? px[idx(r, c - 1)] : 0.0);
        d += (r < h - 1 ? py[idx(r, c)] : 0.0) - (r > 0 ? py[idx(r - 1, c)] : 0.0);
        div[idx(r, c)] = d;
      }
    }
    // p <- (p + tau grad(div p - f/lambda)) / (1 + tau |grad .|)
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double u0 = div[idx(r, c)] - f[idx(r, c)] / lambda;
        const double gx =
            c < w - 1 ? (div[idx(r, c + 1)] - f[idx(r, c + 1)] / lambda) - u0 : 0.0;
        const double gy =
            r < h - 1 ? (div[idx(r + 1, c)] - f[idx(r + 1, c)] / lambda) - u0 : 0.0;
        const double mag = std::sqrt(gx * gx + gy * gy);
        const double denom = 1.0 + tau * mag;
        px[idx(r, c)] = (px[idx(r, c)] + tau * gx) / denom;
        py[idx(r, c)] = (py[idx(r, c)] + tau * gy) / denom;
      }
    }
  }

  // u = f - lambda div p
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double d = 0.0;
      d += (c < w - 1 ? px[idx(r, c)] : 0.0) - (c > 0 ? px[idx(r, c - 1)] : 0.0);
      d += (r < h - 1 ? py[idx(r, c)] : 0.0) - (r > 0 ? py[idx(r - 1, c)] : 0.0);
      f[idx(r, c)] -= lambda * d;
    }
  }
}

// Orthonormal 2D DCT-II / DCT-III via FFTW r2r transforms. Plans are cached.
class DctPlans {
 public:
  void forward(std::vector<double>& data, int h, int w) {
    run(data, h, w, FFTW_REDFT10);
    // orthonormal scaling: alpha_0 = sqrt(1/n), alpha_k = sqrt(2/n), and
    // FFTW's REDFT10 carries a factor 2 per dimension.
    scale(data, h, w, /*forward=*/true);
  }
  void inverse(std::vector<double>& data, int h, int w) {
    scale(data, h, w, /*forward=*/false);
    run(data, h, w, FFTW_REDFT01);
  }

 private:
  void run(std::vector<double>& data, int h, int w, int kind) {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      const auto key = std::make_tuple(h, w, kind);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<double> scratch(static_cast<std::size_t>(h) * w);
        plan = fftw_plan_r2r_2d(h, w, scratch.data(), scratch.data(),
                                static_cast<fftw_r2r_kind>(kind),
                                static_cast<fftw_r2r_kind>(kind),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    fftw_execute_r2r(plan, data.data(), data.data());
  }

  // Forward (post-REDFT10): C_k = Y_k * sqrt(1/(4n)) for k=0, sqrt(1/(2n))
  // otherwise, per dimension. Inverse (pre-REDFT01): u_0 = C_0 * sqrt(1/n),
  // u_k = C_k * sqrt(1/(2n)).
  void scale(std::vector<double>& data, int h, int w, bool forward) {
    const double r0 = forward ? std::sqrt(1.0 / (4.0 * h)) : std::sqrt(1.0 / h);
    const double rk = std::sqrt(1.0 / (2.0 * h));
    const double c0 = forward ? std::sqrt(1.0 / (4.0 * w)) : std::sqrt(1.0 / w);
    const double ck = std::sqrt(1.0 / (2.0 * w));
    for (int r = 0; r < h; ++r) {
      const double sr = r == 0 ? r0 : rk;
      for (int c = 0; c < w; ++c) {
        data[static_cast<std::size_t>(r) * w + c] *= sr * (c == 0 ? c0 : ck);
      }
    }
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

DctPlans& dct_plans() {
  static DctPlans plans;
  return plans;
}

void dct_soft_threshold_channel(std::vector<double>& chan, int h, int w,
                                double tau) {
  dct_plans().forward(chan, h, w);
  for (std::size_t i = 0; i < chan.size(); ++i) {
    if (i == 0) continue;  // spare the DC coefficient
    const double v = chan[i];
    chan[i] = v > tau ? v - tau : (v < -tau ? v + tau : 0.0);
  }
  dct_plans().inverse(chan, h, w);
}

}  // namespace

ComplexImage gaussian_blur(const ComplexImage& x, double sigma) {
  if (sigma <= 0.0) return x;
  const auto kernel = gaussian_kernel(sigma);
  std::vector<double> re, im;
  split_channels(x, re, im);
  blur_channel(re, x.height(), x.width(), kernel);
  blur_channel(im, x.height(), x.width(), kernel);
  return join_channels(x.height(), x.width(), re, im);
}

double total_variation(const ComplexImage& x) {
  double tv = 0.0;
  for (int r = 0; r < x.height(); ++r) {
    for (int c = 0; c < x.width(); ++c) {
      const cdouble gx = c < x.width() - 1 ? x.at(r, c + 1) - x.at(r, c)
                                           : cdouble{0.0, 0.0};
      const cdouble gy = r < x.height() - 1 ? x.at(r + 1, c) - x.at(r, c)
                                            : cdouble{0.0, 0.0};
      tv += std::sqrt(std::norm(gx) + std::norm(gy));
    }
  }
  return tv;
}

ComplexImage denoise(const DenoiserSpec& spec, const ComplexImage& x) {
  switch (spec.kind) {
    case DenoiserSpec::Kind::Identity:
      return x;
    case DenoiserSpec::Kind::GaussianBlur:
      return gaussian_blur(x, spec.sigma);
    case DenoiserSpec::Kind::TvProx: {
      if (spec.inner_iters < 1) throw ConfigError("tv_prox: inner_iters >= 1");
      std::vector<double> re, im;
      split_channels(x, re, im);
      tv_prox_channel(re, x.height(), x.width(), spec.weight, spec.inner_iters);
      tv_prox_channel(im, x.height(), x.width(), spec.weight, spec.inner_iters);
      return join_channels(x.height(), x.width(), re, im);
    }
    case DenoiserSpec::Kind::DctSoftThreshold: {
      if (spec.tau < 0.0) throw ConfigError("dct_soft_threshold: tau >= 0");
      if (spec.tau == 0.0) return x;
      std::vector<double> re, im;
      split_channels(x, re, im);
      dct_soft_threshold_channel(re, x.height(), x.width(), spec.tau);
      dct_soft_threshold_channel(im, x.height(), x.width(), spec.tau);
      return join_channels(x.height(), x.width(), re, im);
    }
  }
  throw ConfigError("denoise: unknown denoiser kind");
}

bool AttentionMap::all_zero() const {
  for (double v : weights) {
    if (v != 0.0) return false;
  }
  return true;
}

AttentionMap attention(const AttentionProviderSpec& spec,
                       const ComplexImage& x_global,
                       const std::vector<LesionBox>& boxes) {
  AttentionMap map;
  map.height = x_global.height();
  map.width = x_global.width();
  map.weights.assign(x_global.size(), 0.0);

  switch (spec.kind) {
    case AttentionProviderSpec::Kind::Zero:
      return map;

    case AttentionProviderSpec::Kind::Boxes: {
      if (spec.feather_px < 0.0) throw ConfigError("attention: feather_px >= 0");
      for (const LesionBox& b : boxes) {
        if (b.row_min < 0 || b.col_min < 0 || b.row_max >= map.height ||
            b.col_max >= map.width || b.row_min > b.row_max ||
            b.col_min > b.col_max) {
          throw ConfigError("attention: box outside image bounds");
        }
        for (int r = 0; r < map.height; ++r) {
          const double dr = r < b.row_min   ? b.row_min - r
                            : r > b.row_max ? r - b.row_max
                                            : 0.0;
          for (int c = 0; c < map.width; ++c) {
            const double dc = c < b.col_min   ? b.col_min - c
                              : c > b.col_max ? c - b.col_max
                                              : 0.0;
            const double d = std::sqrt(dr * dr + dc * dc);
            double v = 0.0;
            if (d == 0.0) {
              v = 1.0;
            } else if (spec.feather_px > 0.0 && d <= spec.feather_px) {
              v = 0.5 * (1.0 + std::cos(kPi * d / spec.feather_px));
            }
            auto& w = map.weights[static_cast<std::size_t>(r) * map.width + c];
            w = std::max(w, v);
          }
        }
      }
      return map;
    }

    case AttentionProviderSpec::Kind::GaussianBlobs: {
      if (spec.blob_sigma <= 0.0) throw ConfigError("attention: blob sigma > 0");
      for (const auto& [br, bc] : spec.blob_centers) {
        for (int r = 0; r < map.height; ++r) {
          for (int c = 0; c < map.width; ++c) {
            const double d2 = (r - br) * (r - br) + (c - bc) * (c - bc);
            const double v = std::exp(-d2 / (2.0 * spec.blob_sigma * spec.blob_sigma));
            auto& w = map.weights[static_cast<std::size_t>(r) * map.width + c];
            w = std::max(w, v);
          }
        }
      }
      return map;
    }

    case AttentionProviderSpec::Kind::FromFile: {
      const RealArray arr = load_real_array(spec.path);
      if (arr.height != map.height || arr.width != map.width) {
        throw ShapeError("attention: map file shape " +
                         std::to_string(arr.height) + "x" +
                         std::to_string(arr.width) + " != image shape " +
                         std::to_string(map.height) + "x" +
                         std::to_string(map.width));
      }
      for (std::size_t i = 0; i < map.weights.size(); ++i) {
        map.weights[i] = std::clamp(arr.values[i], 0.0, 1.0);
      }
      return map;
    }
  }
  throw ConfigError("attention: unknown provider kind");
}

ComplexImage enhance(const EnhancerSpec& spec, const AttentionMap& map,
                     const ComplexImage& x) {
  if (map.height != x.height() || map.width != x.width()) {
    throw ShapeError("enhance: attention map shape mismatch");
  }
  if (spec.alpha < 0.0 || spec.sigma <= 0.0) {
    throw ConfigError("enhance: alpha >= 0 and sigma > 0 required");
  }
  if (spec.alpha == 0.0 || map.all_zero()) return x;

  // U = x + map o alpha (x - blur(x)); the gate stays exactly closed where
  // map == 0.
  const ComplexImage low = gaussian_blur(x, spec.sigma);
  ComplexImage out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = map.weights[i] * spec.alpha;
    if (g != 0.0) {
      out.data()[i] += g * (x.data()[i] - low.data()[i]);
    }
  }
  return out;
}

}  // namespace pamri
