#include "pamri/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "pamri/rng.hpp"

namespace pamri {

namespace {

// Little-endian bit packing, LSB first within each byte.
std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return bytes;
}

std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes,
                                      std::size_t n) {
  std::vector<std::uint8_t> bits(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    bits[i] = (bytes[i / 8] >> (i % 8)) & 1u;
  }
  return bits;
}

const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
    if (i + 1 < data.size()) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
    if (i + 2 < data.size()) v |= data[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 0x3f]);
    out.push_back(kB64Alphabet[(v >> 12) & 0x3f]);
    out.push_back(i + 1 < data.size() ? kB64Alphabet[(v >> 6) & 0x3f] : '=');
    out.push_back(i + 2 < data.size() ? kB64Alphabet[v & 0x3f] : '=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  std::uint32_t buf = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = value(c);
    if (v < 0) throw IoError("mask bitmap: invalid base64 character");
    buf = (buf << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((buf >> bits) & 0xff));
    }
  }
  return out;
}

void fill_column(std::vector<std::uint8_t>& plane, int h, int w, int col,
                 std::uint8_t value) {
  for (int r = 0; r < h; ++r) plane[static_cast<std::size_t>(r) * w + col] = value;
}

}  // namespace

std::string to_string(MaskMode mode) {
  return mode == MaskMode::Lines1D ? "lines1d" : "points2d";
}

MaskMode mask_mode_from_string(const std::string& s) {
  if (s == "lines1d") return MaskMode::Lines1D;
  if (s == "points2d") return MaskMode::Points2D;
  throw ConfigError("unknown mask mode '" + s + "' (lines1d|points2d)");
}

// In Lines1D mode unit u indexes (row 0, column u), which represents the
// whole column by per-column constancy; in Points2D it is the flat index.
bool SamplingMask::unit_in_acs(int u) const {
  return acs[static_cast<std::size_t>(u)] != 0;
}

bool SamplingMask::unit_in_high(int u) const {
  return high[static_cast<std::size_t>(u)] != 0;
}

void SamplingMask::set_high_unit(int u, bool value) {
  const std::uint8_t v = value ? 1 : 0;
  if (mode == MaskMode::Lines1D) {
    fill_column(high, height, width, u, v);
  } else {
    high[static_cast<std::size_t>(u)] = v;
  }
}

int SamplingMask::acs_unit_count() const {
  int n = 0;
  for (int u = 0; u < units(); ++u) n += unit_in_acs(u) ? 1 : 0;
  return n;
}

int SamplingMask::high_unit_count() const {
  int n = 0;
  for (int u = 0; u < units(); ++u) n += unit_in_high(u) ? 1 : 0;
  return n;
}

std::vector<int> SamplingMask::candidate_units() const {
  std::vector<int> out;
  for (int u = 0; u < units(); ++u) {
    if (!unit_in_acs(u)) out.push_back(u);
  }
  return out;
}

std::vector<double> SamplingMask::effective_weights() const {
  std::vector<double> w(plane_size(), 0.0);
  for (std::size_t i = 0; i < plane_size(); ++i) {
    if (acs[i]) {
      w[i] = 1.0;
    } else if (relaxed.has_value()) {
      w[i] = (*relaxed)[i];
    } else {
      w[i] = high[i] ? 1.0 : 0.0;
    }
  }
  return w;
}

void SamplingMask::validate() const {
  if (height < 2 || width < 2) throw ShapeError("SamplingMask: shape must be >= 2x2");
  if (acs.size() != plane_size() || high.size() != plane_size()) {
    throw ShapeError("SamplingMask: plane size mismatch");
  }
  for (std::size_t i = 0; i < plane_size(); ++i) {
    if (acs[i] && high[i]) {
      throw ConfigError("SamplingMask: acs and high overlap at element " +
                        std::to_string(i));
    }
  }
  if (relaxed.has_value()) {
    if (relaxed->size() != plane_size()) {
      throw ShapeError("SamplingMask: relaxed plane size mismatch");
    }
    for (std::size_t i = 0; i < plane_size(); ++i) {
      const double p = (*relaxed)[i];
      if (p < 0.0 || p > 1.0) {
        throw ConfigError("SamplingMask: relaxed value outside [0,1]");
      }
      if (acs[i] && p != 0.0) {
        throw ConfigError("SamplingMask: relaxed must be 0 on ACS elements");
      }
    }
  }
  if (mode == MaskMode::Lines1D) {
    for (int c = 0; c < width; ++c) {
      for (int r = 1; r < height; ++r) {
        const std::size_t i = static_cast<std::size_t>(r) * width + c;
        if (acs[i] != acs[static_cast<std::size_t>(c)] ||
            high[i] != high[static_cast<std::size_t>(c)]) {
          throw ConfigError("SamplingMask: column " + std::to_string(c) +
                            " is not constant in lines1d mode");
        }
      }
    }
  }
}

namespace {

double acs_fraction_for(double R) {
  // 0.08 at R=4 and 0.04 at R=8, linear in 1/R in between, clamped.
  const double f = 0.32 / R;
  return std::clamp(f, 0.02, 0.08);
}

}  // namespace

MaskBudget make_budget(MaskMode mode, int height, int width, double R,
                       std::optional<double> acs_fraction) {
  if (R < 1.0) throw ConfigError("acceleration R must be >= 1");
  const int units = mode == MaskMode::Lines1D ? width : height * width;
  MaskBudget b;
  b.acceleration = R;
  b.total_selected = static_cast<int>(std::lround(units / R));
  if (mode == MaskMode::Lines1D) {
    const double f = acs_fraction.value_or(acs_fraction_for(R));
    b.acs_count = static_cast<int>(std::lround(f * width));
  } else {
    const double f = acs_fraction.value_or(0.1);
    b.acs_count = static_cast<int>(std::lround(f * height)) *
                  static_cast<int>(std::lround(f * width));
  }
  return b;
}

SamplingMask make_acs_mask(MaskMode mode, int height, int width, double R,
                           std::optional<double> acs_fraction) {
  if (height < 2 || width < 2) throw ShapeError("mask shape must be >= 2x2");
  SamplingMask m;
  m.mode = mode;
  m.height = height;
  m.width = width;
  m.acs.assign(m.plane_size(), 0);
  m.high.assign(m.plane_size(), 0);

  const MaskBudget budget = make_budget(mode, height, width, R, acs_fraction);

  if (mode == MaskMode::Lines1D) {
    const int k = budget.acs_count;
    const int start = width / 2 - k / 2;
    for (int c = start; c < start + k; ++c) fill_column(m.acs, height, width, c, 1);
  } else {
    const double f = acs_fraction.value_or(0.1);
    const int kh = static_cast<int>(std::lround(f * height));
    const int kw = static_cast<int>(std::lround(f * width));
    const int r0 = height / 2 - kh / 2;
    const int c0 = width / 2 - kw / 2;
    for (int r = r0; r < r0 + kh; ++r) {
      for (int c = c0; c < c0 + kw; ++c) {
        m.acs[static_cast<std::size_t>(r) * width + c] = 1;
      }
    }
  }

  const int acs_units = m.acs_unit_count();
  if (acs_units > budget.total_selected) {
    throw ConfigError("ACS size " + std::to_string(acs_units) +
                      " exceeds the sampling budget " +
                      std::to_string(budget.total_selected));
  }
  return m;
}

SamplingMask make_random_mask(const SamplingMask& acs, const MaskBudget& budget,
                              std::uint64_t seed) {
  SamplingMask m = acs;
  m.relaxed.reset();
  const int n_units = m.units();
  if (budget.total_selected > n_units) {
    throw ConfigError("budget " + std::to_string(budget.total_selected) +
                      " exceeds the " + std::to_string(n_units) +
                      " available units");
  }
  const int acs_units = m.acs_unit_count();
  if (budget.total_selected < acs_units) {
    throw ConfigError("budget below ACS size");
  }

  std::vector<int> candidates = m.candidate_units();
  // Partial Fisher-Yates: draw (budget - acs) units without replacement.
  Rng rng(seed);
  const int draws = budget.total_selected - acs_units;
  for (int i = 0; i < draws; ++i) {
    const std::size_t j =
        i + rng.below(static_cast<std::uint64_t>(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
    m.set_high_unit(candidates[i], true);
  }
  return m;
}

SamplingMask make_equispaced_mask(const SamplingMask& acs, int R) {
  if (acs.mode != MaskMode::Lines1D) {
    throw ConfigError("equispaced masks are only supported in lines1d mode");
  }
  if (R < 1) throw ConfigError("equispaced R must be >= 1");
  SamplingMask m = acs;
  m.relaxed.reset();
  for (int c = 0; c < m.width; c += R) {
    if (!m.unit_in_acs(c)) m.set_high_unit(c, true);
  }
  return m;
}

std::vector<double> renormalize_probs(const std::vector<double>& probs,
                                      double target_rate) {
  if (probs.empty()) return {};
  if (target_rate <= 0.0 || target_rate >= 1.0) {
    throw ConfigError("target rate must lie in (0,1)");
  }
  double sum = 0.0;
  bool any_positive = false;
  for (double p : probs) {
    if (p < 0.0 || p > 1.0) throw ConfigError("probability outside [0,1]");
    sum += p;
    any_positive = any_positive || p > 0.0;
  }
  if (!any_positive) {
    throw ConfigError("cannot renormalize an all-zero probability vector to a "
                      "positive rate");
  }
  const double mean = sum / probs.size();
  std::vector<double> out(probs.size());
  if (mean > target_rate) {
    const double s = target_rate / mean;
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] * s;
  } else if (mean < target_rate) {
    const double s = (1.0 - target_rate) / (1.0 - mean);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      out[i] = 1.0 - (1.0 - probs[i]) * s;
    }
  } else {
    out = probs;
  }
  return out;
}

SamplingMask binarize_topk(const SamplingMask& acs,
                           const std::vector<double>& candidate_probs, int k) {
  const std::vector<int> candidates = acs.candidate_units();
  if (candidate_probs.size() != candidates.size()) {
    throw ShapeError("binarize_topk: expected " +
                     std::to_string(candidates.size()) + " candidate values, got " +
                     std::to_string(candidate_probs.size()));
  }
  if (k < 0 || k > static_cast<int>(candidates.size())) {
    throw ConfigError("binarize_topk: k out of range");
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (candidate_probs[a] != candidate_probs[b]) {
      return candidate_probs[a] > candidate_probs[b];
    }
    return a < b;  // ties: ascending candidate index
  });

  SamplingMask m = acs;
  m.relaxed.reset();
  for (int i = 0; i < k; ++i) m.set_high_unit(candidates[order[i]], true);
  return m;
}

std::string mask_to_json(const SamplingMask& mask) {
  nlohmann::json j;
  j["mode"] = to_string(mask.mode);
  j["h"] = mask.height;
  j["w"] = mask.width;
  j["acs"] = base64_encode(pack_bits(mask.acs));
  j["high"] = base64_encode(pack_bits(mask.high));
  return j.dump();
}

SamplingMask mask_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("mask bitmap: invalid JSON: ") + e.what());
  }
  SamplingMask m;
  try {
    m.mode = mask_mode_from_string(j.at("mode").get<std::string>());
    m.height = j.at("h").get<int>();
    m.width = j.at("w").get<int>();
    const auto acs_bytes = base64_decode(j.at("acs").get<std::string>());
    const auto high_bytes = base64_decode(j.at("high").get<std::string>());
    if (acs_bytes.size() < (m.plane_size() + 7) / 8 ||
        high_bytes.size() < (m.plane_size() + 7) / 8) {
      throw IoError("mask bitmap: truncated bit plane");
    }
    m.acs = unpack_bits(acs_bytes, m.plane_size());
    m.high = unpack_bits(high_bytes, m.plane_size());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("mask bitmap: missing field: ") + e.what());
  }
  m.validate();
  return m;
}

}  // namespace pamri
