#pragma once

// Independent oracles and generators shared by the unit and acceptance suites.
// Nothing here calls into the kernels it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lfp/core/rng.hpp"
#include "lfp/data/frame.hpp"
#include "lfp/tensor/autograd.hpp"

namespace lfp::testing {

template <typename T>
Tensor<T> random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(shape);
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

// Direct triple sum: y(n,o,y,x) = b(o) + sum_c sum_p sum_q I(c, y*s+p-pad, x*s+q-pad) w(o,c,p,q).
template <typename T>
Tensor<T> conv2d_loop_oracle(const Tensor<T>& input, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad) {
  const Shape in = input.shape();
  const int k = w.shape().h;
  const int oh = (in.h + 2 * pad - k) / stride + 1;
  const int ow = (in.w + 2 * pad - k) / stride + 1;
  Tensor<T> out({in.n, w.shape().n, oh, ow});
  for (int n = 0; n < in.n; ++n)
    for (int o = 0; o < w.shape().n; ++o)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          long double acc = b[static_cast<std::size_t>(o)];
          for (int c = 0; c < in.c; ++c)
            for (int p = 0; p < k; ++p)
              for (int q = 0; q < k; ++q) {
                const int iy = y * stride + p - pad;
                const int ix = x * stride + q - pad;
                if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
                acc += static_cast<long double>(input.at(n, c, iy, ix)) * w.at(o, c, p, q);
              }
          out.at(n, o, y, x) = static_cast<T>(acc);
        }
  return out;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps components
// whose true gradient is (near) zero from dividing by rounding noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

// Compares backward() against central differences for every element of every
// leaf. `loss_fn` builds the scalar loss from trainable leaves over `leaves`.
inline GradCheckResult gradient_check(std::vector<Tensor<double>>& leaves,
                                      const std::function<Var<double>(const std::vector<Var<double>>&)>& loss_fn,
                                      double h = 1e-5) {
  std::vector<Var<double>> vars;
  for (auto& t : leaves) vars.push_back(Var<double>::parameter_view(t));
  const Var<double> loss = loss_fn(vars);
  backward(loss);
  std::vector<Tensor<double>> analytic;
  for (auto& v : vars) analytic.push_back(v.grad_or_zeros());

  auto evaluate = [&] {
    std::vector<Var<double>> cvars;
    for (auto& t : leaves) cvars.push_back(Var<double>::constant_view(t));
    return loss_fn(cvars).value()[0];
  };

  GradCheckResult result;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    for (std::size_t i = 0; i < leaves[l].size(); ++i) {
      const double saved = leaves[l][i];
      leaves[l][i] = saved + h;
      const double plus = evaluate();
      leaves[l][i] = saved - h;
      const double minus = evaluate();
      leaves[l][i] = saved;
      const double numeric = (plus - minus) / (2 * h);
      result.max_relative_error = std::max(result.max_relative_error, relative_error(analytic[l][i], numeric));
      ++result.checked;
    }
  }
  return result;
}

// Smooth random texture: sum of a few random sinusoids plus fine detail,
// periodic with period `period` so translations wrap cleanly.
inline Frame textured_frame(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 6; ++i) {
    waves.push_back({rng.uniform(0.02, 0.25), rng.uniform(0.02, 0.25), rng.uniform(0.0, 6.283), rng.uniform(10, 30)});
  }
  Frame f(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double v = 128.0;
      for (const auto& w : waves) v += w.amp * std::sin(w.fx * x * 6.283 / 2 + w.fy * y * 3.1 + w.phase);
      v += rng.uniform(-12.0, 12.0);
      f.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
    }
  return f;
}

// target(x, y) = src(x - dx, y - dy) with edge clamping: content moves by (dx, dy).
inline Frame shifted(const Frame& src, int dx, int dy) {
  Frame out(src.width, src.height);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) out.at(x, y) = src.clamped(x - dx, y - dy);
  return out;
}

// Procedural stand-in for natural imagery: value-noise octaves whose amplitude
// grows with feature size (roughly 1/f), plus mild grain. A small max_cell with
// a larger gain gives busy, fine-grained texture.
inline Frame natural_frame(int width, int height, std::uint64_t seed, int max_cell = 64, double gain = 1.6) {
  Rng rng(seed);
  std::vector<double> acc(static_cast<std::size_t>(width) * height, 0.0);
  for (int cell = max_cell; cell >= 2; cell /= 2) {
    const int gw = width / cell + 2;
    const int gh = height / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (auto& g : grid) g = rng.uniform(-1.0, 1.0);
    const double amp = gain * cell;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double fx = static_cast<double>(x) / cell;
        const double fy = static_cast<double>(y) / cell;
        const int ix = static_cast<int>(fx);
        const int iy = static_cast<int>(fy);
        const double tx = fx - ix;
        const double ty = fy - iy;
        const auto g = [&](int gx, int gy) { return grid[static_cast<std::size_t>(gy) * gw + gx]; };
        const double top = g(ix, iy) * (1 - tx) + g(ix + 1, iy) * tx;
        const double bottom = g(ix, iy + 1) * (1 - tx) + g(ix + 1, iy + 1) * tx;
        acc[static_cast<std::size_t>(y) * width + x] += amp * (top * (1 - ty) + bottom * ty);
      }
  }
  Frame f(width, height);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    f.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::round(128.0 + acc[i] + rng.uniform(-3.0, 3.0)), 0.0, 255.0));
  }
  return f;
}

// Camera pan across a natural canvas at (vx, vy) px per frame.
inline std::vector<Frame> panning_clip(int width, int height, int frames, int vx, int vy, std::uint64_t seed,
                                       int max_cell = 64, double gain = 1.6) {
  const int margin_x = std::abs(vx) * frames;
  const int margin_y = std::abs(vy) * frames;
  const Frame canvas = natural_frame(width + margin_x, height + margin_y, seed, max_cell, gain);
  std::vector<Frame> clip;
  for (int t = 0; t < frames; ++t) {
    const int ox = vx >= 0 ? margin_x - vx * t : -vx * t;
    const int oy = vy >= 0 ? margin_y - vy * t : -vy * t;
    Frame f(width, height);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) f.at(x, y) = canvas.clamped(x + ox, y + oy);
    clip.push_back(f);
  }
  return clip;
}

}  // namespace lfp::testing
