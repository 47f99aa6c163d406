#include "lfp/tensor/kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace lfp::kernels {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

// Upper bound on the im2col buffer, in elements; large frames are processed
// in bands of output rows.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

struct ConvGeometry {
  int channels, height, width;
  int kernel, stride, padding;
  int out_height, out_width;

  int patch_rows() const { return channels * kernel * kernel; }
};

int rows_per_band(const ConvGeometry& g) {
  const std::size_t per_row = static_cast<std::size_t>(g.patch_rows()) * static_cast<std::size_t>(g.out_width);
  return static_cast<int>(std::clamp<std::size_t>(kColumnBudget / std::max<std::size_t>(per_row, 1), 1,
                                                  static_cast<std::size_t>(g.out_height)));
}

// cols[(c*k + ky)*k + kx][(oy - row0)*Wo + ox] = x[c][oy*s - p + ky][ox*s - p + kx], zero outside.
template <typename T>
void im2col(const T* x, const ConvGeometry& g, int row0, int row1, T* cols) {
  const int band = (row1 - row0) * g.out_width;
  for (int c = 0; c < g.channels; ++c) {
    const T* plane = x + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        T* dst = cols + static_cast<std::size_t>((c * g.kernel + ky) * g.kernel + kx) * band;
        for (int oy = row0; oy < row1; ++oy) {
          T* out = dst + static_cast<std::size_t>(oy - row0) * g.out_width;
          const int iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.height) {
            std::fill(out, out + g.out_width, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * g.width;
          if (g.stride == 1) {
            // valid ox range: 0 <= ox - p + kx < width
            const int lo = std::clamp(g.padding - kx, 0, g.out_width);
            const int hi = std::clamp(g.width + g.padding - kx, lo, g.out_width);
            std::fill(out, out + lo, T(0));
            std::copy(src + lo - g.padding + kx, src + hi - g.padding + kx, out + lo);
            std::fill(out + hi, out + g.out_width, T(0));
          } else {
            for (int ox = 0; ox < g.out_width; ++ox) {
              const int ix = ox * g.stride - g.padding + kx;
              out[ox] = (ix >= 0 && ix < g.width) ? src[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, int row0, int row1, T* dx) {
  const int band = (row1 - row0) * g.out_width;
  for (int c = 0; c < g.channels; ++c) {
    T* plane = dx + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const T* src = cols + static_cast<std::size_t>((c * g.kernel + ky) * g.kernel + kx) * band;
        for (int oy = row0; oy < row1; ++oy) {
          const T* in = src + static_cast<std::size_t>(oy - row0) * g.out_width;
          const int iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.height) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_width; ++ox) {
            const int ix = ox * g.stride - g.padding + kx;
            if (ix >= 0 && ix < g.width) dst[ix] += in[ox];
          }
        }
      }
    }
  }
}

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int padding) {
  const Shape out = conv2d_output_shape(x.shape(), w.shape(), stride, padding);
  if (b.size() != static_cast<std::size_t>(w.shape().n)) {
    throw DimensionError("conv2d bias has " + std::to_string(b.size()) + " entries for " +
                         std::to_string(w.shape().n) + " output channels");
  }
  return {x.shape().c, x.shape().h, x.shape().w, w.shape().h, stride, padding, out.h, out.w};
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (!(a == b)) throw DimensionError(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
}

}  // namespace

Shape conv2d_output_shape(const Shape& input, const Shape& weights, int stride, int padding) {
  if (weights.h != weights.w || weights.h < 1) {
    throw DimensionError("conv2d kernel must be square with side >= 1, got " + weights.str());
  }
  if (stride < 1 || padding < 0) throw DimensionError("conv2d needs stride >= 1 and padding >= 0");
  if (input.c != weights.c) {
    throw DimensionError("conv2d input has " + std::to_string(input.c) + " channels, kernel expects " +
                         std::to_string(weights.c));
  }
  const int span_h = input.h + 2 * padding - weights.h;
  const int span_w = input.w + 2 * padding - weights.w;
  if (span_h < 0 || span_w < 0) {
    throw DimensionError("conv2d output size is not positive for input " + input.str() + " and kernel " +
                         std::to_string(weights.h));
  }
  return {input.n, weights.n, span_h / stride + 1, span_w / stride + 1};
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int padding) {
  const ConvGeometry g = conv_geometry(x, w, b, stride, padding);
  const int out_c = w.shape().n;
  Tensor<T> y({x.shape().n, out_c, g.out_height, g.out_width});
  const int band_rows = rows_per_band(g);
  const std::size_t plane_out = static_cast<std::size_t>(g.out_height) * g.out_width;
  std::vector<T> cols(static_cast<std::size_t>(g.patch_rows()) * band_rows * g.out_width);
  ConstMatrixMap<T> weights(w.data(), out_c, g.patch_rows());

  for (int n = 0; n < x.shape().n; ++n) {
    const T* xn = x.data() + x.offset(n, 0, 0, 0);
    MatrixMap<T> yn(y.data() + y.offset(n, 0, 0, 0), out_c, static_cast<Eigen::Index>(plane_out));
    for (int row0 = 0; row0 < g.out_height; row0 += band_rows) {
      const int row1 = std::min(row0 + band_rows, g.out_height);
      const int band = (row1 - row0) * g.out_width;
      im2col(xn, g, row0, row1, cols.data());
      ConstMatrixMap<T> col_mat(cols.data(), g.patch_rows(), band);
      yn.middleCols(static_cast<Eigen::Index>(row0) * g.out_width, band).noalias() = weights * col_mat;
    }
    for (int o = 0; o < out_c; ++o) yn.row(o).array() += b[static_cast<std::size_t>(o)];
  }
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, int stride, int padding,
                     Tensor<T>* dx, Tensor<T>* dw, Tensor<T>* db) {
  const ConvGeometry g = conv_geometry(x, w, Tensor<T>({w.shape().n, 1, 1, 1}), stride, padding);
  const int out_c = w.shape().n;
  require_same_shape(dy.shape(), {x.shape().n, out_c, g.out_height, g.out_width}, "conv2d backward");
  const int band_rows = rows_per_band(g);
  const std::size_t plane_out = static_cast<std::size_t>(g.out_height) * g.out_width;
  std::vector<T> cols(static_cast<std::size_t>(g.patch_rows()) * band_rows * g.out_width);
  ConstMatrixMap<T> weights(w.data(), out_c, g.patch_rows());

  for (int n = 0; n < x.shape().n; ++n) {
    const T* xn = x.data() + x.offset(n, 0, 0, 0);
    ConstMatrixMap<T> dyn(dy.data() + dy.offset(n, 0, 0, 0), out_c, static_cast<Eigen::Index>(plane_out));
    if (db) {
      // Sequential sum keeps the reduction order fixed.
      for (int o = 0; o < out_c; ++o) {
        const T* row = dy.data() + dy.offset(n, o, 0, 0);
        T acc = 0;
        for (std::size_t i = 0; i < plane_out; ++i) acc += row[i];
        (*db)[static_cast<std::size_t>(o)] += acc;
      }
    }
    for (int row0 = 0; row0 < g.out_height; row0 += band_rows) {
      const int row1 = std::min(row0 + band_rows, g.out_height);
      const int band = (row1 - row0) * g.out_width;
      const auto dy_band = dyn.middleCols(static_cast<Eigen::Index>(row0) * g.out_width, band);
      if (dw) {
        im2col(xn, g, row0, row1, cols.data());
        ConstMatrixMap<T> col_mat(cols.data(), g.patch_rows(), band);
        MatrixMap<T> dw_mat(dw->data(), out_c, g.patch_rows());
        dw_mat.noalias() += dy_band * col_mat.transpose();
      }
      if (dx) {
        MatrixMap<T> col_grad(cols.data(), g.patch_rows(), band);
        col_grad.noalias() = weights.transpose() * dy_band;
        col2im_add(cols.data(), g, row0, row1, dx->data() + dx->offset(n, 0, 0, 0));
      }
    }
  }
}

template <typename T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const int batch = x.shape().n;
  const int m = w.shape().n;
  const std::size_t in = static_cast<std::size_t>(w.shape().c);
  if (x.size() != static_cast<std::size_t>(batch) * in) {
    throw DimensionError("linear expects " + std::to_string(in) + " inputs per item, got shape " + x.shape().str());
  }
  if (b.size() != static_cast<std::size_t>(m)) throw DimensionError("linear bias length mismatch");
  Tensor<T> y({batch, m, 1, 1});
  for (int n = 0; n < batch; ++n) {
    const T* xn = x.data() + static_cast<std::size_t>(n) * in;
    for (int j = 0; j < m; ++j) {
      const T* wj = w.data() + static_cast<std::size_t>(j) * in;
      T acc = b[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < in; ++i) acc += wj[i] * xn[i];
      y[static_cast<std::size_t>(n) * m + j] = acc;
    }
  }
  return y;
}

template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx, Tensor<T>* dw,
                     Tensor<T>* db) {
  const int batch = x.shape().n;
  const int m = w.shape().n;
  const std::size_t in = static_cast<std::size_t>(w.shape().c);
  for (int n = 0; n < batch; ++n) {
    const T* xn = x.data() + static_cast<std::size_t>(n) * in;
    for (int j = 0; j < m; ++j) {
      const T g = dy[static_cast<std::size_t>(n) * m + j];
      const T* wj = w.data() + static_cast<std::size_t>(j) * in;
      if (db) (*db)[static_cast<std::size_t>(j)] += g;
      if (dw) {
        T* dwj = dw->data() + static_cast<std::size_t>(j) * in;
        for (std::size_t i = 0; i < in; ++i) dwj[i] += g * xn[i];
      }
      if (dx) {
        T* dxn = dx->data() + static_cast<std::size_t>(n) * in;
        for (std::size_t i = 0; i < in; ++i) dxn[i] += g * wj[i];
      }
    }
  }
}

template <typename T>
Tensor<T> activation_forward(const Tensor<T>& x, Activation act) {
  Tensor<T> y(x.shape());
  const T slope = static_cast<T>(act.slope);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x[i];
    switch (act.kind) {
      case ActivationKind::relu: y[i] = v > T(0) ? v : T(0); break;
      case ActivationKind::leaky_relu: y[i] = v > T(0) ? v : slope * v; break;
      case ActivationKind::tanh: y[i] = std::tanh(v); break;
      case ActivationKind::sigmoid: y[i] = T(1) / (T(1) + std::exp(-v)); break;
    }
  }
  return y;
}

template <typename T>
void activation_backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy, Activation act, Tensor<T>& dx) {
  const T slope = static_cast<T>(act.slope);
  for (std::size_t i = 0; i < x.size(); ++i) {
    T d = T(0);
    switch (act.kind) {
      case ActivationKind::relu: d = x[i] > T(0) ? T(1) : T(0); break;
      case ActivationKind::leaky_relu: d = x[i] > T(0) ? T(1) : slope; break;
      case ActivationKind::tanh: d = T(1) - y[i] * y[i]; break;
      case ActivationKind::sigmoid: d = y[i] * (T(1) - y[i]); break;
    }
    dx[i] += d * dy[i];
  }
}

Shape avg_pool2d_output_shape(const Shape& input, int k, int stride) {
  if (k < 1 || stride < 1) throw DimensionError("avg_pool2d needs k >= 1 and stride >= 1");
  if (input.h < k || input.w < k) {
    throw DimensionError("avg_pool2d input " + input.str() + " smaller than window " + std::to_string(k));
  }
  return {input.n, input.c, (input.h - k) / stride + 1, (input.w - k) / stride + 1};
}

template <typename T>
Tensor<T> avg_pool2d_forward(const Tensor<T>& x, int k, int stride) {
  const Shape out = avg_pool2d_output_shape(x.shape(), k, stride);
  Tensor<T> y(out);
  const T inv = T(1) / static_cast<T>(k * k);
  for (int n = 0; n < out.n; ++n) {
    for (int c = 0; c < out.c; ++c) {
      for (int oy = 0; oy < out.h; ++oy) {
        for (int ox = 0; ox < out.w; ++ox) {
          T acc = T(0);
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) acc += x.at(n, c, oy * stride + ky, ox * stride + kx);
          }
          y.at(n, c, oy, ox) = acc * inv;
        }
      }
    }
  }
  return y;
}

template <typename T>
void avg_pool2d_backward(const Tensor<T>& dy, int k, int stride, Tensor<T>& dx) {
  const Shape out = avg_pool2d_output_shape(dx.shape(), k, stride);
  require_same_shape(dy.shape(), out, "avg_pool2d backward");
  const T inv = T(1) / static_cast<T>(k * k);
  for (int n = 0; n < out.n; ++n) {
    for (int c = 0; c < out.c; ++c) {
      for (int oy = 0; oy < out.h; ++oy) {
        for (int ox = 0; ox < out.w; ++ox) {
          const T g = dy.at(n, c, oy, ox) * inv;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) dx.at(n, c, oy * stride + ky, ox * stride + kx) += g;
          }
        }
      }
    }
  }
}

template <typename T>
double mse_value(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred.shape(), target.shape(), "mse_loss");
  if (pred.empty()) throw DimensionError("mse_loss of empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

template <typename T>
void mse_backward(const Tensor<T>& pred, const Tensor<T>& target, double upstream, Tensor<T>* dpred,
                  Tensor<T>* dtarget) {
  const double scale = 2.0 * upstream / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double g = scale * (static_cast<double>(pred[i]) - static_cast<double>(target[i]));
    if (dpred) (*dpred)[i] += static_cast<T>(g);
    if (dtarget) (*dtarget)[i] -= static_cast<T>(g);
  }
}

template <typename T>
double bce_value(const Tensor<T>& pred, double label) {
  if (pred.empty()) throw DimensionError("bce_loss of empty tensor");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += bce_loss(static_cast<double>(pred[i]), label);
  return acc / static_cast<double>(pred.size());
}

template <typename T>
void bce_backward(const Tensor<T>& pred, double label, double upstream, Tensor<T>& dpred) {
  const double scale = upstream / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double x = static_cast<double>(pred[i]);
    // The clamp is flat outside [eps, 1 - eps].
    if (x < kBceEpsilon || x > 1.0 - kBceEpsilon) continue;
    dpred[i] += static_cast<T>(scale * (-label / x + (1.0 - label) / (1.0 - x)));
  }
}

#define LFP_INSTANTIATE_KERNELS(T)                                                                               \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);             \
  template void conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int, Tensor<T>*,      \
                                Tensor<T>*, Tensor<T>*);                                                         \
  template Tensor<T> linear_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                       \
  template void linear_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>*, Tensor<T>*,    \
                                Tensor<T>*);                                                                     \
  template Tensor<T> activation_forward(const Tensor<T>&, Activation);                                           \
  template void activation_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Activation,            \
                                    Tensor<T>&);                                                                 \
  template Tensor<T> avg_pool2d_forward(const Tensor<T>&, int, int);                                             \
  template void avg_pool2d_backward(const Tensor<T>&, int, int, Tensor<T>&);                                     \
  template double mse_value(const Tensor<T>&, const Tensor<T>&);                                                 \
  template void mse_backward(const Tensor<T>&, const Tensor<T>&, double, Tensor<T>*, Tensor<T>*);                \
  template double bce_value(const Tensor<T>&, double);                                                           \
  template void bce_backward(const Tensor<T>&, double, double, Tensor<T>&);

LFP_INSTANTIATE_KERNELS(float)
LFP_INSTANTIATE_KERNELS(double)

#undef LFP_INSTANTIATE_KERNELS

}  // namespace lfp::kernels

namespace lfp {

template <typename T>
std::vector<T> linear(std::span<const T> input, const LinearParams<T>& params) {
  if (input.size() != static_cast<std::size_t>(params.inputs())) {
    throw DimensionError("linear expects " + std::to_string(params.inputs()) + " inputs, got " +
                         std::to_string(input.size()));
  }
  Tensor<T> x({1, params.inputs(), 1, 1}, std::vector<T>(input.begin(), input.end()));
  const Tensor<T> y = kernels::linear_forward(x, params.weights, params.bias);
  return {y.values().begin(), y.values().end()};
}

template std::vector<float> linear(std::span<const float>, const LinearParams<float>&);
template std::vector<double> linear(std::span<const double>, const LinearParams<double>&);

double bce_loss(double pred, double label) {
  const double x = std::clamp(pred, kBceEpsilon, 1.0 - kBceEpsilon);
  double loss = 0.0;
  if (label != 0.0) loss -= label * std::log(x);
  if (label != 1.0) loss -= (1.0 - label) * std::log(1.0 - x);
  return loss;
}

}  // namespace lfp
