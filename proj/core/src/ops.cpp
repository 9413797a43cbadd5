// Copyright 2026 The Incremental Representation Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ir/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ir/error.hpp"
#include "ir/linalg.hpp"

namespace ir::ad {
namespace {

using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(t.shape()));
  }
}

CMapR as_matrix(std::span<const double> s, std::size_t rows, std::size_t cols) {
  return CMapR(s.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MapR as_matrix(std::span<double> s, std::size_t rows, std::size_t cols) {
  return MapR(s.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename Fn>
Tensor unary_map(const Tensor& a, Fn&& fn) {
  std::vector<double> out(a.numel());
  const auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(in[i]);
  return Tensor(a.shape(), std::move(out));
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> out(a.numel());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  Tensor result(a.shape(), std::move(out));
  if (tape.tracks({&a, &b})) {
    tape.record(result, [a, b, result] {
      const auto g = result.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return result;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> out(a.numel());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  Tensor result(a.shape(), std::move(out));
  if (tape.tracks({&a, &b})) {
    tape.record(result, [a, b, result] {
      const auto g = result.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return result;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> out(a.numel());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  Tensor result(a.shape(), std::move(out));
  if (tape.tracks({&a, &b})) {
    tape.record(result, [a, b, result] {
      const auto g = result.grad();
      const auto x = a.data();
      const auto y = b.data();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
      }
    });
  }
  return result;
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  Tensor result = unary_map(a, [factor](double v) { return v * factor; });
  if (tape.tracks({&a})) {
    tape.record(result, [a, result, factor] {
      const auto g = result.grad();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
    });
  }
  return result;
}

Tensor relu(Tape& tape, const Tensor& a) {
  Tensor result = unary_map(a, [](double v) { return v > 0.0 ? v : 0.0; });
  if (tape.tracks({&a})) {
    tape.record(result, [a, result] {
      const auto g = result.grad();
      const auto x = a.data();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (x[i] > 0.0) ga[i] += g[i];
      }
    });
  }
  return result;
}

Tensor sum(Tape& tape, const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  Tensor result = Tensor::scalar(total);
  if (tape.tracks({&a})) {
    tape.record(result, [a, result] {
      const double g = result.grad()[0];
      for (double& v : a.grad_buffer()) v += g;
    });
  }
  return result;
}

Tensor reshape(Tape& tape, const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                     shape_string(shape));
  }
  const auto in = a.data();
  Tensor result(std::move(shape), std::vector<double>(in.begin(), in.end()));
  if (tape.tracks({&a})) {
    tape.record(result, [a, result] {
      const auto g = result.grad();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return result;
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " . " +
                     shape_string(b.shape()));
  }
  // Row by row through an aligned buffer: identical rows of `a` must give
  // bitwise identical rows of the product regardless of their position.
  Tensor result = Tensor::zeros({m, n});
  {
    auto out = as_matrix(result.mutable_data(), m, n);
    const auto amat = as_matrix(a.data(), m, k);
    const auto bmat = as_matrix(b.data(), k, n);
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(k));
    Eigen::RowVectorXd prod(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < m; ++i) {
      row = amat.row(static_cast<Eigen::Index>(i));
      prod.noalias() = row * bmat;
      out.row(static_cast<Eigen::Index>(i)) = prod;
    }
  }
  if (tape.tracks({&a, &b})) {
    tape.record(result, [a, b, result, m, k, n] {
      const auto g = as_matrix(result.grad(), m, n);
      if (a.requires_grad()) {
        as_matrix(a.grad_buffer(), m, k).noalias() += g * as_matrix(b.data(), k, n).transpose();
      }
      if (b.requires_grad()) {
        as_matrix(b.grad_buffer(), k, n).noalias() += as_matrix(a.data(), m, k).transpose() * g;
      }
    });
  }
  return result;
}

Tensor add_row_bias(Tape& tape, const Tensor& a, const Tensor& bias) {
  require_rank("add_row_bias", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (bias.numel() != n) {
    throw ShapeError("add_row_bias: bias " + shape_string(bias.shape()) + " does not match " +
                     shape_string(a.shape()));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bv = bias.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  Tensor result(a.shape(), std::move(out));
  if (tape.tracks({&a, &bias})) {
    tape.record(result, [a, bias, result, m, n] {
      const auto g = result.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
    });
  }
  return result;
}

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernels, const Tensor& bias,
              Padding padding) {
  require_rank("conv2d", input, 4);
  require_rank("conv2d", kernels, 4);
  const std::size_t batch = input.dim(0), ch = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t out_ch = kernels.dim(0);
  if (kernels.dim(1) != ch) {
    throw ShapeError("conv2d: kernels " + shape_string(kernels.shape()) + " expect " +
                     std::to_string(kernels.dim(1)) + " channels, input " +
                     shape_string(input.shape()) + " has " + std::to_string(ch));
  }
  if (kernels.dim(2) != 3 || kernels.dim(3) != 3) {
    throw ShapeError("conv2d: only 3x3 kernels are supported, got " +
                     shape_string(kernels.shape()));
  }
  if (h < 3 || w < 3) throw ShapeError("conv2d: spatial dims must be >= 3, got " +
                                       shape_string(input.shape()));
  if (bias.defined() && bias.numel() != out_ch) {
    throw ShapeError("conv2d: bias " + shape_string(bias.shape()) + " does not match " +
                     std::to_string(out_ch) + " output channels");
  }
  const std::ptrdiff_t pad = padding == Padding::kSame ? 1 : 0;
  const std::size_t oh = padding == Padding::kSame ? h : h - 2;
  const std::size_t ow = padding == Padding::kSame ? w : w - 2;
  const std::size_t plane = oh * ow;
  const std::size_t rows = ch * 9;
  const std::size_t cols_n = batch * plane;

  // im2col: row (c, ky, kx), column (b, oy, ox).
  std::vector<double> cols(rows * cols_n, 0.0);
  const auto in = input.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      const double* src = in.data() + (b * ch + c) * h * w;
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          double* dst = cols.data() + (c * 9 + ky * 3 + kx) * cols_n + b * plane;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - pad;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) - pad;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              dst[oy * ow + ox] = src[iy * static_cast<std::ptrdiff_t>(w) + ix];
            }
          }
        }
      }
    }
  }

  // One product per sample so an image's output never depends on where it
  // sits in the batch (GEMM kernels round edge tiles differently).
  Tensor result = Tensor::zeros({batch, out_ch, oh, ow});
  {
    auto out = result.mutable_data();
    const auto kmat = as_matrix(kernels.data(), out_ch, rows);
    const auto cmat = as_matrix(std::span<const double>(cols), rows, cols_n);
    const auto bv = bias.defined() ? bias.data() : std::span<const double>();
    for (std::size_t b = 0; b < batch; ++b) {
      auto dst = as_matrix(out.subspan(b * out_ch * plane, out_ch * plane), out_ch, plane);
      dst.noalias() = kmat * cmat.middleCols(static_cast<Eigen::Index>(b * plane),
                                             static_cast<Eigen::Index>(plane));
      if (!bv.empty()) {
        for (std::size_t o = 0; o < out_ch; ++o) dst.row(static_cast<Eigen::Index>(o)).array() += bv[o];
      }
    }
  }

  if (tape.tracks({&input, &kernels, &bias})) {
    tape.record(result, [input, kernels, bias, result, cols = std::move(cols), batch, ch, h, w,
                         out_ch, oh, ow, plane, rows, cols_n, pad] {
      const auto g = result.grad();
      MatR gmat(out_ch, cols_n);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < out_ch; ++o)
          std::copy_n(g.data() + (b * out_ch + o) * plane, plane,
                      gmat.data() + o * cols_n + b * plane);

      if (kernels.requires_grad()) {
        as_matrix(kernels.grad_buffer(), out_ch, rows).noalias() +=
            gmat * as_matrix(std::span<const double>(cols), rows, cols_n).transpose();
      }
      if (bias.defined() && bias.requires_grad()) {
        auto gb = bias.grad_buffer();
        for (std::size_t o = 0; o < out_ch; ++o) gb[o] += gmat.row(static_cast<Eigen::Index>(o)).sum();
      }
      if (input.requires_grad()) {
        MatR dcols = as_matrix(kernels.data(), out_ch, rows).transpose() * gmat;
        auto gi = input.grad_buffer();
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < ch; ++c) {
            double* dst = gi.data() + (b * ch + c) * h * w;
            for (std::size_t ky = 0; ky < 3; ++ky) {
              for (std::size_t kx = 0; kx < 3; ++kx) {
                const double* src = dcols.data() + (c * 9 + ky * 3 + kx) * cols_n + b * plane;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                  const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - pad;
                  if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                  for (std::size_t ox = 0; ox < ow; ++ox) {
                    const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) - pad;
                    if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                    dst[iy * static_cast<std::ptrdiff_t>(w) + ix] += src[oy * ow + ox];
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return result;
}

Tensor maxpool2d(Tape& tape, const Tensor& input) {
  require_rank("maxpool2d", input, 4);
  const std::size_t batch = input.dim(0), ch = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (h % 2 != 0 || w % 2 != 0) {
    throw ShapeError("maxpool2d: spatial dims must be even, got " + shape_string(input.shape()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor result = Tensor::zeros({batch, ch, oh, ow});
  std::vector<std::size_t> argmax(result.numel());
  const auto in = input.data();
  auto out = result.mutable_data();
  for (std::size_t bc = 0; bc < batch * ch; ++bc) {
    const std::size_t base = bc * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = base + (2 * oy) * w + 2 * ox;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = base + (2 * oy + dy) * w + 2 * ox + dx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = bc * oh * ow + oy * ow + ox;
        out[o] = in[best];
        argmax[o] = best;
      }
    }
  }
  if (tape.tracks({&input})) {
    tape.record(result, [input, result, argmax = std::move(argmax)] {
      const auto g = result.grad();
      auto gi = input.grad_buffer();
      for (std::size_t o = 0; o < g.size(); ++o) gi[argmax[o]] += g[o];
    });
  }
  return result;
}

Tensor softmax_with_temperature(Tape& tape, const Tensor& logits, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax_with_temperature: tau must be > 0");
  require_rank("softmax_with_temperature", logits, 2);
  const std::size_t batch = logits.dim(0), c = logits.dim(1);
  Tensor result = Tensor::zeros({batch, c});
  const auto z = logits.data();
  auto p = result.mutable_data();
  for (std::size_t i = 0; i < batch; ++i) {
    const double* row = z.data() + i * c;
    const double peak = *std::max_element(row, row + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      p[i * c + j] = std::exp((row[j] - peak) / tau);
      total += p[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) p[i * c + j] /= total;
  }
  if (tape.tracks({&logits})) {
    tape.record(result, [logits, result, batch, c, tau] {
      const auto g = result.grad();
      const auto p = result.data();
      auto gz = logits.grad_buffer();
      for (std::size_t i = 0; i < batch; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * p[i * c + j];
        for (std::size_t j = 0; j < c; ++j) {
          gz[i * c + j] += p[i * c + j] * (g[i * c + j] - dot) / tau;
        }
      }
    });
  }
  return result;
}

Tensor cross_entropy(Tape& tape, const Tensor& probabilities, std::span<const std::size_t> labels) {
  require_rank("cross_entropy", probabilities, 2);
  const std::size_t batch = probabilities.dim(0), c = probabilities.dim(1);
  if (labels.size() != batch) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch of " +
                     std::to_string(batch));
  }
  for (std::size_t label : labels) {
    if (label >= c) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(label) +
                              " outside [0, " + std::to_string(c) + ")");
    }
  }
  const auto p = probabilities.data();
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    total -= std::log(std::max(p[i * c + labels[i]], kLogProbabilityFloor));
  }
  Tensor result = Tensor::scalar(total / static_cast<double>(batch));
  if (tape.tracks({&probabilities})) {
    std::vector<std::size_t> kept(labels.begin(), labels.end());
    tape.record(result, [probabilities, result, kept = std::move(kept), batch, c] {
      const double g = result.grad()[0];
      const auto p = probabilities.data();
      auto gp = probabilities.grad_buffer();
      for (std::size_t i = 0; i < batch; ++i) {
        const double pi = p[i * c + kept[i]];
        if (pi > kLogProbabilityFloor) gp[i * c + kept[i]] -= g / (static_cast<double>(batch) * pi);
      }
    });
  }
  return result;
}

Tensor vector_lp_penalty(Tape& tape, const Tensor& a, const Tensor& b, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("vector_lp_penalty: p must be 1 or 2");
  require_same_shape("vector_lp_penalty", a, b);
  require_rank("vector_lp_penalty", a, 2);
  const std::size_t batch = a.dim(0), d = a.dim(1);
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> norms(batch, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = x[i * d + j] - y[i * d + j];
      acc += p == 1 ? std::abs(diff) : diff * diff;
    }
    norms[i] = p == 1 ? acc : std::sqrt(acc);
    total += norms[i];
  }
  Tensor result = Tensor::scalar(total / static_cast<double>(batch));
  if (tape.tracks({&a, &b})) {
    tape.record(result, [a, b, result, norms = std::move(norms), batch, d, p] {
      const double g = result.grad()[0] / static_cast<double>(batch);
      const auto x = a.data();
      const auto y = b.data();
      std::vector<double> dir(batch * d, 0.0);
      for (std::size_t i = 0; i < batch; ++i) {
        if (p == 2 && norms[i] == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = x[i * d + j] - y[i * d + j];
          if (p == 1) {
            dir[i * d + j] = diff > 0.0 ? g : (diff < 0.0 ? -g : 0.0);
          } else {
            dir[i * d + j] = g * diff / norms[i];
          }
        }
      }
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t k = 0; k < dir.size(); ++k) ga[k] += dir[k];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t k = 0; k < dir.size(); ++k) gb[k] -= dir[k];
      }
    });
  }
  return result;
}

Tensor nuclear_penalty(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("nuclear_penalty", a, b);
  require_rank("nuclear_penalty", a, 2);
  const std::size_t batch = a.dim(0), d = a.dim(1);
  MatR diff = as_matrix(a.data(), batch, d) - as_matrix(b.data(), batch, d);

  // Gram matrix of the smaller side: diff^T diff (d x d) or diff diff^T (batch x batch).
  const bool tall = batch >= d;
  const std::size_t n = tall ? d : batch;
  MatR gram = tall ? MatR(diff.transpose() * diff) : MatR(diff * diff.transpose());
  linalg::SymmetricEigen eig =
      linalg::symmetric_eigen(std::vector<double>(gram.data(), gram.data() + n * n), n);

  double nuclear = 0.0;
  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    sigma[i] = std::sqrt(std::max(eig.values[i], 0.0));
    nuclear += sigma[i];
  }
  Tensor result = Tensor::scalar(nuclear / static_cast<double>(batch));

  if (tape.tracks({&a, &b})) {
    tape.record(result, [a, b, result, diff = std::move(diff), eig = std::move(eig),
                         sigma = std::move(sigma), batch, d, n, tall] {
      const double g = result.grad()[0] / static_cast<double>(batch);
      // Subgradient U V^T over singular values above the cutoff. With the
      // eigenvectors W of the Gram matrix and D = diag(1/sigma) on kept
      // values: tall -> diff W D W^T, wide -> W D W^T diff.
      MatR w = as_matrix(std::span<const double>(eig.vectors), n, n);
      Eigen::VectorXd inv = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        if (sigma[i] > kSingularValueCutoff) inv[static_cast<Eigen::Index>(i)] = 1.0 / sigma[i];
      }
      const MatR proj = w * inv.asDiagonal() * w.transpose();
      const MatR dir = tall ? MatR(diff * proj) : MatR(proj * diff);
      if (a.requires_grad()) as_matrix(a.grad_buffer(), batch, d) += g * dir;
      if (b.requires_grad()) as_matrix(b.grad_buffer(), batch, d) -= g * dir;
    });
  }
  return result;
}

}  // namespace ir::ad
