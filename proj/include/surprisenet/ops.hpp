#pragma once

#include <cstdint>
#include <vector>

#include "surprisenet/tensor.hpp"

// Pure forward kernels. The gradient tape wraps these for training; the
// evaluation path calls them directly, so both paths share one set of
// numerics.
namespace surprisenet::ops {

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// a [m,k] x b[n,k]^T -> [m,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// a[k,m]^T x b[k,n] -> [m,n]
Tensor matmul_tn(const Tensor& a, const Tensor& b);

// x [n,in] with weights [out,in] and bias [out] -> [n,out]
Tensor linear(const Tensor& x, const Tensor& weights, const Tensor& bias);

Tensor relu(const Tensor& x);

// weights with entries where visible==0 replaced by exact +0.0f.
Tensor select_visible(const Tensor& weights, const std::vector<uint8_t>& visible);

// Column sums of a 2-D tensor -> [cols]
Tensor col_sums(const Tensor& x);

// Mean of squared differences over all elements.
float mse(const Tensor& x, const Tensor& x_hat);
// Per-row mean squared error of a 2-D pair -> one value per row.
std::vector<float> per_row_mse(const Tensor& x, const Tensor& x_hat);

// Numerically stable fused softmax + NLL, averaged over rows. Labels index
// columns. If softmax_out is non-null it receives the row softmax.
float cross_entropy(const Tensor& logits, const std::vector<int>& labels, Tensor* softmax_out = nullptr);

// -1/2 * sum(1 + log_var - mu^2 - exp(log_var)), averaged over rows.
float kl_standard_normal(const Tensor& mu, const Tensor& log_var);

// mu + exp(log_var / 2) * noise, elementwise.
Tensor reparameterize(const Tensor& mu, const Tensor& log_var, const Tensor& noise);

}  // namespace surprisenet::ops
