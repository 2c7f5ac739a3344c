#pragma once

#include <cstdint>
#include <vector>

#include "forgelab/data.hpp"
#include "forgelab/linalg.hpp"

namespace forgelab::nn {

using data::MiniBatch;
using linalg::Matrix;
using linalg::Vector;

enum class Activation { relu, identity };

struct FcnArchitecture {
    std::vector<std::size_t> layer_dims;  // [d0, d1, ..., dL]
    Activation activation = Activation::relu;

    std::size_t depth() const { return layer_dims.size() - 1; }  // L
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t class_count() const { return layer_dims.back(); }
    void validate() const;  // L >= 1, every dim >= 1
};

// theta = [W1, b1, ..., WL, bL] with W_i of shape d_{i-1} x d_i so that
// z_i = W_i^T a_{i-1} + b_i. The flatten order is fixed: W1 row-major,
// b1, W2, b2, ... so l2 distances are comparable across runs and traces.
struct FcnParams {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    Activation activation = Activation::relu;

    std::size_t depth() const { return weights.size(); }
    FcnArchitecture arch() const;
    void validate() const;
};

struct ForwardCache {
    std::vector<Matrix> pre_activations;  // Z_1..Z_L, each d_i x b
    std::vector<Matrix> activations;      // A_0..A_{L-1}, A_0 = X
    Matrix probabilities;                 // softmax(Z_L), n x b
};

struct Gradient {
    std::vector<Matrix> d_weights;
    std::vector<Vector> d_biases;
};

ForwardCache forward(const FcnParams& params, const Matrix& x);

// Mean cross-entropy over the batch columns, log floored at 1e-300.
double loss(const ForwardCache& cache, const Matrix& y);
double example_loss(const FcnParams& params, const Vector& x, const Vector& y);

Gradient grad_example(const FcnParams& params, const Vector& x, const Vector& y);
Gradient grad_batch(const FcnParams& params, const MiniBatch& batch);

// Per-layer error matrices D_1..D_L, each b x d_i with row k holding the
// k-th example's error at that layer. Every row of D_L sums to zero.
std::vector<Matrix> error_matrices(const FcnParams& params, const MiniBatch& batch);

Vector flatten(const Gradient& g);
Vector flatten(const FcnParams& params);
Gradient unflatten_gradient(const FcnParams& shape_like, const Vector& flat);
std::size_t param_count(const FcnParams& params);

double l2_distance(const Gradient& a, const Gradient& b);
double l2_distance(const FcnParams& a, const FcnParams& b);

// Recovers the input of a single-example gradient from its rank-1 first
// layer: x = dW1 * delta1 / |delta1|^2. Degenerate when delta1 vanishes.
struct InversionResult {
    bool degenerate;
    Vector x;
    Vector delta;
};
InversionResult invert_single_example(const Gradient& g);

}  // namespace forgelab::nn
