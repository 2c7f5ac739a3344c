#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forgelab/linalg.hpp"

namespace forgelab::data {

using linalg::Matrix;
using linalg::Vector;

// Column k of x and y holds the k-th example / label of the batch.
struct MiniBatch {
    Matrix x;  // d x b
    Matrix y;  // n x b

    std::size_t batch_size() const { return x.cols(); }
    std::size_t input_dim() const { return x.rows(); }
    std::size_t class_count() const { return y.rows(); }
    void validate() const;  // same column count, b >= 1, finite entries
};

// Validity domain Z = X x Y for the forging game's membership check.
// Grid inputs take the v values { q/(v-1) : q in [0..v-1] }.
struct Domain {
    enum class InputKind { continuous_box, discrete_grid };
    enum class LabelKind { one_hot, real_vector };

    InputKind input = InputKind::continuous_box;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t levels = 256;  // discrete_grid only, >= 2
    LabelKind label = LabelKind::one_hot;

    static Domain continuous_box(double lo, double hi,
                                 LabelKind label = LabelKind::one_hot);
    static Domain discrete_grid(std::size_t levels,
                                LabelKind label = LabelKind::one_hot);
    void validate() const;
};

struct Example {
    Vector x;
    Vector y;
};

struct Dataset {
    std::vector<Example> examples;
    Domain domain;
    std::size_t class_count = 0;

    std::size_t size() const { return examples.size(); }
    std::size_t input_dim() const { return examples.empty() ? 0 : examples[0].x.size(); }
};

constexpr double kDefaultMatchTol = 1e-9;

bool in_domain(const MiniBatch& batch, const Domain& dom, double tol = kDefaultMatchTol);

// Component-wise example equality within tol; batches are compared as
// multisets of columns, so a pure column permutation is not distinct.
bool examples_equal(const Vector& xa, const Vector& ya, const Vector& xb, const Vector& yb,
                    double tol = kDefaultMatchTol);
bool distinct(const MiniBatch& a, const MiniBatch& b, double tol = kDefaultMatchTol);

// Gaussian class clusters clipped/quantized into the domain, one-hot labels
// assigned round-robin so class counts stay balanced within one.
Dataset gen_synthetic(std::uint64_t seed, std::size_t n_examples, std::size_t d,
                      std::size_t n_classes, const Domain& dom);

// IDX ingestion (big-endian magic 0x803 for images, 0x801 for labels).
Dataset load_idx(const std::string& images_path, const std::string& labels_path);
void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path);

MiniBatch sample_batch(const Dataset& ds, std::size_t b, std::uint64_t seed);
MiniBatch batch_from_examples(const std::vector<Example>& examples);

}  // namespace forgelab::data
