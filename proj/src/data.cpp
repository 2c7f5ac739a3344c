#include "forgelab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "forgelab/rng.hpp"

namespace forgelab::data {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const char* what) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) {
        throw std::runtime_error(std::string("idx: truncated file while reading ") + what);
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

bool on_grid(double value, std::size_t levels, double tol) {
    const double span = static_cast<double>(levels - 1);
    const double q = std::round(value * span);
    if (q < 0.0 || q > span) return false;
    return std::fabs(value - q / span) <= tol;
}

bool is_one_hot(const Vector& y, double tol) {
    std::size_t ones = 0;
    for (double e : y) {
        if (std::fabs(e - 1.0) <= tol) {
            ++ones;
        } else if (std::fabs(e) > tol) {
            return false;
        }
    }
    return ones == 1;
}

}  // namespace

void MiniBatch::validate() const {
    if (x.cols() != y.cols()) throw std::invalid_argument("minibatch: X/Y column mismatch");
    if (x.cols() == 0) throw std::invalid_argument("minibatch: needs at least one example");
    if (!x.all_finite() || !y.all_finite()) {
        throw std::invalid_argument("minibatch: entries must be finite");
    }
}

Domain Domain::continuous_box(double lo, double hi, LabelKind label) {
    Domain d;
    d.input = InputKind::continuous_box;
    d.lo = lo;
    d.hi = hi;
    d.label = label;
    d.validate();
    return d;
}

Domain Domain::discrete_grid(std::size_t levels, LabelKind label) {
    Domain d;
    d.input = InputKind::discrete_grid;
    d.lo = 0.0;
    d.hi = 1.0;
    d.levels = levels;
    d.label = label;
    d.validate();
    return d;
}

void Domain::validate() const {
    if (input == InputKind::continuous_box && !(lo < hi)) {
        throw std::invalid_argument("domain: box needs lo < hi");
    }
    if (input == InputKind::discrete_grid && levels < 2) {
        throw std::invalid_argument("domain: grid needs at least 2 levels");
    }
}

bool in_domain(const MiniBatch& batch, const Domain& dom, double tol) {
    dom.validate();
    for (double v : batch.x.data()) {
        if (dom.input == Domain::InputKind::continuous_box) {
            if (v < dom.lo - tol || v > dom.hi + tol) return false;
        } else {
            if (!on_grid(v, dom.levels, tol)) return false;
        }
    }
    if (dom.label == Domain::LabelKind::one_hot) {
        for (std::size_t k = 0; k < batch.batch_size(); ++k) {
            if (!is_one_hot(batch.y.col(k), tol)) return false;
        }
    }
    return true;
}

bool examples_equal(const Vector& xa, const Vector& ya, const Vector& xb, const Vector& yb,
                    double tol) {
    if (xa.size() != xb.size() || ya.size() != yb.size()) return false;
    for (std::size_t i = 0; i < xa.size(); ++i)
        if (std::fabs(xa[i] - xb[i]) > tol) return false;
    for (std::size_t i = 0; i < ya.size(); ++i)
        if (std::fabs(ya[i] - yb[i]) > tol) return false;
    return true;
}

bool distinct(const MiniBatch& a, const MiniBatch& b, double tol) {
    if (a.x.rows() != b.x.rows() || a.y.rows() != b.y.rows() ||
        a.batch_size() != b.batch_size()) {
        throw std::invalid_argument("distinct: shape mismatch");
    }
    for (std::size_t k = 0; k < a.batch_size(); ++k) {
        const Vector xa = a.x.col(k);
        const Vector ya = a.y.col(k);
        bool found = false;
        for (std::size_t j = 0; j < b.batch_size(); ++j) {
            if (examples_equal(xa, ya, b.x.col(j), b.y.col(j), tol)) {
                found = true;
                break;
            }
        }
        if (!found) return true;
    }
    return false;
}

Dataset gen_synthetic(std::uint64_t seed, std::size_t n_examples, std::size_t d,
                      std::size_t n_classes, const Domain& dom) {
    if (n_examples < 1 || d < 1 || n_classes < 1) {
        throw std::invalid_argument("gen_synthetic: counts must be >= 1");
    }
    dom.validate();
    Rng rng = make_rng(seed);
    const double width = dom.hi - dom.lo;
    std::uniform_real_distribution<double> mean_dist(dom.lo + 0.2 * width, dom.hi - 0.2 * width);
    std::normal_distribution<double> noise(0.0, 0.15 * width);

    std::vector<Vector> means(n_classes, Vector(d));
    for (auto& m : means)
        for (auto& v : m) v = mean_dist(rng);

    Dataset ds;
    ds.domain = dom;
    ds.class_count = n_classes;
    ds.examples.reserve(n_examples);
    const double span = dom.input == Domain::InputKind::discrete_grid
                            ? static_cast<double>(dom.levels - 1)
                            : 0.0;
    for (std::size_t i = 0; i < n_examples; ++i) {
        const std::size_t c = i % n_classes;  // round-robin keeps classes balanced
        Example e;
        e.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            double v = std::clamp(means[c][j] + noise(rng), dom.lo, dom.hi);
            if (dom.input == Domain::InputKind::discrete_grid) {
                v = std::round(v * span) / span;
            }
            e.x[j] = v;
        }
        e.y.assign(n_classes, 0.0);
        e.y[c] = 1.0;
        ds.examples.push_back(std::move(e));
    }
    return ds;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot open " + images_path);
    std::ifstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw std::runtime_error("idx: cannot open " + labels_path);

    if (read_be32(img, "image magic") != kImagesMagic) {
        throw std::runtime_error("idx: bad image magic in " + images_path);
    }
    const std::uint32_t n_images = read_be32(img, "image count");
    const std::uint32_t rows = read_be32(img, "image rows");
    const std::uint32_t cols = read_be32(img, "image cols");

    if (read_be32(lbl, "label magic") != kLabelsMagic) {
        throw std::runtime_error("idx: bad label magic in " + labels_path);
    }
    const std::uint32_t n_labels = read_be32(lbl, "label count");
    if (n_images != n_labels) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "idx: %u images but %u labels", n_images, n_labels);
        throw std::runtime_error(msg);
    }

    constexpr std::size_t n_classes = 10;
    const std::size_t d = std::size_t(rows) * cols;
    std::vector<unsigned char> pixel_buf(d);

    Dataset ds;
    ds.domain = Domain::discrete_grid(256);
    ds.class_count = n_classes;
    ds.examples.reserve(n_images);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        if (!img.read(reinterpret_cast<char*>(pixel_buf.data()), pixel_buf.size())) {
            throw std::runtime_error("idx: truncated pixel data in " + images_path);
        }
        char raw_label;
        if (!lbl.read(&raw_label, 1)) {
            throw std::runtime_error("idx: truncated label data in " + labels_path);
        }
        const unsigned char label = static_cast<unsigned char>(raw_label);
        if (label >= n_classes) {
            throw std::runtime_error("idx: label byte out of range in " + labels_path);
        }
        Example e;
        e.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) e.x[j] = pixel_buf[j] / 255.0;
        e.y.assign(n_classes, 0.0);
        e.y[label] = 1.0;
        ds.examples.push_back(std::move(e));
    }
    return ds;
}

void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path) {
    if (ds.class_count > 10) {
        throw std::invalid_argument("idx: format carries single-digit labels only");
    }
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot write " + images_path);
    std::ofstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw std::runtime_error("idx: cannot write " + labels_path);

    const std::size_t d = ds.input_dim();
    write_be32(img, kImagesMagic);
    write_be32(img, static_cast<std::uint32_t>(ds.size()));
    write_be32(img, static_cast<std::uint32_t>(d));  // stored as d x 1 "images"
    write_be32(img, 1);
    write_be32(lbl, kLabelsMagic);
    write_be32(lbl, static_cast<std::uint32_t>(ds.size()));

    std::vector<unsigned char> pixel_buf(d);
    for (const Example& e : ds.examples) {
        for (std::size_t j = 0; j < d; ++j) {
            const double q = std::round(std::clamp(e.x[j], 0.0, 1.0) * 255.0);
            pixel_buf[j] = static_cast<unsigned char>(q);
        }
        img.write(reinterpret_cast<const char*>(pixel_buf.data()), pixel_buf.size());
        const auto it = std::max_element(e.y.begin(), e.y.end());
        const char label = static_cast<char>(it - e.y.begin());
        lbl.write(&label, 1);
    }
    if (!img || !lbl) throw std::runtime_error("idx: write failed");
}

MiniBatch sample_batch(const Dataset& ds, std::size_t b, std::uint64_t seed) {
    if (b < 1 || b > ds.size()) {
        throw std::invalid_argument("sample_batch: b must be in [1, dataset size]");
    }
    Rng rng = make_rng(seed);
    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates: only the first b slots are needed
    for (std::size_t i = 0; i < b; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<Example> chosen;
    chosen.reserve(b);
    for (std::size_t i = 0; i < b; ++i) chosen.push_back(ds.examples[idx[i]]);
    return batch_from_examples(chosen);
}

MiniBatch batch_from_examples(const std::vector<Example>& examples) {
    if (examples.empty()) throw std::invalid_argument("batch: needs at least one example");
    const std::size_t d = examples[0].x.size();
    const std::size_t n = examples[0].y.size();
    MiniBatch batch;
    batch.x = Matrix(d, examples.size());
    batch.y = Matrix(n, examples.size());
    for (std::size_t k = 0; k < examples.size(); ++k) {
        if (examples[k].x.size() != d || examples[k].y.size() != n) {
            throw std::invalid_argument("batch: inconsistent example shapes");
        }
        batch.x.set_col(k, examples[k].x);
        batch.y.set_col(k, examples[k].y);
    }
    batch.validate();
    return batch;
}

}  // namespace forgelab::data
