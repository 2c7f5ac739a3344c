#include "forgelab/trace.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "forgelab/rng.hpp"

namespace forgelab::trace {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::string sha256_hex(const std::vector<unsigned char>& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("trace: sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

void append_le64(std::vector<unsigned char>& blob, double value) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
    for (int i = 0; i < 8; ++i) blob.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

double read_le64(const std::vector<unsigned char>& blob, std::size_t index) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= std::uint64_t(blob[index * 8 + i]) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

void append_params(std::vector<unsigned char>& blob, const nn::FcnParams& p) {
    for (double v : nn::flatten(p)) append_le64(blob, v);
}

void append_batch(std::vector<unsigned char>& blob, const data::MiniBatch& b) {
    for (double v : b.x.data()) append_le64(blob, v);
    for (double v : b.y.data()) append_le64(blob, v);
}

std::string activation_name(nn::Activation a) {
    return a == nn::Activation::relu ? "relu" : "identity";
}

nn::Activation activation_from(const std::string& s) {
    if (s == "relu") return nn::Activation::relu;
    if (s == "identity") return nn::Activation::identity;
    throw std::runtime_error("trace: unknown activation '" + s + "'");
}

}  // namespace

void TrainConfig::validate() const {
    arch.validate();
    if (lr < 0.0 || !std::isfinite(lr)) throw std::invalid_argument("config: bad learning rate");
    if (steps < 1) throw std::invalid_argument("config: steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch size must be >= 1");
}

nn::FcnParams init_params(const nn::FcnArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    Rng rng = make_rng(seed);
    nn::FcnParams params;
    params.activation = arch.activation;
    for (std::size_t i = 0; i + 1 < arch.layer_dims.size(); ++i) {
        const std::size_t din = arch.layer_dims[i];
        const std::size_t dout = arch.layer_dims[i + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(din + dout));
        std::uniform_real_distribution<double> dist(-bound, bound);
        linalg::Matrix w(din, dout);
        for (double& v : w.data()) v = dist(rng);
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(dout, 0.0);
    }
    return params;
}

nn::FcnParams sgd_step(const nn::FcnParams& params, const data::MiniBatch& batch, double lr) {
    const nn::Gradient g = nn::grad_batch(params, batch);
    nn::FcnParams next = params;
    for (std::size_t i = 0; i < next.weights.size(); ++i) {
        for (std::size_t t = 0; t < next.weights[i].size(); ++t) {
            next.weights[i].data()[t] -= lr * g.d_weights[i].data()[t];
        }
        for (std::size_t t = 0; t < next.biases[i].size(); ++t) {
            next.biases[i][t] -= lr * g.d_biases[i][t];
        }
    }
    return next;
}

ExecutionTrace train(const data::Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.size() == 0) throw std::invalid_argument("train: dataset is empty");
    if (ds.input_dim() != cfg.arch.input_dim() || ds.class_count != cfg.arch.class_count()) {
        throw std::invalid_argument("train: dataset does not match architecture");
    }
    ExecutionTrace trace;
    trace.config = cfg;
    trace.checkpoints.push_back(init_params(cfg.arch, cfg.seed));
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        data::MiniBatch batch =
            data::sample_batch(ds, cfg.batch_size, mix_seed(cfg.seed, 0x6261746368ULL, t));
        trace.checkpoints.push_back(sgd_step(trace.checkpoints.back(), batch, cfg.lr));
        trace.batches.push_back(std::move(batch));
    }
    return trace;
}

void save(const ExecutionTrace& trace, const std::string& path) {
    if (trace.checkpoints.size() != trace.batches.size() + 1) {
        throw std::invalid_argument("save: checkpoint/batch count mismatch");
    }
    std::vector<unsigned char> blob;
    json sections = json::array();
    std::size_t offset = 0;  // counted in float64 slots

    for (std::size_t i = 0; i < trace.checkpoints.size(); ++i) {
        const std::size_t count = nn::param_count(trace.checkpoints[i]);
        sections.push_back({{"name", "checkpoint"}, {"index", i}, {"offset", offset}, {"count", count}});
        append_params(blob, trace.checkpoints[i]);
        offset += count;
    }
    for (std::size_t i = 0; i < trace.batches.size(); ++i) {
        const data::MiniBatch& b = trace.batches[i];
        const std::size_t count = b.x.size() + b.y.size();
        sections.push_back({{"name", "batch"},
                            {"index", i},
                            {"offset", offset},
                            {"count", count},
                            {"input_dim", b.x.rows()},
                            {"class_count", b.y.rows()},
                            {"batch_size", b.batch_size()}});
        append_batch(blob, b);
        offset += count;
    }

    json manifest{
        {"kind", "forgelab-trace"},
        {"format_version", kFormatVersion},
        {"lr", trace.config.lr},
        {"steps", trace.config.steps},
        {"batch_size", trace.config.batch_size},
        {"seed", trace.config.seed},
        {"arch",
         {{"layer_dims", trace.config.arch.layer_dims},
          {"activation", activation_name(trace.config.arch.activation)}}},
        {"blob", {{"float64_count", offset}, {"sha256", sha256_hex(blob)}}},
        {"sections", sections},
    };

    std::ofstream mf(path, std::ios::binary | std::ios::trunc);
    if (!mf) throw std::runtime_error("save: cannot write " + path);
    mf << manifest.dump(2) << '\n';
    std::ofstream bf(path + ".blob", std::ios::binary | std::ios::trunc);
    if (!bf) throw std::runtime_error("save: cannot write " + path + ".blob");
    bf.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    if (!mf.good() || !bf.good()) throw std::runtime_error("save: write failed");
}

ExecutionTrace load(const std::string& path) {
    std::ifstream mf(path, std::ios::binary);
    if (!mf) throw std::runtime_error("load: cannot open " + path);
    json manifest;
    try {
        manifest = json::parse(mf);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("load: corrupt manifest: " + std::string(e.what()));
    }
    if (manifest.value("kind", "") != "forgelab-trace") {
        throw std::runtime_error("load: not a trace manifest");
    }
    if (manifest.at("format_version").get<int>() != kFormatVersion) {
        throw std::runtime_error("load: unsupported trace format version");
    }

    ExecutionTrace trace;
    trace.config.lr = manifest.at("lr").get<double>();
    trace.config.steps = manifest.at("steps").get<std::size_t>();
    trace.config.batch_size = manifest.at("batch_size").get<std::size_t>();
    trace.config.seed = manifest.at("seed").get<std::uint64_t>();
    trace.config.arch.layer_dims = manifest.at("arch").at("layer_dims").get<std::vector<std::size_t>>();
    trace.config.arch.activation = activation_from(manifest.at("arch").at("activation"));
    trace.config.arch.validate();

    std::ifstream bf(path + ".blob", std::ios::binary);
    if (!bf) throw std::runtime_error("load: cannot open " + path + ".blob");
    std::vector<unsigned char> blob((std::istreambuf_iterator<char>(bf)),
                                    std::istreambuf_iterator<char>());
    const std::size_t expected = manifest.at("blob").at("float64_count").get<std::size_t>();
    if (blob.size() != expected * 8) {
        throw std::runtime_error("load: blob length disagrees with manifest");
    }
    if (sha256_hex(blob) != manifest.at("blob").at("sha256").get<std::string>()) {
        throw std::runtime_error("load: blob checksum mismatch");
    }

    const auto& dims = trace.config.arch.layer_dims;
    for (const json& sec : manifest.at("sections")) {
        const std::size_t offset = sec.at("offset").get<std::size_t>();
        const std::size_t count = sec.at("count").get<std::size_t>();
        if ((offset + count) * 8 > blob.size()) {
            throw std::runtime_error("load: section offsets exceed blob");
        }
        if (sec.at("name") == "checkpoint") {
            nn::FcnParams p;
            p.activation = trace.config.arch.activation;
            std::size_t pos = offset;
            for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
                linalg::Matrix w(dims[i], dims[i + 1]);
                for (double& v : w.data()) v = read_le64(blob, pos++);
                linalg::Vector bias(dims[i + 1]);
                for (double& v : bias) v = read_le64(blob, pos++);
                p.weights.push_back(std::move(w));
                p.biases.push_back(std::move(bias));
            }
            if (pos - offset != count) {
                throw std::runtime_error("load: checkpoint shape disagrees with manifest");
            }
            trace.checkpoints.push_back(std::move(p));
        } else if (sec.at("name") == "batch") {
            const std::size_t d = sec.at("input_dim").get<std::size_t>();
            const std::size_t n = sec.at("class_count").get<std::size_t>();
            const std::size_t b = sec.at("batch_size").get<std::size_t>();
            if ((d + n) * b != count) {
                throw std::runtime_error("load: batch shape disagrees with manifest");
            }
            data::MiniBatch batch;
            batch.x = linalg::Matrix(d, b);
            batch.y = linalg::Matrix(n, b);
            std::size_t pos = offset;
            for (double& v : batch.x.data()) v = read_le64(blob, pos++);
            for (double& v : batch.y.data()) v = read_le64(blob, pos++);
            trace.batches.push_back(std::move(batch));
        } else {
            throw std::runtime_error("load: unknown section kind");
        }
    }
    if (trace.checkpoints.size() != trace.config.steps + 1 ||
        trace.batches.size() != trace.config.steps) {
        throw std::runtime_error("load: section counts disagree with config");
    }
    return trace;
}

}  // namespace forgelab::trace
