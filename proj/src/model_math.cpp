#include "casegen/model_math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace casegen::model_math {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_finite(const std::vector<double>& values) {
    for (double v : values) {
        require(std::isfinite(v), "matrix values must be finite");
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    require(rows > 0 && cols > 0, "matrix dimensions must be positive");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(rows > 0 && cols > 0, "matrix dimensions must be positive");
    require(data_.size() == rows * cols, "matrix data length must equal rows * cols");
    check_finite(data_);
}

LowRankDelta::LowRankDelta(Matrix u, Matrix v) : U(std::move(u)), V(std::move(v)) {
    require(U.cols() == V.cols(), "low-rank factors must share the rank dimension");
    require(U.cols() >= 1, "rank must be >= 1");
    require(U.cols() <= std::min(U.rows(), V.rows()),
            "rank must be <= min(rows, cols) of the adapted matrix");
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "multiply: inner dimensions must match");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out.at(j, i) = m.at(i, j);
        }
    }
    return out;
}

Matrix attention_weights(const Matrix& q, const Matrix& k) {
    require(q.cols() == k.cols(), "attention: Q and K must share the key dimension");
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.cols()));

    Matrix scores(q.rows(), k.rows());
    for (std::size_t i = 0; i < q.rows(); ++i) {
        for (std::size_t j = 0; j < k.rows(); ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < q.cols(); ++d) dot += q.at(i, d) * k.at(j, d);
            scores.at(i, j) = dot * inv_sqrt_dk;
        }
    }

    for (std::size_t i = 0; i < scores.rows(); ++i) {
        double row_max = scores.at(i, 0);
        for (std::size_t j = 1; j < scores.cols(); ++j) row_max = std::max(row_max, scores.at(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < scores.cols(); ++j) {
            const double e = std::exp(scores.at(i, j) - row_max);
            scores.at(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < scores.cols(); ++j) scores.at(i, j) /= denom;
    }
    return scores;
}

Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v) {
    require(k.rows() == v.rows(), "attention: K and V must have the same row count");
    return multiply(attention_weights(q, k), v);
}

QuantizedTensor quantize(const Matrix& w, int bits, std::size_t block_size) {
    require(bits >= 2 && bits <= 8, "quantize: bits must be in [2, 8]");
    require(block_size >= 1, "quantize: block_size must be >= 1");

    const auto& values = w.data();
    const double max_code = static_cast<double>((1 << (bits - 1)) - 1);
    const double min_code = -static_cast<double>(1 << (bits - 1));

    QuantizedTensor t;
    t.rows = w.rows();
    t.cols = w.cols();
    t.block_size = block_size;
    t.bits = bits;
    t.codes.resize(values.size());
    t.scales.resize((values.size() + block_size - 1) / block_size);

    for (std::size_t b = 0; b < t.scales.size(); ++b) {
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(begin + block_size, values.size());
        double absmax = 0.0;
        for (std::size_t i = begin; i < end; ++i) absmax = std::max(absmax, std::abs(values[i]));
        const double scale = absmax > 0.0 ? absmax / max_code : 1.0;
        t.scales[b] = scale;
        for (std::size_t i = begin; i < end; ++i) {
            const double code = std::clamp(std::round(values[i] / scale), min_code, max_code);
            t.codes[i] = static_cast<int8_t>(code);
        }
    }
    return t;
}

Matrix dequantize(const QuantizedTensor& t) {
    Matrix out(t.rows, t.cols);
    for (std::size_t i = 0; i < t.codes.size(); ++i) {
        out.at(i / t.cols, i % t.cols) =
            static_cast<double>(t.codes[i]) * t.scales[i / t.block_size];
    }
    return out;
}

Matrix apply_low_rank(const QuantizedTensor& wq, const LowRankDelta& delta) {
    require(delta.U.rows() == wq.rows && delta.V.rows() == wq.cols,
            "apply_low_rank: factor shapes must match the quantized matrix");
    Matrix out = dequantize(wq);
    const Matrix update = multiply(delta.U, transpose(delta.V));
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            out.at(i, j) += update.at(i, j);
        }
    }
    return out;
}

ParamAccounting trainable_param_count(std::size_t m, std::size_t n, std::size_t r) {
    require(m >= 1 && n >= 1, "trainable_param_count: dimensions must be >= 1");
    require(r >= 1, "trainable_param_count: rank must be >= 1");
    ParamAccounting acc;
    acc.full = m * n;
    acc.trainable = r * (m + n);
    acc.ratio = static_cast<double>(acc.trainable) / static_cast<double>(acc.full);
    return acc;
}

}  // namespace casegen::model_math
