#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace casegen::model_math {

// Dense row-major matrix of finite doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    const std::vector<double>& data() const { return data_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Blockwise symmetric absmax quantization of a matrix: signed integer codes
// plus one positive scale per block of the row-major flattened values.
struct QuantizedTensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t block_size = 64;
    int bits = 4;
    std::vector<int8_t> codes;
    std::vector<double> scales;
};

// Factors of a rank-r weight update U * V^T for an (U.rows x V.rows) matrix.
// Requires 1 <= r <= min(U.rows, V.rows).
struct LowRankDelta {
    LowRankDelta(Matrix u, Matrix v);

    Matrix U;
    Matrix V;
    std::size_t rank() const { return U.cols(); }
};

struct ParamAccounting {
    std::size_t full = 0;       // m * n
    std::size_t trainable = 0;  // r * (m + n), the two factor matrices
    double ratio = 0.0;
};

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

// Row-wise softmax weights of Q K^T / sqrt(d_k), computed with
// max-subtraction for stability. Shape (Q rows x K rows).
Matrix attention_weights(const Matrix& q, const Matrix& k);

// attention_weights(Q, K) * V. Requires Q.cols == K.cols and K.rows == V.rows.
Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v);

// Per block of block_size flattened values: scale = absmax / (2^(bits-1) - 1)
// (1.0 for all-zero blocks), code = round(value / scale) clamped to the code
// range. bits must be in [2, 8], block_size >= 1, values finite.
QuantizedTensor quantize(const Matrix& w, int bits = 4, std::size_t block_size = 64);

Matrix dequantize(const QuantizedTensor& t);

// dequantize(wq) + U * V^T. Shapes must line up: U.rows == rows, V.rows == cols.
Matrix apply_low_rank(const QuantizedTensor& wq, const LowRankDelta& delta);

ParamAccounting trainable_param_count(std::size_t m, std::size_t n, std::size_t r);

}  // namespace casegen::model_math
