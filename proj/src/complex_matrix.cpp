#include "depctl/complex_matrix.hpp"

#include "depctl/errors.hpp"

#include <cmath>

namespace depctl {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) throw ContractError("ComplexMatrix: dimensions must be positive");
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) throw ContractError("ComplexMatrix: dimensions must be positive");
    if (data_.size() != rows * cols) throw ContractError("ComplexMatrix: entry count mismatch");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<double>& d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
}

double ComplexMatrix::trace_real() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i).real();
    return t;
}

bool ComplexMatrix::is_zero() const {
    for (const auto& z : data_)
        if (z != cplx{}) return false;
    return true;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw ContractError("matrix product: inner dimensions differ");
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("matrix difference: shapes differ");
    std::vector<cplx> d(a.data().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data()[i] - b.data()[i];
    return ComplexMatrix(a.rows(), a.cols(), std::move(d));
}

ComplexMatrix gram(const ComplexMatrix& h) {
    const std::size_t n = h.rows();
    ComplexMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            cplx s{};
            for (std::size_t k = 0; k < h.cols(); ++k) s += h(i, k) * std::conj(h(j, k));
            g(i, j) = s;
            g(j, i) = std::conj(s);
        }
        g(i, i) = g(i, i).real();
    }
    return g;
}

ComplexMatrix block_diagonal(const std::vector<ComplexMatrix>& blocks) {
    if (blocks.empty()) throw ContractError("block_diagonal: empty block list");
    const std::size_t r = blocks.front().rows();
    const std::size_t c = blocks.front().cols();
    ComplexMatrix out(r * blocks.size(), c * blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].rows() != r || blocks[b].cols() != c)
            throw ContractError("block_diagonal: blocks differ in shape");
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) out(b * r + i, b * c + j) = blocks[b](i, j);
    }
    return out;
}

} // namespace depctl
