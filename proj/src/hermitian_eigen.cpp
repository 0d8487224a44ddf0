#include "depctl/hermitian_eigen.hpp"

#include "depctl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace depctl {

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

// Applies A <- J* A J and V <- V J for the rotation annihilating A(p,q).
void rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const cplx apq = a(p, q);
    const double mag = std::abs(apq);
    if (mag == 0.0) return;
    const cplx phase = apq / mag;  // e^{i phi}
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const double tau = (aqq - app) / (2.0 * mag);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    const cplx jpp = c;
    const cplx jpq = s;
    const cplx jqp = -s * std::conj(phase);
    const cplx jqq = c * std::conj(phase);

    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        const cplx akp = a(k, p);
        const cplx akq = a(k, q);
        a(k, p) = akp * jpp + akq * jqp;
        a(k, q) = akp * jpq + akq * jqq;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const cplx apk = a(p, k);
        const cplx aqk = a(q, k);
        a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
        a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = a(p, p).real();
    a(q, q) = a(q, q).real();
    for (std::size_t k = 0; k < n; ++k) {
        const cplx vkp = v(k, p);
        const cplx vkq = v(k, q);
        v(k, p) = vkp * jpp + vkq * jqp;
        v(k, q) = vkp * jpq + vkq * jqq;
    }
}

} // namespace

HermitianEigenResult eigen_hermitian(const ComplexMatrix& a_in) {
    if (a_in.rows() != a_in.cols()) throw ContractError("eigen_hermitian: matrix is not square");
    const std::size_t n = a_in.rows();
    const double norm_a = a_in.frobenius_norm();
    {
        double asym = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) asym += std::norm(a_in(i, j) - std::conj(a_in(j, i)));
        if (std::sqrt(asym) > 1e-12 * std::max(norm_a, 1e-300) && std::sqrt(asym) > 0.0)
            throw ContractError("eigen_hermitian: matrix is not Hermitian");
    }

    ComplexMatrix a = a_in;
    for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
    ComplexMatrix v = ComplexMatrix::identity(n);
    HermitianEigenResult out;

    const double tol = 1e-13 * norm_a;
    constexpr int kMaxSweeps = 100;
    while (out.sweeps < kMaxSweeps && off_diagonal_norm(a) > tol) {
        ++out.sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }
    if (off_diagonal_norm(a) > tol) throw DomainError("eigen_hermitian: Jacobi did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }

    if (norm_a == 0.0) {
        out.residual = 0.0;
        return out;
    }
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s{};
            for (std::size_t k = 0; k < n; ++k)
                s += out.eigenvectors(i, k) * out.eigenvalues[k] * std::conj(out.eigenvectors(j, k));
            res += std::norm(a_in(i, j) - s);
        }
    out.residual = std::sqrt(res) / norm_a;
    return out;
}

double unitarity_defect(const ComplexMatrix& q) {
    const ComplexMatrix p = q.adjoint() * q;
    return (p - ComplexMatrix::identity(q.cols())).frobenius_norm();
}

} // namespace depctl
