#pragma once

#include "depctl/complex_matrix.hpp"

#include <vector>

namespace depctl {

struct HermitianEigenResult {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // columns orthonormal
    double residual = 0.0;            // ||A - Q diag(lambda) Q*||_F / ||A||_F
    int sweeps = 0;
};

/// Cyclic complex Jacobi. Throws ContractError when A is not square or not
/// Hermitian to relative 1e-12.
HermitianEigenResult eigen_hermitian(const ComplexMatrix& a);

/// ||Q*Q - I||_F.
double unitarity_defect(const ComplexMatrix& q);

} // namespace depctl
