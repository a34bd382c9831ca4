#pragma once

#include "bornopp/core.hpp"

#ifdef BORNOPP_USE_LAPACKE
#ifndef LAPACK_COMPLEX_CPP
#define LAPACK_COMPLEX_CPP
#endif
#include <lapacke.h>
#endif

namespace bornopp {

// Full eigendecomposition of a dense Hermitian matrix, ascending eigenvalues.
// Uses LAPACK zheevd when built with BORNOPP_USE_LAPACKE (about twice as
// fast on large matrices), Eigen otherwise.
inline void hermitian_eigen(const CMatrix& h, RVector& values, CMatrix& vectors) {
  require(h.rows() == h.cols(), "hermitian_eigen: matrix must be square");
#ifdef BORNOPP_USE_LAPACKE
  const lapack_int n = static_cast<lapack_int>(h.rows());
  vectors = h;
  values.resize(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                   reinterpret_cast<lapack_complex_double*>(vectors.data()), n,
                                   values.data());
  if (info != 0) throw numerical_error("zheevd failed with info = " + std::to_string(info));
#else
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw numerical_error("eigensolver did not converge");
  values = es.eigenvalues();
  vectors = es.eigenvectors();
#endif
}

}  // namespace bornopp
