// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <armadillo>
#include <span>

#include "cfrsma/types.hpp"

namespace cfrsma {

/// sum_i conj(a_i) * b_i
inline cx cdot(const cx* a, const cx* b, int n) {
  double re = 0.0;
  double im = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

inline cx cdot(std::span<const cx> a, std::span<const cx> b) {
  return cdot(a.data(), b.data(), static_cast<int>(a.size()));
}

inline double real_trace(const arma::cx_mat& a) { return std::real(arma::trace(a)); }

/// tr(A B) without forming the product.
inline cx trace_of_product(const arma::cx_mat& a, const arma::cx_mat& b) {
  return arma::accu(a % b.st());
}

/// Hermitian part of `a` with eigenvalues clipped at zero. Eigenvalues below
/// -1e-9 * tr(a) are treated as a genuinely indefinite input (NumericError).
arma::cx_mat psd_repair(const arma::cx_mat& a);

/// Hermitian square root via eigendecomposition, same clipping rule as psd_repair.
arma::cx_mat hermitian_sqrt(const arma::cx_mat& a);

}  // namespace cfrsma
