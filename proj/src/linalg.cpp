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

#include "cfrsma/linalg.hpp"

namespace cfrsma {

namespace {

// Returns true when at least one eigenvalue had to be clipped.
bool eig_clipped(const arma::cx_mat& h, arma::vec& values, arma::cx_mat& vectors) {
  if (!arma::eig_sym(values, vectors, h)) throw NumericError("Hermitian eigendecomposition failed");
  const double scale = std::max(real_trace(h), 0.0);
  const double floor = -1e-9 * (scale > 0.0 ? scale : 1.0);
  if (values.n_elem > 0 && values.min() < floor) {
    throw NumericError("matrix is not positive semidefinite (min eigenvalue " + std::to_string(values.min()) + ")");
  }
  const bool clipped = values.n_elem > 0 && values.min() < 0.0;
  values.transform([](double v) { return v < 0.0 ? 0.0 : v; });
  return clipped;
}

}  // namespace

arma::cx_mat psd_repair(const arma::cx_mat& a) {
  const arma::cx_mat h = 0.5 * (a + a.t());
  arma::vec values;
  arma::cx_mat vectors;
  if (!eig_clipped(h, values, vectors)) return h;
  arma::cx_mat out = vectors * arma::diagmat(arma::conv_to<arma::cx_vec>::from(values)) * vectors.t();
  return 0.5 * (out + out.t());
}

arma::cx_mat hermitian_sqrt(const arma::cx_mat& a) {
  arma::vec values;
  arma::cx_mat vectors;
  eig_clipped(0.5 * (a + a.t()), values, vectors);
  const arma::cx_vec roots = arma::conv_to<arma::cx_vec>::from(arma::sqrt(values));
  return vectors * arma::diagmat(roots) * vectors.t();
}

}  // namespace cfrsma
