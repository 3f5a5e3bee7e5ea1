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

#include "cfrsma/bessel.hpp"

#include <cmath>

#include "cfrsma/types.hpp"

namespace cfrsma {

namespace {

constexpr double kSeriesLimit = 12.0;

double series(double x) {
  const long double q = -(static_cast<long double>(x) * x) / 4.0L;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) && std::fabs(term) < 1e-22L) break;
  }
  return static_cast<double>(sum);
}

double hankel(double x) {
  // b_k = a_k(0) / x^k with a_k(0) = (-1)^k [1^2 3^2 ... (2k-1)^2] / (k! 8^k)
  double p = 0.0;
  double q = 0.0;
  double b = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    if (k > 0) b *= -static_cast<double>((2 * k - 1) * (2 * k - 1)) / (8.0 * k * x);
    if (std::fabs(b) > last) break;  // asymptotic series started diverging
    last = std::fabs(b);
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) p += sign * b;
    else q += sign * b;
    if (std::fabs(b) < 1e-17) break;
  }
  const double w = x - kPi / 4.0;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(w) - q * std::sin(w));
}

}  // namespace

double bessel_j0(double x) {
  const double ax = std::fabs(x);
  return ax < kSeriesLimit ? series(ax) : hankel(ax);
}

}  // namespace cfrsma
