// Copyright 2026 The qndsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Post-selected weak and strong values of the qubit number observable
// n = |1><1|, measured with the variable-strength CNOT device.
//
// The meter record k in {0, 1} has P(k|psi) = <psi|E_k|psi> with
// 2 E_k = 1 - (-1)^k (2 gamma^2 - 1)(2n - 1), so the mean of n is recovered
// from 2<n> - 1 = (P(1) - P(0)) / (2 gamma^2 - 1), with or without
// post-selection on a later measurement.

#include <cstdint>

#include <nlohmann/json.hpp>

#include "qnd/hilbert.hpp"

namespace qnd::weak {

struct PovmPair {
  CMatrix e0;
  CMatrix e1;
};

enum class Mode { analytic, sampled };
enum class PostSelect { plus, minus };

struct WeakValueResult {
  double value = 0.0;
  PostSelect post = PostSelect::plus;
  double gamma = 0.0;
  Mode mode = Mode::analytic;
  double std_error = 0.0;      ///< 0 in analytic mode
  std::uint64_t shots = 0;     ///< sampled mode only
  std::uint64_t retained = 0;  ///< shots surviving post-selection
  std::uint64_t seed = 0;
};

struct PostselectedMean {
  double plus_value = 0.0;
  double minus_value = 0.0;
  double p_plus = 0.0;
  // Same quantities from the conditional outcome probabilities of the
  // simulated joint state.
  double direct_plus = 0.0;
  double direct_minus = 0.0;
  double direct_p_plus = 0.0;
  /// False when the closed form and the direct route differ by more than
  /// 1e-10 (possible for complex amplitudes).
  bool consistent = true;
};

/// diag(0, 1).
CMatrix number_operator();

/// Re <phi|X|psi> / <phi|psi>. Throws when |<phi|psi>| <= 1e-12.
double weak_value(const CMatrix& x, const PureState& psi, const PureState& phi);

/// Conditional mean of a projective X measurement given that a later
/// measurement finds phi. Degenerate eigenvalues are grouped into
/// eigenspace projectors.
double strong_value_postselected(const CMatrix& x, const PureState& psi, const PureState& phi);

/// Throws unless gamma lies in [1/sqrt(2), 1].
PovmPair povm(double gamma);

/// Closed-form post-selected means of n for psi = alpha|0> + beta|1> after
/// a strength-gamma measurement and a final {|+>, |->} measurement.
/// gamma must exceed 1/sqrt(2) (the estimator divides by 2 gamma^2 - 1).
PostselectedMean postselected_mean_n(Complex alpha, Complex beta, double gamma);

/// Largest gamma keeping the '+' post-selected mean negative for
/// psi = alpha|0> - sqrt(1 - alpha^2)|1>, 1/sqrt(2) < alpha < 1.
double negativity_gamma_bound(double alpha);

WeakValueResult estimate_analytic(Complex alpha, Complex beta, double gamma,
                                  PostSelect post = PostSelect::plus);

/// Shot-by-shot simulation: draw the meter outcome, then the final
/// conjugate-basis outcome on the exact conditional signal state, keep the
/// shot when it matches `post`. Deterministic in `seed`; the result does not
/// depend on `workers`.
WeakValueResult estimate_sampled(Complex alpha, Complex beta, double gamma, std::uint64_t shots,
                                 std::uint64_t seed, PostSelect post = PostSelect::plus,
                                 unsigned workers = 1);

const char* to_string(PostSelect p);
const char* to_string(Mode m);

void to_json(nlohmann::json& j, const WeakValueResult& r);
void to_json(nlohmann::json& j, const PostselectedMean& m);

}  // namespace qnd::weak
