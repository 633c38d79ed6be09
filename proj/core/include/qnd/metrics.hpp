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

// Figures of merit for non-demolition measurements.
//
// Every QND quality number here compares two of three outcome distributions
// taken in the eigenbasis of the measured observable:
//   p_in  signal before the device,
//   p_out signal after the device,
//   p_m   meter readout.
// F_M = F(p_in, p_m), F_QND = F(p_in, p_out), and F_QSP averages, over meter
// outcomes i, the probability that the signal output is found in |i>.
//
// Continuous-variable devices are characterised by transfer coefficients
// T_M, T_S in [0, 1]; for Gaussian inputs on the principal squeezing axes
// these map onto F_M and F_QND through sqrt(2T / (1 + T)). The conditional
// variance V_{s|m} and the product bound V_{s|m} * V_conj >= 1 need a Gaussian
// state model and are not computed here.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qnd/hilbert.hpp"

namespace qnd {

inline constexpr double kMetricTol = 1e-9;

struct InputFidelity {
  std::string label;
  double f_m = 0.0;
  double f_qnd = 0.0;
};

struct FidelityReport {
  double f_m = 0.0;  ///< headline (minimum over inputs when several)
  double f_qnd = 0.0;
  double f_qsp = 0.0;
  std::vector<InputFidelity> per_input;
};

struct DistinguishabilityPair {
  double k = 0.0;
  double k_bar = 0.0;
  double englert_lhs = 0.0;  ///< k^2 + k_bar^2
  bool saturated = false;    ///< |englert_lhs - 1| < 1e-9
};

/// Joint outcome statistics of two observables, rows indexed by the first.
struct JointDist {
  Eigen::MatrixXd q;
  std::vector<double> eig_a;
  std::vector<double> eig_b;

  /// Validates shape, nonnegativity and normalization.
  void check() const;
};

enum class CorrelationMode {
  raw,            ///< <AB>^2 / (<A^2><B^2>)
  mean_subtracted ///< same with A -> A - <A>, B -> B - <B>
};

double classical_fidelity(const ProbDist& p, const ProbDist& q);

/// Count-vector overload; both are normalized first.
double classical_fidelity_counts(std::span<const double> p_counts, std::span<const double> q_counts);

inline double measurement_fidelity(const ProbDist& p_in, const ProbDist& p_m) {
  return classical_fidelity(p_in, p_m);
}
inline double qnd_fidelity(const ProbDist& p_in, const ProbDist& p_out) {
  return classical_fidelity(p_in, p_out);
}

/// sum_i p_m[i] * conditional[i], where conditional[i] is the probability of
/// finding the signal in |i> after meter outcome i.
double qsp_fidelity(const ProbDist& p_m, std::span<const double> conditional);

/// K = 2L - 1 from the likelihood, K_bar = 2P_c - 1 from the conjugate-basis
/// success probability.
DistinguishabilityPair distinguishability(double likelihood, double p_correct);

double correlation_c2(const JointDist& joint, CorrelationMode mode = CorrelationMode::raw);

/// Qubit shortcut 2 F_QSP - 1. Values of F_QSP below 1/2 give a negative
/// result, which is returned unclamped.
double c2_from_fqsp(double f_qsp);

/// sqrt(2T / (1 + T)) for a transfer coefficient T in [0, 1].
double fm_from_tm(double t_m);
double fqnd_from_ts(double t_s);

void to_json(nlohmann::json& j, const FidelityReport& r);
void to_json(nlohmann::json& j, const DistinguishabilityPair& d);

}  // namespace qnd
