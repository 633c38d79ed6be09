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

// Variable-strength QND measurement of a qubit with a CNOT.
//
// The signal is the control, the meter the target. The meter starts in
// gamma|0> + gamma_bar|1>; gamma = 1 is a projective measurement of the
// signal's Z, gamma = 1/sqrt(2) leaves the meter uncorrelated. Measuring
// another observable conjugates the gate by the rotation taking that
// observable's eigenbasis to the computational one.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnd/hilbert.hpp"
#include "qnd/metrics.hpp"

namespace qnd::cnot {

class MeterPrep {
 public:
  /// Throws unless gamma lies in [1/sqrt(2), 1] (1e-12 slack).
  explicit MeterPrep(double gamma);

  double gamma() const noexcept { return gamma_; }
  double gamma_bar() const noexcept;

 private:
  double gamma_;
};

using ObservableBasis = BasisSpec;

struct Branch {
  double probability = 0.0;
  std::optional<PureState> signal;  ///< empty when the branch has zero probability
  double p_match = 0.0;             ///< P(signal found in |i> | meter gave i)
};

struct QNDOutcome {
  PureState joint;  ///< signal (subsystem 0) x meter (subsystem 1)
  DensityMatrix rho_s;
  DensityMatrix rho_m;
  ProbDist p_in;
  ProbDist p_out;
  ProbDist p_m;
  std::vector<Branch> conditional;  ///< indexed by meter outcome
};

struct LabeledState {
  std::string label;
  PureState state;
};

struct Characterization {
  FidelityReport fidelity;  ///< headline f_m / f_qnd are ensemble minima
  double f_m_mean = 0.0;
  double f_qnd_mean = 0.0;
  double p_correct = 0.0;  ///< conjugate-basis identification probability
  DistinguishabilityPair distinguishability;
  double c2_raw = 0.0;       ///< correlation of signal/meter outcomes, raw moments
  double c2_shortcut = 0.0;  ///< 2 F_QSP - 1
};

struct SweepRow {
  double gamma = 0.0;
  double f_m = 0.0;
  double f_qnd = 0.0;
  double f_qsp = 0.0;
  double k = 0.0;
  double k_bar = 0.0;
  double englert = 0.0;
  double c2_raw = 0.0;
  double c2_shortcut = 0.0;
};

/// gamma|0> + gamma_bar|1>.
PureState meter_state(const MeterPrep& prep);

QNDOutcome run(const PureState& signal, const MeterPrep& prep,
               const ObservableBasis& basis = BasisSpec::computational(2));

/// Eigenstates of X, Y and Z expressed relative to `basis`: the first two
/// are the basis vectors themselves.
std::vector<LabeledState> pauli_ensemble(const ObservableBasis& basis = BasisSpec::computational(2));
std::vector<LabeledState> eigen_ensemble(const ObservableBasis& basis = BasisSpec::computational(2));

/// Fidelities over `ensemble`, F_QSP and K from the maximally mixed input,
/// K_bar from injecting and reading back the conjugate-basis eigenstates.
Characterization characterize(const MeterPrep& prep, const ObservableBasis& basis,
                              std::span<const LabeledState> ensemble);

/// Evenly spaced gammas from 1/sqrt(2) to 1 inclusive.
std::vector<double> gamma_grid(std::size_t points);

/// Rows come back in the order of `gammas`.
std::vector<SweepRow> strength_sweep(std::span<const double> gammas, const ObservableBasis& basis,
                                     std::span<const LabeledState> ensemble);

inline constexpr const char* kSweepCsvHeader =
    "gamma,f_m,f_qnd,f_qsp,k,k_bar,englert,c2_raw,c2_shortcut";

/// Header plus one line per row, 12 significant digits.
std::string sweep_to_csv(std::span<const SweepRow> rows);

void to_json(nlohmann::json& j, const SweepRow& r);
void to_json(nlohmann::json& j, const Characterization& c);

}  // namespace qnd::cnot
