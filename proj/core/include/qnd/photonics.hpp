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

// Two-photon simulation of the heralded linear-optical QND gate.
//
// Polarisation qubits are split into spatial rails (s_H, s_V, m_H, m_V). The
// s_H and m_H rails meet on a beamsplitter of reflectivity eta; with
// eta = 1/3 and the meter prepared in sqrt(3)/2 |H> + 1/2 |V>, detecting
// exactly one photon in the meter output leaves the meter polarisation
// correlated with the signal's. Loss is a beamsplitter into an explicit dump
// mode, so every circuit stays unitary and "no photon lost" is a pattern
// constraint on the output.
//
// Mode transformations follow the creation-operator convention: a photon
// entering mode j leaves in superposition sum_k U(k, j) |k>, which is the
// Heisenberg relation b_k = sum_j U(k, j) a_j read row-wise.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qnd/hilbert.hpp"
#include "qnd/metrics.hpp"

namespace qnd::optics {

using Pattern = std::vector<int>;

class ModeLayout {
 public:
  ModeLayout() = default;
  explicit ModeLayout(std::vector<std::string> names);

  /// s_H, s_V, m_H, m_V, plus s_loss when requested.
  static ModeLayout standard(bool with_signal_dump);

  std::size_t size() const noexcept { return names_.size(); }
  std::size_t index(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

enum class ElementKind { polarizing_splitter, beamsplitter, loss, half_wave_plate };

struct Element {
  ElementKind kind;
  std::vector<std::size_t> modes;  ///< the two rails the element couples
  double parameter = 0.0;          ///< reflectivity, transmittance or angle (deg)
  CMatrix local;                   ///< 2x2 action on `modes`
};

class LinearCircuit {
 public:
  explicit LinearCircuit(std::size_t modes);

  /// Appends an element acting after everything already in the circuit.
  void append(Element e);

  std::size_t modes() const noexcept { return static_cast<std::size_t>(unitary_.rows()); }
  const CMatrix& unitary() const noexcept { return unitary_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }

 private:
  CMatrix unitary_;
  std::vector<Element> elements_;
};

/// Fixed-photon-number state: occupation pattern -> amplitude.
class FockState {
 public:
  FockState(std::size_t modes, std::map<Pattern, Complex> amps);

  /// (sum_j a_j a_j^dagger)(sum_k b_k a_k^dagger)|vac>, normalized.
  static FockState two_photon_product(const CVector& first, const CVector& second);

  std::size_t modes() const noexcept { return modes_; }
  int photon_number() const noexcept { return photons_; }
  const std::map<Pattern, Complex>& amplitudes() const noexcept { return amps_; }
  Complex amplitude(const Pattern& p) const;
  double norm2() const;

 private:
  std::size_t modes_;
  int photons_ = 0;
  std::map<Pattern, Complex> amps_;
};

struct CoincidenceResult {
  double success_prob = 0.0;
  /// (signal polarisation) x (meter polarisation), H = 0, V = 1; empty when
  /// the success probability vanishes.
  std::optional<PureState> conditional_joint;
  std::map<std::string, double> failure_breakdown;
  FockState output;
};

struct GateCharacterization {
  double success_h = 0.0;
  double success_v = 0.0;
  double f_qsp = 0.0;      ///< likelihood from post-selected eigenstate runs
  double p_correct = 0.0;  ///< post-selected D/A identification at the signal output
  DistinguishabilityPair distinguishability;
  double c2_raw = 0.0;
  double gamma_eff = 0.0;  ///< sqrt(f_qsp)
};

/// [[sqrt(eta), sqrt(1-eta)], [sqrt(1-eta), -sqrt(eta)]].
Eigen::Matrix2d bs_matrix(double eta);

/// Ratio of quantum to classical coincidence probability for one photon on
/// each input of an eta beamsplitter.
double hom_reduction(double eta);

/// sqrt(1/(1+eta)) |H> + sqrt(eta/(1+eta)) |V>.
PureState meter_prep(double eta);

/// a|H> + sqrt(1-a^2)|V>, a in [0, sqrt(3)/2].
PureState meter_prep_strength(double a);

/// Signal-to-dump transmittance used to balance the two signal rails.
inline constexpr double kSignalLossTransmittance = 1.0 / 3.0;

struct QndCircuit {
  ModeLayout layout;
  LinearCircuit circuit;
};

QndCircuit build_qnd_circuit(double eta, bool include_signal_loss);

/// Throws unless `input` carries exactly two photons.
FockState lift_two_photon(const LinearCircuit& circuit, const FockState& input);

CoincidenceResult run_gate(const PureState& signal_pol, const PureState& meter_pol, double eta,
                           bool include_signal_loss);

/// Closed-form heralding probability at eta = 1/3 with the |D'> meter.
double analytic_success(Complex alpha, Complex beta, bool include_signal_loss);

/// Heralding probability for a vertical signal and the |D(eta)> meter,
/// 2 eta / (1 + eta).
double analytic_success_vertical(double eta);

/// Post-selected figures of merit for the given meter preparation.
GateCharacterization characterize_gate(const PureState& meter_pol, double eta,
                                       bool include_signal_loss);

void to_json(nlohmann::json& j, const QndCircuit& c);
void to_json(nlohmann::json& j, const CoincidenceResult& r);
void to_json(nlohmann::json& j, const GateCharacterization& g);

}  // namespace qnd::optics
