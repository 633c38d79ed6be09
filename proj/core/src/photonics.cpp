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

#include "qnd/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qnd::optics {

namespace {

constexpr double kFockNormTol = 1e-10;
constexpr double kPruneTol = 1e-300;

const char* kind_name(ElementKind k) {
  switch (k) {
    case ElementKind::polarizing_splitter: return "pbs";
    case ElementKind::beamsplitter: return "beamsplitter";
    case ElementKind::loss: return "loss";
    case ElementKind::half_wave_plate: return "hwp";
  }
  return "?";
}

void check_unit_interval(double x, const char* field) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw Error(std::string(field) + " must lie in [0, 1]", field);
}

void check_open_eta(double eta) {
  if (!std::isfinite(eta) || eta <= 0.0 || eta >= 1.0) throw Error("eta must lie in (0, 1)", "eta");
}

// (sum_p x_p b_p^dagger)(sum_q y_q b_q^dagger)|vac>, unnormalized. Adds into `out`.
void expand_pair(const CVector& x, const CVector& y, Complex weight, std::map<Pattern, Complex>& out) {
  const auto m = static_cast<std::size_t>(x.size());
  static const double kSqrt2 = std::sqrt(2.0);
  for (std::size_t p = 0; p < m; ++p) {
    const Complex xp = x(static_cast<Eigen::Index>(p));
    if (xp == 0.0) continue;
    for (std::size_t q = 0; q < m; ++q) {
      const Complex yq = y(static_cast<Eigen::Index>(q));
      if (yq == 0.0) continue;
      Pattern pat(m, 0);
      ++pat[p];
      ++pat[q];
      // b_p^dagger b_p^dagger |vac> = sqrt(2) |2_p>.
      out[pat] += weight * xp * yq * (p == q ? kSqrt2 : 1.0);
    }
  }
}

std::vector<std::size_t> occupied_modes(const Pattern& p) {
  std::vector<std::size_t> modes;
  for (std::size_t k = 0; k < p.size(); ++k)
    for (int n = 0; n < p[k]; ++n) modes.push_back(k);
  return modes;
}

CMatrix embed(std::size_t modes, const Element& e) {
  CMatrix full = CMatrix::Identity(static_cast<Eigen::Index>(modes), static_cast<Eigen::Index>(modes));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      full(static_cast<Eigen::Index>(e.modes[r]), static_cast<Eigen::Index>(e.modes[c])) =
          e.local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return full;
}

CVector polarisation_rails(std::size_t modes, std::size_t h, std::size_t v, const PureState& pol) {
  if (pol.dims() != Dims{2}) throw Error("polarisation state must be a qubit", "polarisation");
  CVector c = CVector::Zero(static_cast<Eigen::Index>(modes));
  c(static_cast<Eigen::Index>(h)) = pol[0];
  c(static_cast<Eigen::Index>(v)) = pol[1];
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// ModeLayout

ModeLayout::ModeLayout(std::vector<std::string> names) : names_(std::move(names)) {
  auto sorted = names_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error("mode names must be unique", "modes");
}

ModeLayout ModeLayout::standard(bool with_signal_dump) {
  std::vector<std::string> n{"s_H", "s_V", "m_H", "m_V"};
  if (with_signal_dump) n.emplace_back("s_loss");
  return ModeLayout(std::move(n));
}

std::size_t ModeLayout::index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error("unknown mode '" + name + "'", "mode");
  return static_cast<std::size_t>(it - names_.begin());
}

bool ModeLayout::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

// ---------------------------------------------------------------------------
// LinearCircuit

LinearCircuit::LinearCircuit(std::size_t modes)
    : unitary_(CMatrix::Identity(static_cast<Eigen::Index>(modes), static_cast<Eigen::Index>(modes))) {
  if (modes == 0) throw Error("circuit needs at least one mode", "modes");
}

void LinearCircuit::append(Element e) {
  if (e.modes.size() != 2 || e.modes[0] == e.modes[1] || e.modes[0] >= modes() || e.modes[1] >= modes())
    throw Error("element must couple two distinct existing modes", "modes");
  if (e.local.rows() != 2 || e.local.cols() != 2 || !is_unitary(e.local))
    throw Error("element matrix must be a 2x2 unitary", "element");
  unitary_ = embed(modes(), e) * unitary_;
  elements_.push_back(std::move(e));
}

// ---------------------------------------------------------------------------
// FockState

FockState::FockState(std::size_t modes, std::map<Pattern, Complex> amps)
    : modes_(modes), amps_(std::move(amps)) {
  if (amps_.empty()) throw Error("Fock state has no amplitudes", "amps");
  bool first = true;
  for (const auto& [pat, a] : amps_) {
    if (pat.size() != modes_) throw Error("occupation pattern length differs from mode count", "amps");
    if (std::any_of(pat.begin(), pat.end(), [](int n) { return n < 0; }))
      throw Error("negative occupation number", "amps");
    const int n = std::accumulate(pat.begin(), pat.end(), 0);
    if (first) {
      photons_ = n;
      first = false;
    } else if (n != photons_) {
      throw Error("Fock state mixes photon numbers", "amps");
    }
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw Error("non-finite amplitude", "amps");
  }
  if (std::abs(norm2() - 1.0) > kFockNormTol) throw Error("Fock state is not normalized", "amps");
}

FockState FockState::two_photon_product(const CVector& first, const CVector& second) {
  if (first.size() != second.size()) throw Error("mode vectors differ in length", "modes");
  std::map<Pattern, Complex> amps;
  expand_pair(first, second, 1.0, amps);
  double n2 = 0.0;
  for (const auto& [p, a] : amps) n2 += std::norm(a);
  if (!(n2 > 0.0)) throw Error("two-photon product vanishes", "modes");
  const double s = 1.0 / std::sqrt(n2);
  for (auto& [p, a] : amps) a *= s;
  return FockState(static_cast<std::size_t>(first.size()), std::move(amps));
}

Complex FockState::amplitude(const Pattern& p) const {
  const auto it = amps_.find(p);
  return it == amps_.end() ? Complex(0.0) : it->second;
}

double FockState::norm2() const {
  double n = 0.0;
  for (const auto& [p, a] : amps_) n += std::norm(a);
  return n;
}

// ---------------------------------------------------------------------------
// Elements and circuits

Eigen::Matrix2d bs_matrix(double eta) {
  check_unit_interval(eta, "eta");
  const double r = std::sqrt(eta);
  const double t = std::sqrt(1.0 - eta);
  Eigen::Matrix2d m;
  m << r, t, t, -r;
  return m;
}

double hom_reduction(double eta) {
  check_unit_interval(eta, "eta");
  const double d = 1.0 - 2.0 * eta;
  return d * d / ((1.0 - eta) * (1.0 - eta) + eta * eta);
}

PureState meter_prep(double eta) {
  if (!std::isfinite(eta) || eta <= 0.0 || eta > 1.0) throw Error("eta must lie in (0, 1]", "eta");
  return PureState::qubit(std::sqrt(1.0 / (1.0 + eta)), std::sqrt(eta / (1.0 + eta)));
}

PureState meter_prep_strength(double a) {
  const double a_max = std::sqrt(3.0) / 2.0;
  if (!std::isfinite(a) || a < 0.0 || a > a_max + 1e-12)
    throw Error("strength a must lie in [0, sqrt(3)/2]", "strength_a");
  a = std::min(a, a_max);
  return PureState::qubit(a, std::sqrt(1.0 - a * a));
}

QndCircuit build_qnd_circuit(double eta, bool include_signal_loss) {
  check_open_eta(eta);
  auto layout = ModeLayout::standard(include_signal_loss);
  LinearCircuit circuit(layout.size());
  const auto sH = layout.index("s_H"), sV = layout.index("s_V");
  const auto mH = layout.index("m_H"), mV = layout.index("m_V");

  const CMatrix pass = CMatrix::Identity(2, 2);
  circuit.append({ElementKind::polarizing_splitter, {sH, sV}, 0.0, pass});
  circuit.append({ElementKind::polarizing_splitter, {mH, mV}, 0.0, pass});
  circuit.append({ElementKind::beamsplitter, {sH, mH}, eta, bs_matrix(eta).cast<Complex>()});
  if (include_signal_loss) {
    circuit.append({ElementKind::loss, {sV, layout.index("s_loss")}, kSignalLossTransmittance,
                    bs_matrix(kSignalLossTransmittance).cast<Complex>()});
  }
  circuit.append({ElementKind::polarizing_splitter, {sH, sV}, 0.0, pass});
  circuit.append({ElementKind::polarizing_splitter, {mH, mV}, 0.0, pass});
  // Half-wave plate at 22.5 degrees: |H> -> |D>, |V> -> |A>, and back.
  circuit.append({ElementKind::half_wave_plate, {mH, mV}, 22.5, gates::hadamard()});
  return {std::move(layout), std::move(circuit)};
}

FockState lift_two_photon(const LinearCircuit& circuit, const FockState& input) {
  if (input.photon_number() != 2)
    throw Error("two-photon lift needs exactly 2 photons, got " + std::to_string(input.photon_number()),
                "photons");
  if (input.modes() != circuit.modes()) throw Error("state and circuit mode counts differ", "modes");

  const auto& u = circuit.unitary();
  std::map<Pattern, Complex> out;
  for (const auto& [pat, amp] : input.amplitudes()) {
    const auto occ = occupied_modes(pat);
    // |n> = a_j^dagger a_k^dagger |vac> / sqrt(prod n!); only n = 2 in one mode contributes.
    const double norm = (occ[0] == occ[1]) ? 1.0 / std::sqrt(2.0) : 1.0;
    expand_pair(u.col(static_cast<Eigen::Index>(occ[0])), u.col(static_cast<Eigen::Index>(occ[1])),
                amp * norm, out);
  }
  std::erase_if(out, [](const auto& kv) { return std::norm(kv.second) < kPruneTol; });
  return FockState(circuit.modes(), std::move(out));
}

CoincidenceResult run_gate(const PureState& signal_pol, const PureState& meter_pol, double eta,
                           bool include_signal_loss) {
  const auto qnd = build_qnd_circuit(eta, include_signal_loss);
  const auto& layout = qnd.layout;
  const auto sH = layout.index("s_H"), sV = layout.index("s_V");
  const auto mH = layout.index("m_H"), mV = layout.index("m_V");

  const auto input = FockState::two_photon_product(
      polarisation_rails(layout.size(), sH, sV, signal_pol),
      polarisation_rails(layout.size(), mH, mV, meter_pol));
  auto output = lift_two_photon(qnd.circuit, input);

  std::map<std::string, double> failures{{"both_in_signal", 0.0}, {"both_in_meter", 0.0}, {"dump_occupied", 0.0}};
  CVector joint = CVector::Zero(4);
  double success = 0.0;
  for (const auto& [pat, amp] : output.amplitudes()) {
    const double p = std::norm(amp);
    const int sig = pat[sH] + pat[sV];
    const int met = pat[mH] + pat[mV];
    const int dump = 2 - sig - met;
    if (dump > 0) {
      failures["dump_occupied"] += p;
    } else if (sig == 2) {
      failures["both_in_signal"] += p;
    } else if (met == 2) {
      failures["both_in_meter"] += p;
    } else {
      success += p;
      const int s = pat[sH] == 1 ? 0 : 1;
      const int m = pat[mH] == 1 ? 0 : 1;
      joint(2 * s + m) += amp;
    }
  }

  std::optional<PureState> conditional;
  if (success >= kZeroBranch) conditional = PureState::normalized({2, 2}, joint);
  return CoincidenceResult{success, std::move(conditional), std::move(failures), std::move(output)};
}

double analytic_success(Complex alpha, Complex beta, bool include_signal_loss) {
  const double n = std::norm(alpha) + std::norm(beta);
  if (std::abs(n - 1.0) > 1e-10) throw Error("|alpha|^2 + |beta|^2 must be 1", "alpha");
  if (include_signal_loss) return 1.0 / 6.0;
  return (std::norm(alpha) + 3.0 * std::norm(beta)) / 6.0;
}

double analytic_success_vertical(double eta) {
  check_open_eta(eta);
  return 2.0 * eta / (1.0 + eta);
}

GateCharacterization characterize_gate(const PureState& meter_pol, double eta, bool include_signal_loss) {
  const double r = 1.0 / std::sqrt(2.0);
  GateCharacterization g;

  // Post-selected ensemble for a maximally mixed signal: each eigenstate
  // enters with weight proportional to its heralding probability.
  const auto run_h = run_gate(PureState::qubit(1, 0), meter_pol, eta, include_signal_loss);
  const auto run_v = run_gate(PureState::qubit(0, 1), meter_pol, eta, include_signal_loss);
  g.success_h = run_h.success_prob;
  g.success_v = run_v.success_prob;
  const double total = g.success_h + g.success_v;
  if (total < kZeroBranch) throw Error("gate never heralds success for eigenstate inputs", "meter");

  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(2, 2);
  for (const auto* run : {&run_h, &run_v}) {
    if (!run->conditional_joint) continue;
    const double w = run->success_prob / total;
    for (Eigen::Index s = 0; s < 2; ++s)
      for (Eigen::Index m = 0; m < 2; ++m) joint(s, m) += w * std::norm((*run->conditional_joint)[2 * s + m]);
  }
  g.f_qsp = joint(0, 0) + joint(1, 1);
  g.c2_raw = correlation_c2(JointDist{joint, {1.0, -1.0}, {1.0, -1.0}}, CorrelationMode::raw);
  g.gamma_eff = std::sqrt(std::max(0.0, g.f_qsp));

  const auto da = BasisSpec::pauli_x();
  const auto run_d = run_gate(PureState::qubit(r, r), meter_pol, eta, include_signal_loss);
  const auto run_a = run_gate(PureState::qubit(r, -r), meter_pol, eta, include_signal_loss);
  const double total_da = run_d.success_prob + run_a.success_prob;
  if (total_da < kZeroBranch) throw Error("gate never heralds success for diagonal inputs", "meter");
  double pc = 0.0;
  std::size_t expected = 0;
  for (const auto* run : {&run_d, &run_a}) {
    if (run->conditional_joint) {
      const std::size_t keep[] = {0};
      const auto rho_s = partial_trace(*run->conditional_joint, keep);
      pc += run->success_prob / total_da * born_distribution(rho_s, da, 0)[expected];
    }
    ++expected;
  }
  g.p_correct = pc;
  g.distinguishability = distinguishability(std::clamp(g.f_qsp, 0.0, 1.0), std::clamp(pc, 0.0, 1.0));
  return g;
}

// ---------------------------------------------------------------------------
// Serialization

void to_json(nlohmann::json& j, const QndCircuit& c) {
  auto elements = nlohmann::json::array();
  for (const auto& e : c.circuit.elements()) {
    elements.push_back({{"kind", kind_name(e.kind)},
                        {"modes", {c.layout.name(e.modes[0]), c.layout.name(e.modes[1])}},
                        {"parameter", e.parameter}});
  }
  j = nlohmann::json{{"modes", c.layout.names()}, {"elements", elements}};
}

void to_json(nlohmann::json& j, const CoincidenceResult& r) {
  j = nlohmann::json{{"success_prob", r.success_prob}, {"failure_breakdown", r.failure_breakdown}};
  if (r.conditional_joint)
    j["conditional_joint"] = *r.conditional_joint;
  else
    j["conditional_joint"] = nullptr;
}

void to_json(nlohmann::json& j, const GateCharacterization& g) {
  j = nlohmann::json{{"success_h", g.success_h},
                     {"success_v", g.success_v},
                     {"f_qsp", g.f_qsp},
                     {"p_correct", g.p_correct},
                     {"distinguishability", g.distinguishability},
                     {"c2_raw", g.c2_raw},
                     {"gamma_eff", g.gamma_eff}};
}

}  // namespace qnd::optics
