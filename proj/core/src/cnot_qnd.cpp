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

#include "qnd/cnot_qnd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace qnd::cnot {

namespace {

constexpr double kGammaSlack = 1e-12;
const double kGammaMin = 1.0 / std::sqrt(2.0);

constexpr std::size_t kSignal = 0;
constexpr std::size_t kMeter = 1;

BasisSpec conjugate_of(const BasisSpec& basis) {
  return BasisSpec(basis.vectors() * gates::hadamard());
}

// Probability of signal outcome i together with meter outcome j.
Eigen::MatrixXd joint_outcomes(const PureState& joint, const BasisSpec& basis) {
  Eigen::MatrixXd q(2, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto v = basis.vectors().col(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < 2; ++j) {
      // <v_i, j | joint>
      const Complex a = std::conj(v(0)) * joint[j] + std::conj(v(1)) * joint[2 + j];
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::norm(a);
    }
  }
  return q;
}

}  // namespace

MeterPrep::MeterPrep(double gamma) : gamma_(gamma) {
  if (!std::isfinite(gamma) || gamma < kGammaMin - kGammaSlack || gamma > 1.0 + kGammaSlack) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "gamma out of range [%.4f, 1]", kGammaMin);
    throw Error(buf, "gamma");
  }
  gamma_ = std::clamp(gamma, kGammaMin, 1.0);
}

double MeterPrep::gamma_bar() const noexcept { return std::sqrt(std::max(0.0, 1.0 - gamma_ * gamma_)); }

PureState meter_state(const MeterPrep& prep) {
  CVector v(2);
  v << prep.gamma(), prep.gamma_bar();
  return PureState::normalized({2}, std::move(v));
}

QNDOutcome run(const PureState& signal, const MeterPrep& prep, const ObservableBasis& basis) {
  if (signal.dims() != Dims{2}) throw Error("signal must be a single qubit", "signal");
  if (basis.dim() != 2) throw Error("observable basis must be a qubit basis", "basis");

  const std::size_t sig[] = {kSignal};
  const std::size_t both[] = {kSignal, kMeter};
  const std::size_t met[] = {kMeter};

  auto joint = tensor_product(signal, meter_state(prep));
  joint = apply_unitary(basis.to_computational(), joint, sig);
  joint = apply_unitary(gates::cnot(), joint, both);
  joint = apply_unitary(basis.vectors(), joint, sig);

  const auto computational = BasisSpec::computational(2);
  auto rho_s = partial_trace(joint, sig);
  auto rho_m = partial_trace(joint, met);
  auto p_in = born_distribution(signal, basis, 0);
  auto p_out = born_distribution(rho_s, basis, 0);
  auto p_m = born_distribution(rho_m, computational, 0);

  std::vector<Branch> branches;
  for (std::size_t i = 0; i < 2; ++i) {
    Branch b;
    b.probability = p_m[i];
    if (b.probability >= kZeroBranch) {
      const auto c = conditional_collapse(joint, computational, kMeter, i);
      auto s = extract_factor(c.post, kSignal);
      b.p_match = born_distribution(s, basis, 0)[i];
      b.signal = std::move(s);
    }
    branches.push_back(std::move(b));
  }

  return QNDOutcome{std::move(joint), std::move(rho_s), std::move(rho_m), std::move(p_in),
                    std::move(p_out), std::move(p_m), std::move(branches)};
}

std::vector<LabeledState> pauli_ensemble(const ObservableBasis& basis) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  auto rel = [&](Complex a, Complex b) {
    CVector v = a * basis.vectors().col(0) + b * basis.vectors().col(1);
    return PureState::normalized({2}, std::move(v));
  };
  return {{"0", rel(1, 0)},      {"1", rel(0, 1)},       {"+", rel(r, r)},
          {"-", rel(r, -r)},     {"+i", rel(r, i * r)},  {"-i", rel(r, -i * r)}};
}

std::vector<LabeledState> eigen_ensemble(const ObservableBasis& basis) {
  return {{"0", basis.state(0)}, {"1", basis.state(1)}};
}

Characterization characterize(const MeterPrep& prep, const ObservableBasis& basis,
                              std::span<const LabeledState> ensemble) {
  if (ensemble.empty()) throw Error("characterization ensemble is empty", "ensemble");

  Characterization out;
  auto& report = out.fidelity;
  report.f_m = std::numeric_limits<double>::infinity();
  report.f_qnd = std::numeric_limits<double>::infinity();
  for (const auto& in : ensemble) {
    const auto r = run(in.state, prep, basis);
    const double fm = measurement_fidelity(r.p_in, r.p_m);
    const double fq = qnd_fidelity(r.p_in, r.p_out);
    report.per_input.push_back({in.label, fm, fq});
    report.f_m = std::min(report.f_m, fm);
    report.f_qnd = std::min(report.f_qnd, fq);
    out.f_m_mean += fm;
    out.f_qnd_mean += fq;
  }
  out.f_m_mean /= static_cast<double>(ensemble.size());
  out.f_qnd_mean /= static_cast<double>(ensemble.size());

  // Maximally mixed input as the equal mixture of the two eigenstates.
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(2, 2);
  double qsp = 0.0;
  for (std::size_t e = 0; e < 2; ++e) {
    const auto r = run(basis.state(e), prep, basis);
    double f = 0.0;
    for (std::size_t i = 0; i < 2; ++i) f += r.p_m[i] * r.conditional[i].p_match;
    qsp += 0.5 * f;
    joint += 0.5 * joint_outcomes(r.joint, basis);
  }
  report.f_qsp = qsp;

  const auto conj = conjugate_of(basis);
  double pc = 0.0;
  for (std::size_t e = 0; e < 2; ++e) {
    const auto r = run(conj.state(e), prep, basis);
    pc += 0.5 * born_distribution(r.rho_s, conj, 0)[e];
  }
  out.p_correct = pc;
  out.distinguishability = distinguishability(std::clamp(qsp, 0.0, 1.0), std::clamp(pc, 0.0, 1.0));

  out.c2_raw = correlation_c2(JointDist{joint, {1.0, -1.0}, {1.0, -1.0}}, CorrelationMode::raw);
  out.c2_shortcut = c2_from_fqsp(qsp);
  return out;
}

std::vector<double> gamma_grid(std::size_t points) {
  if (points == 0) throw Error("gamma grid needs at least one point", "points");
  if (points == 1) return {1.0};
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = kGammaMin + (1.0 - kGammaMin) * static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = 1.0;
  return g;
}

std::vector<SweepRow> strength_sweep(std::span<const double> gammas, const ObservableBasis& basis,
                                     std::span<const LabeledState> ensemble) {
  std::vector<SweepRow> rows;
  rows.reserve(gammas.size());
  for (double g : gammas) {
    const auto c = characterize(MeterPrep(g), basis, ensemble);
    rows.push_back({g, c.fidelity.f_m, c.fidelity.f_qnd, c.fidelity.f_qsp, c.distinguishability.k,
                    c.distinguishability.k_bar, c.distinguishability.englert_lhs, c.c2_raw,
                    c.c2_shortcut});
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.gamma,
                  r.f_m, r.f_qnd, r.f_qsp, r.k, r.k_bar, r.englert, r.c2_raw, r.c2_shortcut);
    out += buf;
  }
  return out;
}

void to_json(nlohmann::json& j, const SweepRow& r) {
  j = nlohmann::json{{"gamma", r.gamma}, {"f_m", r.f_m},         {"f_qnd", r.f_qnd},
                     {"f_qsp", r.f_qsp}, {"k", r.k},             {"k_bar", r.k_bar},
                     {"englert", r.englert}, {"c2_raw", r.c2_raw}, {"c2_shortcut", r.c2_shortcut}};
}

void to_json(nlohmann::json& j, const Characterization& c) {
  j = nlohmann::json{{"fidelity", c.fidelity},
                     {"f_m_mean", c.f_m_mean},
                     {"f_qnd_mean", c.f_qnd_mean},
                     {"p_correct", c.p_correct},
                     {"distinguishability", c.distinguishability},
                     {"c2_raw", c.c2_raw},
                     {"c2_shortcut", c.c2_shortcut}};
}

}  // namespace qnd::cnot
