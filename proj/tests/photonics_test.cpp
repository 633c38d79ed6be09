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

#include <cmath>

#include "gtest/gtest.h"
#include "oracles/permanent_oracle.hpp"
#include "qnd/cnot_qnd.hpp"
#include "test_util.hpp"

using namespace qnd;
using namespace qnd::optics;
using qnd::testing::random_state;
using qnd::testing::random_unitary;
using qnd::testing::random_vector;
using qnd::testing::uniform;

namespace {

const double kThird = 1.0 / 3.0;

LinearCircuit single_splitter(double eta) {
  LinearCircuit c(2);
  c.append({ElementKind::beamsplitter, {0, 1}, eta, bs_matrix(eta).cast<Complex>()});
  return c;
}

FockState one_photon_each() { return FockState(2, {{{1, 1}, Complex(1.0)}}); }

}  // namespace

TEST(BsMatrix, examples_and_orthogonality) {
  const auto full = bs_matrix(1.0);
  EXPECT_EQ(full(0, 0), 1.0);
  EXPECT_EQ(full(0, 1), 0.0);
  EXPECT_EQ(full(1, 1), -1.0);
  const auto half = bs_matrix(0.5);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(half(0, 0), r, 1e-15);
  EXPECT_NEAR(half(1, 0), r, 1e-15);
  EXPECT_NEAR(half(1, 1), -r, 1e-15);
  const auto third = bs_matrix(kThird);
  EXPECT_NEAR(third(0, 0), std::sqrt(kThird), 1e-15);
  EXPECT_NEAR(third(0, 1), std::sqrt(2 * kThird), 1e-15);
  EXPECT_NEAR(third(1, 1), -std::sqrt(kThird), 1e-15);
  for (int i = 0; i <= 100; ++i) {
    const auto m = bs_matrix(i / 100.0);
    EXPECT_LT((m.transpose() * m - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_THROW(bs_matrix(-0.1), Error);
  EXPECT_THROW(bs_matrix(1.5), Error);
}

TEST(HomReduction, examples) {
  EXPECT_EQ(hom_reduction(0.5), 0.0);
  EXPECT_EQ(hom_reduction(0.0), 1.0);
  EXPECT_NEAR(hom_reduction(kThird), 0.2, 1e-15);
  EXPECT_THROW(hom_reduction(2.0), Error);
}

TEST(MeterPrep, examples) {
  const auto d = meter_prep(kThird);
  EXPECT_NEAR(d[0].real(), std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_NEAR(d[1].real(), 0.5, 1e-15);
  const auto off = meter_prep_strength(0.0);
  EXPECT_EQ(off[0], 0.0);
  EXPECT_EQ(off[1], 1.0);
  EXPECT_TRUE(same_up_to_phase(meter_prep_strength(std::sqrt(3.0) / 2.0), d, 1e-14));
  EXPECT_THROW(meter_prep_strength(0.9), Error);
  EXPECT_THROW(meter_prep_strength(-0.01), Error);
  EXPECT_THROW(meter_prep(0.0), Error);
}

TEST(ModeLayout, names_and_indices) {
  const auto plain = ModeLayout::standard(false);
  EXPECT_EQ(plain.size(), 4u);
  EXPECT_EQ(plain.index("m_H"), 2u);
  EXPECT_FALSE(plain.contains("s_loss"));
  const auto lossy = ModeLayout::standard(true);
  EXPECT_EQ(lossy.index("s_loss"), 4u);
  EXPECT_THROW(lossy.index("x"), Error);
  EXPECT_THROW(ModeLayout({"a", "a"}), Error);
}

TEST(BuildCircuit, untouched_rails_and_attenuation) {
  const auto plain = build_qnd_circuit(kThird, false);
  const auto& u = plain.circuit.unitary();
  ASSERT_EQ(u.rows(), 4);
  EXPECT_TRUE(is_unitary(u));
  const auto sV = plain.layout.index("s_V");
  CVector e = CVector::Zero(4);
  e(static_cast<Eigen::Index>(sV)) = 1.0;
  EXPECT_LT((u.col(static_cast<Eigen::Index>(sV)) - e).cwiseAbs().maxCoeff(), 1e-15);
  // The m_V rail meets only the wave plate.
  const auto mH = plain.layout.index("m_H"), mV = plain.layout.index("m_V");
  const CMatrix hwp = gates::hadamard();
  EXPECT_NEAR(std::abs(u(static_cast<Eigen::Index>(mH), static_cast<Eigen::Index>(mV)) - hwp(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u(static_cast<Eigen::Index>(mV), static_cast<Eigen::Index>(mV)) - hwp(1, 1)), 0.0, 1e-15);

  const auto lossy = build_qnd_circuit(kThird, true);
  EXPECT_EQ(lossy.circuit.modes(), 5u);
  EXPECT_TRUE(is_unitary(lossy.circuit.unitary()));
  const auto i = static_cast<Eigen::Index>(lossy.layout.index("s_V"));
  EXPECT_NEAR(std::abs(lossy.circuit.unitary()(i, i)), std::sqrt(kThird), 1e-15);

  EXPECT_THROW(build_qnd_circuit(0.0, false), Error);
  EXPECT_THROW(build_qnd_circuit(1.0, false), Error);
}

TEST(BuildCircuit, json_lists_modes_and_elements) {
  const nlohmann::json j = build_qnd_circuit(kThird, true);
  EXPECT_EQ(j["modes"].size(), 5u);
  EXPECT_EQ(j["modes"][4], "s_loss");
  bool has_loss = false;
  for (const auto& e : j["elements"]) has_loss |= e["kind"] == "loss";
  EXPECT_TRUE(has_loss);
}

TEST(LiftTwoPhoton, hom_null_at_balanced_splitter) {
  const auto out = lift_two_photon(single_splitter(0.5), one_photon_each());
  EXPECT_LT(std::abs(out.amplitude({1, 1})), 1e-12);
  EXPECT_NEAR(std::norm(out.amplitude({2, 0})), 0.5, 1e-14);
}

TEST(LiftTwoPhoton, coincidence_reduction_matches_closed_form) {
  for (int i = 1; i <= 20; ++i) {
    const double eta = i / 21.0;
    const auto out = lift_two_photon(single_splitter(eta), one_photon_each());
    const double classical = (1 - eta) * (1 - eta) + eta * eta;
    EXPECT_NEAR(std::norm(out.amplitude({1, 1})) / classical, hom_reduction(eta), 1e-12);
  }
}

TEST(LiftTwoPhoton, uncoupled_modes_are_unchanged) {
  LinearCircuit c(4);
  c.append({ElementKind::beamsplitter, {0, 1}, 0.3, bs_matrix(0.3).cast<Complex>()});
  const auto out = lift_two_photon(c, FockState(4, {{{0, 0, 1, 1}, Complex(1.0)}}));
  EXPECT_NEAR(std::norm(out.amplitude({0, 0, 1, 1})), 1.0, 1e-15);
}

TEST(LiftTwoPhoton, rejects_other_photon_numbers) {
  EXPECT_THROW(lift_two_photon(single_splitter(0.5), FockState(2, {{{1, 0}, Complex(1.0)}})), Error);
  EXPECT_THROW(lift_two_photon(single_splitter(0.5), FockState(2, {{{2, 1}, Complex(1.0)}})), Error);
  EXPECT_THROW(FockState(2, {{{1, 0}, Complex(0.5)}}), Error);
  EXPECT_THROW(FockState(2, {{{1, 0}, Complex(0.6)}, {{1, 1}, Complex(0.8)}}), Error);
}

TEST(RunGate, vertical_signal) {
  const auto r = run_gate(PureState::qubit(0, 1), meter_prep(kThird), kThird, false);
  EXPECT_NEAR(r.success_prob, 0.5, 1e-12);
  ASSERT_TRUE(r.conditional_joint);
  EXPECT_NEAR(std::norm((*r.conditional_joint)[3]), 1.0, 1e-12);  // |V>_s |V>_m
  EXPECT_NEAR(analytic_success_vertical(kThird), 0.5, 1e-15);
}

TEST(RunGate, horizontal_signal) {
  const auto r = run_gate(PureState::qubit(1, 0), meter_prep(kThird), kThird, false);
  EXPECT_NEAR(r.success_prob, 1.0 / 6.0, 1e-12);
  ASSERT_TRUE(r.conditional_joint);
  EXPECT_NEAR(std::norm((*r.conditional_joint)[0]), 1.0, 1e-12);  // |H>_s |H>_m
}

TEST(RunGate, superposition_and_loss) {
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(analytic_success(r, r, false), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(run_gate(PureState::qubit(r, r), meter_prep(kThird), kThird, false).success_prob, 1.0 / 3.0,
              1e-12);
  EXPECT_EQ(analytic_success(1, 0, false), 1.0 / 6.0);
  EXPECT_EQ(analytic_success(0, 1, false), 0.5);
  EXPECT_EQ(analytic_success(0, 1, true), 1.0 / 6.0);
  EXPECT_THROW(analytic_success(1, 1, false), Error);
}

TEST(RunGate, json_has_failure_breakdown) {
  const nlohmann::json j = run_gate(PureState::qubit(1, 0), meter_prep(kThird), kThird, true);
  EXPECT_TRUE(j["failure_breakdown"].contains("both_in_signal"));
  EXPECT_TRUE(j["failure_breakdown"].contains("dump_occupied"));
  EXPECT_FALSE(j["conditional_joint"].is_null());
}

TEST(CharacterizeGate, full_and_zero_strength) {
  const auto full = characterize_gate(meter_prep_strength(std::sqrt(3.0) / 2.0), kThird, true);
  EXPECT_NEAR(full.f_qsp, 1.0, 1e-10);
  EXPECT_NEAR(full.distinguishability.k, 1.0, 1e-10);
  EXPECT_NEAR(full.c2_raw, 1.0, 1e-10);
  const auto off = characterize_gate(meter_prep_strength(0.0), kThird, true);
  EXPECT_NEAR(off.f_qsp, 0.5, 1e-10);
  EXPECT_NEAR(off.c2_raw, 0.0, 1e-10);
  EXPECT_NEAR(off.distinguishability.k_bar, 1.0, 1e-10);
  EXPECT_NEAR(off.gamma_eff, 1.0 / std::sqrt(2.0), 1e-10);
}

// ---------------------------------------------------------------------------
// Properties

TEST(PhotonicsProperties, circuits_are_unitary) {
  for (int t = 0; t < 100; ++t) {
    const double eta = uniform(0.01, 0.99);
    EXPECT_TRUE(is_unitary(build_qnd_circuit(eta, t % 2 == 0).circuit.unitary()));
  }
}

TEST(PhotonicsProperties, completeness_and_analytic_agreement) {
  for (int t = 0; t < 100; ++t) {
    const auto psi = random_state({2});
    for (bool loss : {false, true}) {
      const auto r = run_gate(psi, meter_prep(kThird), kThird, loss);
      double total = r.success_prob;
      for (const auto& [k, p] : r.failure_breakdown) total += p;
      EXPECT_NEAR(total, 1.0, 1e-10);
      EXPECT_NEAR(r.output.norm2(), 1.0, 1e-10);
      EXPECT_NEAR(r.success_prob, analytic_success(psi[0], psi[1], loss), 1e-10);
    }
  }
}

TEST(PhotonicsProperties, vertical_success_law_over_eta) {
  for (int t = 0; t < 100; ++t) {
    const double eta = uniform(0.02, 0.98);
    const auto r = run_gate(PureState::qubit(0, 1), meter_prep(eta), eta, false);
    EXPECT_NEAR(r.success_prob, analytic_success_vertical(eta), 1e-10);
  }
}

TEST(PhotonicsProperties, lift_matches_permanent_oracle) {
  for (int t = 0; t < 50; ++t) {
    const std::size_t modes = 3 + static_cast<std::size_t>(t % 4);
    LinearCircuit c(modes);
    for (int k = 0; k < 8; ++k) {
      const auto a = static_cast<std::size_t>(uniform(0, static_cast<double>(modes))) % modes;
      const auto b = (a + 1 + static_cast<std::size_t>(uniform(0, static_cast<double>(modes - 1)))) % modes;
      c.append({ElementKind::beamsplitter, {a, b}, 0.0, random_unitary(2)});
    }
    const auto patterns = oracle::all_patterns(static_cast<int>(modes), 2);
    const CVector coeffs = random_vector(patterns.size()).normalized();
    std::map<Pattern, Complex> in;
    for (std::size_t i = 0; i < patterns.size(); ++i) in[patterns[i]] = coeffs(static_cast<Eigen::Index>(i));
    const FockState input(modes, in);

    const auto lifted = lift_two_photon(c, input);
    const auto expect = oracle::evolve(c.unitary(), in, 2);
    for (const auto& [pat, amp] : expect) EXPECT_NEAR(std::abs(lifted.amplitude(pat) - amp), 0.0, 1e-10);
    EXPECT_NEAR(lifted.norm2(), 1.0, 1e-10);
  }
}

TEST(PhotonicsProperties, full_strength_matches_projective_cnot) {
  const auto ideal = cnot::MeterPrep(1.0);
  for (std::size_t e = 0; e < 2; ++e) {
    const auto signal = PureState::basis(2, e);
    const auto gate = run_gate(signal, meter_prep(kThird), kThird, false);
    ASSERT_TRUE(gate.conditional_joint);
    const auto reference = cnot::run(signal, ideal).joint;
    EXPECT_NEAR(overlap(*gate.conditional_joint, reference), 1.0, 1e-10);
  }
}

TEST(PhotonicsProperties, strength_grid_saturates_englert_bound) {
  const double a_max = std::sqrt(3.0) / 2.0;
  for (int i = 0; i <= 30; ++i) {
    const double a = a_max * i / 30.0;
    const auto g = characterize_gate(meter_prep_strength(a), kThird, true);
    EXPECT_NEAR(g.distinguishability.englert_lhs, 1.0, 1e-9) << a;
    // Mode algebra of the lossy gate: H amplitude a/3, V amplitude b/sqrt(3).
    const double c = a / 3.0, d = std::sqrt(1.0 - a * a) / std::sqrt(3.0);
    EXPECT_NEAR(g.gamma_eff, (c + d) / std::sqrt(2.0 * (c * c + d * d)), 1e-10) << a;
    EXPECT_NEAR(g.success_h, g.success_v, 1e-12);
  }
}
