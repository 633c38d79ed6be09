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
#include <sstream>

#include "gtest/gtest.h"
#include "oracles/dense_cnot_oracle.hpp"
#include "test_util.hpp"

using namespace qnd;
using namespace qnd::cnot;
using qnd::testing::random_gamma;
using qnd::testing::random_state;
using qnd::testing::random_unitary;

namespace {

const double kR = 1.0 / std::sqrt(2.0);

}  // namespace

TEST(MeterPrep, range_is_enforced) {
  EXPECT_NO_THROW(MeterPrep{1.0});
  EXPECT_NO_THROW(MeterPrep{kR});
  EXPECT_NO_THROW(MeterPrep{kR - 5e-13});
  EXPECT_NO_THROW(MeterPrep{1.0 + 5e-13});
  try {
    MeterPrep{0.5};
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "gamma out of range [0.7071, 1]");
    EXPECT_EQ(e.field(), "gamma");
  }
  EXPECT_THROW(MeterPrep{1.01}, Error);
  EXPECT_THROW(MeterPrep{std::nan("")}, Error);
}

TEST(MeterState, examples) {
  const auto m1 = meter_state(MeterPrep(1.0));
  EXPECT_NEAR(std::abs(m1[0] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m1[1]), 0.0, 1e-15);
  const auto mh = meter_state(MeterPrep(kR));
  EXPECT_NEAR(mh[0].real(), kR, 1e-15);
  EXPECT_NEAR(mh[1].real(), kR, 1e-15);
  const auto m8 = meter_state(MeterPrep(0.8));
  EXPECT_NEAR(m8[0].real(), 0.8, 1e-15);
  EXPECT_NEAR(m8[1].real(), 0.6, 1e-15);
  EXPECT_EQ(m8[1].imag(), 0.0);
}

TEST(Run, ideal_gate_entangles_signal_and_meter) {
  const Complex a(0.6, 0.0), b(0.0, 0.8);
  const auto r = run(PureState::qubit(a, b), MeterPrep(1.0));
  EXPECT_NEAR(std::abs(r.joint[0] - a), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(r.joint[1]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(r.joint[2]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(r.joint[3] - b), 0.0, 1e-14);
  EXPECT_NEAR(r.p_m[0], 0.36, 1e-14);
  ASSERT_TRUE(r.conditional[0].signal.has_value());
  EXPECT_NEAR(overlap(*r.conditional[0].signal, PureState::basis(2, 0)), 1.0, 1e-12);
}

TEST(Run, turned_off_meter_leaves_signal_untouched) {
  const auto psi = PureState::qubit(Complex(0.3, 0.4), Complex(std::sqrt(0.75), 0.0));
  const auto r = run(psi, MeterPrep(kR));
  const auto expect = DensityMatrix::from_pure(psi);
  EXPECT_LT((r.rho_s.entries() - expect.entries()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.p_m[0], 0.5, 1e-14);
  EXPECT_NEAR(r.p_m[1], 0.5, 1e-14);
}

TEST(Run, partial_strength_meter_distribution) {
  const auto r = run(PureState::basis(2, 0), MeterPrep(0.8));
  EXPECT_NEAR(r.p_m[0], 0.64, 1e-14);
  EXPECT_NEAR(r.p_m[1], 0.36, 1e-14);
}

TEST(Run, reduced_states_match_closed_forms) {
  // rho_s has diagonal |a|^2, |b|^2 and coherence a b* 2 g gb; rho_m has
  // populations |a|^2 g^2 + |b|^2 gb^2 and coherence g gb.
  const Complex a(0.6, 0.2), b(0.3, -std::sqrt(1.0 - 0.36 - 0.04 - 0.09));
  const double g = 0.85, gb = std::sqrt(1.0 - g * g);
  const auto r = run(PureState::qubit(a, b), MeterPrep(g));
  const auto& s = r.rho_s.entries();
  EXPECT_NEAR(std::abs(s(0, 0) - std::norm(a)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(s(0, 1) - a * std::conj(b) * 2.0 * g * gb), 0.0, 1e-12);
  const auto& m = r.rho_m.entries();
  EXPECT_NEAR(m(0, 0).real(), std::norm(a) * g * g + std::norm(b) * gb * gb, 1e-12);
  EXPECT_NEAR(std::abs(m(0, 1) - g * gb), 0.0, 1e-12);
}

TEST(Run, rejects_wrong_dimensions) {
  EXPECT_THROW(run(PureState::basis(3, 0), MeterPrep(1.0)), Error);
  EXPECT_THROW(run(PureState::basis(2, 0), MeterPrep(1.0), BasisSpec::computational(3)), Error);
}

TEST(Characterize, ideal_device) {
  const auto ens = eigen_ensemble();
  const auto c = characterize(MeterPrep(1.0), BasisSpec::computational(2), ens);
  EXPECT_NEAR(c.fidelity.f_m, 1.0, 1e-12);
  EXPECT_NEAR(c.fidelity.f_qnd, 1.0, 1e-12);
  EXPECT_NEAR(c.fidelity.f_qsp, 1.0, 1e-12);
  EXPECT_NEAR(c.c2_raw, 1.0, 1e-12);
}

TEST(Characterize, turned_off_device) {
  const auto ens = eigen_ensemble();
  const auto c = characterize(MeterPrep(kR), BasisSpec::computational(2), ens);
  EXPECT_NEAR(c.fidelity.f_m, 0.5, 1e-12);
  EXPECT_NEAR(c.fidelity.f_qnd, 1.0, 1e-12);
  EXPECT_NEAR(c.fidelity.f_qsp, 0.5, 1e-12);
  EXPECT_NEAR(c.distinguishability.k, 0.0, 1e-12);
  EXPECT_NEAR(c.distinguishability.k_bar, 1.0, 1e-12);
}

TEST(Characterize, partial_strength_conjugate_identification) {
  const auto c = characterize(MeterPrep(0.8), BasisSpec::computational(2), pauli_ensemble());
  EXPECT_NEAR(c.p_correct, 0.98, 1e-12);
  EXPECT_NEAR(c.distinguishability.k, 0.28, 1e-12);
  EXPECT_NEAR(c.distinguishability.k_bar, 0.96, 1e-12);
  EXPECT_NEAR(c.distinguishability.englert_lhs, 1.0, 1e-9);
  // Raw correlator squared versus the shortcut; both are reported.
  EXPECT_NEAR(c.c2_raw, 0.28 * 0.28, 1e-12);
  EXPECT_NEAR(c.c2_shortcut, 0.28, 1e-12);
  EXPECT_EQ(c.fidelity.per_input.size(), 6u);
  EXPECT_NEAR(c.fidelity.f_m, 0.64, 1e-12);
  EXPECT_GT(c.f_m_mean, c.fidelity.f_m);
}

TEST(Characterize, empty_ensemble_is_an_error) {
  std::vector<LabeledState> none;
  EXPECT_THROW(characterize(MeterPrep(1.0), BasisSpec::computational(2), none), Error);
}

TEST(Sweep, three_point_grid) {
  const double gs[] = {kR, 0.8, 1.0};
  const auto ens = pauli_ensemble();
  const auto rows = strength_sweep(gs, BasisSpec::computational(2), ens);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].f_m, 0.5, 1e-12);
  EXPECT_NEAR(rows[1].f_m, 0.64, 1e-12);
  EXPECT_NEAR(rows[2].f_m, 1.0, 1e-12);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.f_qnd, 1.0, 1e-12);
    EXPECT_NEAR(r.englert, 1.0, 1e-9);
  }
}

TEST(Sweep, csv_schema_and_precision) {
  const auto grid = gamma_grid(11);
  ASSERT_EQ(grid.size(), 11u);
  EXPECT_EQ(grid.front(), kR);
  EXPECT_EQ(grid.back(), 1.0);
  const auto ens = eigen_ensemble();
  const auto rows = strength_sweep(grid, BasisSpec::computational(2), ens);
  const auto csv = sweep_to_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kSweepCsvHeader);
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
  }
  EXPECT_EQ(n, 11);
  EXPECT_NE(csv.find("0.707106781187,"), std::string::npos);
}

TEST(Sweep, json_rows_carry_every_column) {
  const nlohmann::json j = SweepRow{0.8, 0.64, 1, 0.64, 0.28, 0.96, 1, 0.0784, 0.28};
  for (const char* k : {"gamma", "f_m", "f_qnd", "f_qsp", "k", "k_bar", "englert", "c2_raw", "c2_shortcut"})
    EXPECT_TRUE(j.contains(k)) << k;
}

// ---------------------------------------------------------------------------
// Properties

TEST(CnotProperties, basis_covariance) {
  for (int t = 0; t < 100; ++t) {
    const CMatrix rot = random_unitary(2);
    const auto psi = random_state({2});
    const MeterPrep prep(random_gamma());
    const auto ref = run(psi, prep);
    const auto rotated = run(PureState(Dims{2}, rot * psi.amps()), prep, BasisSpec(rot));
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(ref.p_in[i], rotated.p_in[i], 1e-10);
      EXPECT_NEAR(ref.p_out[i], rotated.p_out[i], 1e-10);
      EXPECT_NEAR(ref.p_m[i], rotated.p_m[i], 1e-10);
      EXPECT_NEAR(ref.conditional[i].p_match, rotated.conditional[i].p_match, 1e-10);
    }
  }
}

TEST(CnotProperties, populations_are_not_disturbed) {
  for (int t = 0; t < 200; ++t) {
    const auto basis = t % 2 ? BasisSpec(random_unitary(2)) : BasisSpec::computational(2);
    const auto r = run(random_state({2}), MeterPrep(random_gamma()), basis);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(r.p_in[i], r.p_out[i], 1e-10);
      EXPECT_NEAR(r.p_out[i], born_distribution(r.rho_s, basis, 0)[i], 1e-10);
    }
    EXPECT_NEAR(r.conditional[0].probability + r.conditional[1].probability, 1.0, 1e-10);
  }
}

TEST(CnotProperties, projective_limit_conditionals_match_outcome) {
  for (int t = 0; t < 100; ++t) {
    const auto basis = BasisSpec(random_unitary(2));
    const auto r = run(random_state({2}), MeterPrep(1.0), basis);
    for (std::size_t i = 0; i < 2; ++i) {
      if (!r.conditional[i].signal) continue;
      EXPECT_NEAR(overlap(*r.conditional[i].signal, basis.state(i)), 1.0, 1e-10);
      EXPECT_NEAR(r.conditional[i].p_match, 1.0, 1e-10);
    }
  }
}

TEST(CnotProperties, strength_law_on_fifty_point_grid) {
  const auto grid = gamma_grid(50);
  const auto ens = eigen_ensemble();
  for (double g : grid) {
    const auto c = characterize(MeterPrep(g), BasisSpec::computational(2), ens);
    for (const auto& in : c.fidelity.per_input) EXPECT_NEAR(in.f_m, g * g, 1e-10) << g;
    EXPECT_NEAR(c.fidelity.f_qsp, g * g, 1e-10);
    EXPECT_NEAR(c.fidelity.f_qnd, 1.0, 1e-10);
    const double gb = std::sqrt(1.0 - g * g);
    EXPECT_NEAR(c.distinguishability.k, 2 * g * g - 1, 1e-10);
    EXPECT_NEAR(c.distinguishability.k_bar, 2 * g * gb, 1e-10);
    EXPECT_NEAR(c.distinguishability.englert_lhs, 1.0, 1e-9);
  }
}

TEST(CnotProperties, sweep_f_m_nondecreasing) {
  const auto grid = gamma_grid(40);
  const auto ens = eigen_ensemble();
  const auto rows = strength_sweep(grid, BasisSpec::computational(2), ens);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].f_m, rows[i - 1].f_m - 1e-15);
}

TEST(CnotProperties, dense_oracle_equivalence) {
  for (int t = 0; t < 150; ++t) {
    const CMatrix rot = t % 3 ? random_unitary(2) : CMatrix::Identity(2, 2);
    const auto psi = random_state({2});
    const double g = random_gamma();
    const auto r = run(psi, MeterPrep(g), BasisSpec(rot));
    const auto d = oracle::distributions(psi.amps(), g, rot);
    const oracle::V4 joint = oracle::qnd_joint(psi.amps(), g, rot);
    for (int k = 0; k < 4; ++k)
      EXPECT_NEAR(std::abs(r.joint[static_cast<std::size_t>(k)] - joint(k)), 0.0, 1e-12);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(r.p_in[i], d.p_in[i], 1e-12);
      EXPECT_NEAR(r.p_out[i], d.p_out[i], 1e-12);
      EXPECT_NEAR(r.p_m[i], d.p_m[i], 1e-12);
      EXPECT_NEAR(r.conditional[i].p_match, d.p_match[i], 1e-12);
    }
  }
}

TEST(CnotProperties, meter_state_normalized_real_nonnegative) {
  for (int t = 0; t < 100; ++t) {
    const auto m = meter_state(MeterPrep(random_gamma()));
    EXPECT_NEAR(m.amps().squaredNorm(), 1.0, 1e-14);
    EXPECT_GE(m[0].real(), 0.0);
    EXPECT_GE(m[1].real(), 0.0);
    EXPECT_EQ(m[0].imag(), 0.0);
    EXPECT_EQ(m[1].imag(), 0.0);
  }
}
