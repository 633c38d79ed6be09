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

#include "qnd/metrics.hpp"

#include <cmath>
#include <string>

namespace qnd {

namespace {

double transfer_to_fidelity(double t, const char* field) {
  if (!std::isfinite(t) || t < 0.0) throw Error("transfer coefficient must be >= 0", field);
  if (t > 1.0) throw Error("transfer coefficient must be <= 1", field);
  return std::sqrt(2.0 * t / (1.0 + t));
}

}  // namespace

void JointDist::check() const {
  if (q.rows() == 0 || q.cols() == 0) throw Error("empty joint distribution", "joint");
  if (static_cast<std::size_t>(q.rows()) != eig_a.size() ||
      static_cast<std::size_t>(q.cols()) != eig_b.size())
    throw Error("eigenvalue lists do not match joint distribution shape", "joint");
  if (q.minCoeff() < -1e-12) throw Error("negative joint probability", "joint");
  if (std::abs(q.sum() - 1.0) > 1e-10) throw Error("joint distribution does not sum to 1", "joint");
}

double classical_fidelity(const ProbDist& p, const ProbDist& q) {
  if (p.size() != q.size())
    throw Error("distribution lengths differ (" + std::to_string(p.size()) + " vs " +
                    std::to_string(q.size()) + ")",
                "q");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::sqrt(p[i] * q[i]);
  return s * s;
}

double classical_fidelity_counts(std::span<const double> p_counts, std::span<const double> q_counts) {
  return classical_fidelity(ProbDist::from_counts(p_counts), ProbDist::from_counts(q_counts));
}

double qsp_fidelity(const ProbDist& p_m, std::span<const double> conditional) {
  if (conditional.size() != p_m.size())
    throw Error("need one conditional probability per meter outcome", "conditional");
  double f = 0.0;
  for (std::size_t i = 0; i < p_m.size(); ++i) {
    const double c = conditional[i];
    if (!std::isfinite(c) || c < -1e-12 || c > 1.0 + 1e-12)
      throw Error("conditional probability outside [0, 1]", "conditional");
    f += p_m[i] * c;
  }
  return f;
}

DistinguishabilityPair distinguishability(double likelihood, double p_correct) {
  auto in_unit = [](double x) { return std::isfinite(x) && x >= -1e-12 && x <= 1.0 + 1e-12; };
  if (!in_unit(likelihood)) throw Error("likelihood must lie in [0, 1]", "likelihood");
  if (!in_unit(p_correct)) throw Error("P_c must lie in [0, 1]", "p_correct");
  DistinguishabilityPair d;
  d.k = 2.0 * likelihood - 1.0;
  d.k_bar = 2.0 * p_correct - 1.0;
  d.englert_lhs = d.k * d.k + d.k_bar * d.k_bar;
  d.saturated = std::abs(d.englert_lhs - 1.0) < kMetricTol;
  return d;
}

double correlation_c2(const JointDist& joint, CorrelationMode mode) {
  joint.check();
  double mean_a = 0.0, mean_b = 0.0;
  for (Eigen::Index i = 0; i < joint.q.rows(); ++i)
    for (Eigen::Index j = 0; j < joint.q.cols(); ++j) {
      mean_a += joint.q(i, j) * joint.eig_a[static_cast<std::size_t>(i)];
      mean_b += joint.q(i, j) * joint.eig_b[static_cast<std::size_t>(j)];
    }
  if (mode == CorrelationMode::raw) mean_a = mean_b = 0.0;

  // Commuting observables on distinct systems: the symmetrized correlator
  // (<AB> + <BA>)/2 reduces to the classical expectation of a*b.
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (Eigen::Index i = 0; i < joint.q.rows(); ++i)
    for (Eigen::Index j = 0; j < joint.q.cols(); ++j) {
      const double a = joint.eig_a[static_cast<std::size_t>(i)] - mean_a;
      const double b = joint.eig_b[static_cast<std::size_t>(j)] - mean_b;
      ab += joint.q(i, j) * a * b;
      aa += joint.q(i, j) * a * a;
      bb += joint.q(i, j) * b * b;
    }
  const double denom = aa * bb;
  if (denom < 1e-15) throw Error("degenerate observable: zero second moment", "joint");
  return ab * ab / denom;
}

double c2_from_fqsp(double f_qsp) { return 2.0 * f_qsp - 1.0; }

double fm_from_tm(double t_m) { return transfer_to_fidelity(t_m, "t_m"); }
double fqnd_from_ts(double t_s) { return transfer_to_fidelity(t_s, "t_s"); }

void to_json(nlohmann::json& j, const FidelityReport& r) {
  auto per = nlohmann::json::array();
  for (const auto& p : r.per_input)
    per.push_back({{"input", p.label}, {"f_m", p.f_m}, {"f_qnd", p.f_qnd}});
  j = nlohmann::json{{"f_m", r.f_m}, {"f_qnd", r.f_qnd}, {"f_qsp", r.f_qsp}, {"per_input", per}};
}

void to_json(nlohmann::json& j, const DistinguishabilityPair& d) {
  j = nlohmann::json{{"k", d.k},
                     {"k_bar", d.k_bar},
                     {"englert_lhs", d.englert_lhs},
                     {"saturated", d.saturated}};
}

}  // namespace qnd
