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

#include "qnd/weakval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qnd/cnot_qnd.hpp"
#include "qnd/random.hpp"

namespace qnd::weak {

namespace {

const double kGammaMin = 1.0 / std::sqrt(2.0);
constexpr double kSingularSlack = 1e-12;

void check_amplitudes(Complex alpha, Complex beta) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-10)
    throw Error("|alpha|^2 + |beta|^2 must equal 1", "alpha");
}

double check_estimator_gamma(double gamma) {
  const cnot::MeterPrep prep(gamma);  // range check
  if (prep.gamma() <= kGammaMin + kSingularSlack)
    throw Error("estimator singular: gamma must exceed 1/sqrt(2)", "gamma");
  return prep.gamma();
}

void check_hermitian(const CMatrix& x, std::size_t dim) {
  if (x.rows() != x.cols() || static_cast<std::size_t>(x.rows()) != dim)
    throw Error("observable dimension does not match the state", "observable");
  if ((x - x.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw Error("observable is not Hermitian", "observable");
}

double mean_from_record(double p1_minus_p0, double gamma) {
  return 0.5 * (1.0 + p1_minus_p0 / (2.0 * gamma * gamma - 1.0));
}

struct Tally {
  std::uint64_t n0 = 0;
  std::uint64_t n1 = 0;
};

}  // namespace

CMatrix number_operator() {
  CMatrix n = CMatrix::Zero(2, 2);
  n(1, 1) = 1.0;
  return n;
}

double weak_value(const CMatrix& x, const PureState& psi, const PureState& phi) {
  if (psi.dims() != phi.dims()) throw Error("pre- and post-selected states differ in dims", "phi");
  check_hermitian(x, psi.dim());
  const Complex denom = phi.amps().dot(psi.amps());
  if (std::abs(denom) <= 1e-12) throw Error("undefined weak value: <phi|psi> = 0", "phi");
  const Complex num = phi.amps().dot(x * psi.amps());
  return (num / denom).real();
}

double strong_value_postselected(const CMatrix& x, const PureState& psi, const PureState& phi) {
  if (psi.dims() != phi.dims()) throw Error("pre- and post-selected states differ in dims", "phi");
  check_hermitian(x, psi.dim());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();

  double num = 0.0, den = 0.0;
  Eigen::Index i = 0;
  while (i < vals.size()) {
    Eigen::Index j = i;
    while (j + 1 < vals.size() && std::abs(vals(j + 1) - vals(i)) < 1e-12) ++j;
    const auto block = vecs.middleCols(i, j - i + 1);
    const Complex amp = phi.amps().dot(block * (block.adjoint() * psi.amps()));
    const double joint = std::norm(amp);
    num += vals(i) * joint;
    den += joint;
    i = j + 1;
  }
  if (den <= 1e-12) throw Error("post-selection probability is zero", "phi");
  return num / den;
}

PovmPair povm(double gamma) {
  const cnot::MeterPrep prep(gamma);
  const double g = prep.gamma();
  const double c = 2.0 * g * g - 1.0;
  const CMatrix id = CMatrix::Identity(2, 2);
  const CMatrix s = 2.0 * number_operator() - id;
  return {0.5 * (id - c * s), 0.5 * (id + c * s)};
}

PostselectedMean postselected_mean_n(Complex alpha, Complex beta, double gamma) {
  check_amplitudes(alpha, beta);
  const double g = check_estimator_gamma(gamma);
  const double gb = std::sqrt(1.0 - g * g);
  const double b2 = std::norm(beta);
  const double num_re = (alpha * std::conj(beta)).real();
  const double den_re = (alpha * beta).real();

  PostselectedMean out;
  out.p_plus = 0.5 * (1.0 + 4.0 * g * gb * den_re);
  out.plus_value = (b2 + 2.0 * g * gb * num_re) / (1.0 + 4.0 * g * gb * den_re);
  out.minus_value = (b2 - 2.0 * g * gb * num_re) / (1.0 - 4.0 * g * gb * den_re);

  // Direct route: outcome probabilities of the simulated joint state.
  const auto r = cnot::run(PureState::qubit(alpha, beta), cnot::MeterPrep(g));
  const auto pm = BasisSpec::pauli_x();
  std::array<std::array<double, 2>, 2> joint{};  // [final][meter]
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t k = 0; k < 2; ++k) {
      const auto v = pm.vectors().col(static_cast<Eigen::Index>(f));
      const Complex a = std::conj(v(0)) * r.joint[k] + std::conj(v(1)) * r.joint[2 + k];
      joint[f][k] = std::norm(a);
    }
  auto conditional_mean = [&](std::size_t f) {
    const double pf = joint[f][0] + joint[f][1];
    return mean_from_record((joint[f][1] - joint[f][0]) / pf, g);
  };
  out.direct_p_plus = joint[0][0] + joint[0][1];
  out.direct_plus = conditional_mean(0);
  out.direct_minus = conditional_mean(1);
  out.consistent = std::abs(out.plus_value - out.direct_plus) <= 1e-10 &&
                   std::abs(out.minus_value - out.direct_minus) <= 1e-10 &&
                   std::abs(out.p_plus - out.direct_p_plus) <= 1e-10;
  return out;
}

double negativity_gamma_bound(double alpha) {
  if (!std::isfinite(alpha) || alpha <= kGammaMin || alpha >= 1.0)
    throw Error("alpha must lie in (1/sqrt(2), 1)", "alpha");
  return std::sqrt(0.5 * (1.0 + std::sqrt(2.0 * alpha * alpha - 1.0) / alpha));
}

WeakValueResult estimate_analytic(Complex alpha, Complex beta, double gamma, PostSelect post) {
  const auto m = postselected_mean_n(alpha, beta, gamma);
  WeakValueResult r;
  r.value = post == PostSelect::plus ? m.plus_value : m.minus_value;
  r.post = post;
  r.gamma = gamma;
  r.mode = Mode::analytic;
  return r;
}

WeakValueResult estimate_sampled(Complex alpha, Complex beta, double gamma, std::uint64_t shots,
                                 std::uint64_t seed, PostSelect post, unsigned workers) {
  check_amplitudes(alpha, beta);
  const double g = check_estimator_gamma(gamma);
  if (shots == 0) throw Error("shots must be at least 1", "shots");
  workers = std::max(1u, workers);

  const auto outcome = cnot::run(PureState::qubit(alpha, beta), cnot::MeterPrep(g));
  const double p_meter0 = outcome.p_m[0];
  const auto final_basis = BasisSpec::pauli_x();
  const std::size_t wanted = post == PostSelect::plus ? 0 : 1;
  // Probability that the final measurement gives `wanted`, per meter branch.
  std::array<double, 2> p_keep{0.0, 0.0};
  for (std::size_t k = 0; k < 2; ++k)
    if (outcome.conditional[k].signal)
      p_keep[k] = born_distribution(*outcome.conditional[k].signal, final_basis, 0)[wanted];

  auto tally_range = [&](std::uint64_t begin, std::uint64_t end) {
    Tally t;
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::size_t k = rng::uniform(seed, i, 0) < p_meter0 ? 0 : 1;
      if (rng::uniform(seed, i, 1) < p_keep[k]) (k == 0 ? t.n0 : t.n1) += 1;
    }
    return t;
  };

  Tally total;
  if (workers == 1) {
    total = tally_range(0, shots);
  } else {
    std::vector<Tally> parts(workers);
    std::vector<std::thread> threads;
    const std::uint64_t chunk = (shots + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t b = std::min<std::uint64_t>(shots, w * chunk);
      const std::uint64_t e = std::min<std::uint64_t>(shots, b + chunk);
      threads.emplace_back([&, w, b, e] { parts[w] = tally_range(b, e); });
    }
    for (auto& t : threads) t.join();
    for (const auto& p : parts) {
      total.n0 += p.n0;
      total.n1 += p.n1;
    }
  }

  const std::uint64_t kept = total.n0 + total.n1;
  if (kept == 0) throw Error("empty post-selected ensemble", "shots");
  const double n = static_cast<double>(kept);
  const double record_mean = (static_cast<double>(total.n1) - static_cast<double>(total.n0)) / n;

  WeakValueResult r;
  r.value = mean_from_record(record_mean, g);
  r.post = post;
  r.gamma = g;
  r.mode = Mode::sampled;
  r.shots = shots;
  r.retained = kept;
  r.seed = seed;
  if (kept >= 2) {
    // Sample variance of the +-1 meter record.
    const double var = std::max(0.0, (1.0 - record_mean * record_mean) * n / (n - 1.0));
    r.std_error = std::sqrt(var / n) / (2.0 * (2.0 * g * g - 1.0));
  }
  return r;
}

const char* to_string(PostSelect p) { return p == PostSelect::plus ? "plus" : "minus"; }
const char* to_string(Mode m) { return m == Mode::analytic ? "analytic" : "sampled"; }

void to_json(nlohmann::json& j, const WeakValueResult& r) {
  j = nlohmann::json{{"value", r.value},
                     {"stderr", r.std_error},
                     {"shots", r.shots},
                     {"retained", r.retained},
                     {"gamma", r.gamma},
                     {"mode", to_string(r.mode)},
                     {"post", to_string(r.post)},
                     {"seed", r.seed}};
}

void to_json(nlohmann::json& j, const PostselectedMean& m) {
  j = nlohmann::json{{"plus_value", m.plus_value},       {"minus_value", m.minus_value},
                     {"p_plus", m.p_plus},               {"direct_plus", m.direct_plus},
                     {"direct_minus", m.direct_minus},   {"direct_p_plus", m.direct_p_plus},
                     {"consistent", m.consistent}};
}

}  // namespace qnd::weak
