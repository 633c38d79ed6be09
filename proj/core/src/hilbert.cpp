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

#include "qnd/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace qnd {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kProbSumTol = 1e-10;
constexpr double kEigenFloor = -1e-10;

std::vector<std::size_t> strides_of(const Dims& dims) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
  return strides;
}

void check_subsystem_list(const Dims& dims, std::span<const std::size_t> subs) {
  std::vector<bool> seen(dims.size(), false);
  for (auto s : subs) {
    if (s >= dims.size())
      throw Error("subsystem index " + std::to_string(s) + " out of range (have " +
                      std::to_string(dims.size()) + ")",
                  "subsystem");
    if (seen[s]) throw Error("duplicate subsystem index " + std::to_string(s), "subsystem");
    seen[s] = true;
  }
}

bool all_finite(const CVector& v) {
  return std::all_of(v.data(), v.data() + v.size(),
                     [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

// Splits every flat index into (index within `subs`, index within the rest).
struct Split {
  std::vector<std::size_t> inner;
  std::vector<std::size_t> outer;
  std::size_t inner_dim = 1;
  std::size_t outer_dim = 1;
};

Split split_indices(const Dims& dims, std::span<const std::size_t> subs) {
  const auto strides = strides_of(dims);
  const std::size_t n = total_dim(dims);
  std::vector<bool> in_sub(dims.size(), false);
  for (auto s : subs) in_sub[s] = true;

  Split out;
  out.inner.resize(n);
  out.outer.resize(n);
  for (auto s : subs) out.inner_dim *= dims[s];
  out.outer_dim = n / out.inner_dim;

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t inner = 0;
    for (auto s : subs) inner = inner * dims[s] + (i / strides[s]) % dims[s];
    std::size_t outer = 0;
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (!in_sub[k]) outer = outer * dims[k] + (i / strides[k]) % dims[k];
    out.inner[i] = inner;
    out.outer[i] = outer;
  }
  return out;
}

}  // namespace

std::size_t total_dim(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(Dims dims, CVector amps) : dims_(std::move(dims)), amps_(std::move(amps)) {
  if (dims_.empty()) throw Error("state needs at least one subsystem", "dims");
  if (std::any_of(dims_.begin(), dims_.end(), [](std::size_t d) { return d == 0; }))
    throw Error("subsystem dimension must be positive", "dims");
  if (static_cast<std::size_t>(amps_.size()) != total_dim(dims_))
    throw Error("amplitude count " + std::to_string(amps_.size()) +
                    " does not match product of dims " + std::to_string(total_dim(dims_)),
                "amps");
  if (!all_finite(amps_)) throw Error("non-finite amplitude", "amps");
  const double norm2 = amps_.squaredNorm();
  if (std::abs(norm2 - 1.0) > kNormTol)
    throw Error("state is not normalized (norm^2 = " + std::to_string(norm2) + ")", "amps");
}

PureState PureState::normalized(Dims dims, CVector amps) {
  const double n = amps.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("cannot normalize a zero vector", "amps");
  amps /= n;
  return PureState(std::move(dims), std::move(amps));
}

PureState PureState::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw Error("basis index out of range", "index");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState({dim}, std::move(v));
}

PureState PureState::qubit(Complex a, Complex b) {
  CVector v(2);
  v << a, b;
  return normalized({2}, std::move(v));
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Dims dims, CMatrix entries)
    : dims_(std::move(dims)), entries_(std::move(entries)) {
  const auto n = static_cast<Eigen::Index>(total_dim(dims_));
  if (entries_.rows() != n || entries_.cols() != n)
    throw Error("density matrix shape does not match dims", "entries");
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > kTraceTol)
    throw Error("density matrix is not Hermitian", "entries");
  const double tr = entries_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol)
    throw Error("density matrix trace " + std::to_string(tr) + " != 1", "entries");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(entries_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigenFloor)
    throw Error("density matrix has a negative eigenvalue", "entries");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  CMatrix m = psi.amps() * psi.amps().adjoint();
  return DensityMatrix(psi.dims(), std::move(m));
}

DensityMatrix DensityMatrix::mixture(std::span<const PureState> states) {
  if (states.empty()) throw Error("empty mixture", "states");
  const auto& dims = states.front().dims();
  CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(states.front().dim()),
                              static_cast<Eigen::Index>(states.front().dim()));
  for (const auto& s : states) {
    if (s.dims() != dims) throw Error("mixture components have different dims", "states");
    acc += s.amps() * s.amps().adjoint();
  }
  acc /= static_cast<double>(states.size());
  return DensityMatrix(dims, std::move(acc));
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

// ---------------------------------------------------------------------------
// BasisSpec

BasisSpec::BasisSpec(CMatrix columns) : vectors_(std::move(columns)) {
  if (vectors_.rows() == 0 || vectors_.rows() != vectors_.cols())
    throw Error("basis must be a square, nonempty matrix", "basis");
  if (!is_unitary(vectors_)) throw Error("basis vectors are not orthonormal", "basis");
}

BasisSpec BasisSpec::computational(std::size_t dim) {
  return BasisSpec(CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

BasisSpec BasisSpec::pauli_x() { return BasisSpec(gates::hadamard()); }

BasisSpec BasisSpec::pauli_y() {
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix m(2, 2);
  m << r, r, Complex(0, r), Complex(0, -r);
  return BasisSpec(std::move(m));
}

PureState BasisSpec::state(std::size_t outcome) const {
  if (outcome >= dim()) throw Error("outcome index out of range", "outcome");
  return PureState::normalized({dim()}, vectors_.col(static_cast<Eigen::Index>(outcome)));
}

// ---------------------------------------------------------------------------
// ProbDist

ProbDist::ProbDist(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw Error("empty probability distribution", "p");
  double sum = 0.0;
  for (auto& x : p_) {
    if (!std::isfinite(x)) throw Error("non-finite probability", "p");
    if (x < -kProbClamp) throw Error("negative probability " + std::to_string(x), "p");
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (std::abs(sum - 1.0) > kProbSumTol)
    throw Error("probabilities sum to " + std::to_string(sum) + ", not 1", "p");
}

ProbDist ProbDist::from_counts(std::span<const double> counts) {
  if (counts.empty()) throw Error("empty count vector", "counts");
  double total = 0.0;
  for (double c : counts) {
    if (!std::isfinite(c) || c < 0.0) throw Error("counts must be finite and nonnegative", "counts");
    total += c;
  }
  if (!(total > 0.0)) throw Error("counts sum to zero", "counts");
  std::vector<double> p(counts.begin(), counts.end());
  for (auto& x : p) x /= total;
  return ProbDist(std::move(p));
}

ProbDist ProbDist::uniform(std::size_t n) {
  if (n == 0) throw Error("empty probability distribution", "p");
  return ProbDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// Operations

PureState tensor_product(const PureState& a, const PureState& b) {
  CVector out(a.amps().size() * b.amps().size());
  for (Eigen::Index i = 0; i < a.amps().size(); ++i)
    out.segment(i * b.amps().size(), b.amps().size()) = a.amps()(i) * b.amps();
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  // Product of two unit vectors; renormalize to absorb rounding.
  return PureState::normalized(std::move(dims), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  check_subsystem_list(rho.dims(), keep);
  if (keep.empty()) throw Error("partial trace must keep at least one subsystem", "keep");
  const auto split = split_indices(rho.dims(), keep);
  const std::size_t n = rho.dim();

  std::vector<std::vector<std::size_t>> groups(split.outer_dim);
  for (std::size_t i = 0; i < n; ++i) groups[split.outer[i]].push_back(i);

  const auto k = static_cast<Eigen::Index>(split.inner_dim);
  CMatrix out = CMatrix::Zero(k, k);
  const auto& m = rho.entries();
  for (const auto& g : groups)
    for (auto i : g)
      for (auto j : g)
        out(static_cast<Eigen::Index>(split.inner[i]), static_cast<Eigen::Index>(split.inner[j])) +=
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  out = 0.5 * (out + out.adjoint()).eval();
  Dims dims;
  for (auto s : keep) dims.push_back(rho.dims()[s]);
  return DensityMatrix(std::move(dims), std::move(out));
}

DensityMatrix partial_trace(const PureState& psi, std::span<const std::size_t> keep) {
  return partial_trace(DensityMatrix::from_pure(psi), keep);
}

ProbDist born_distribution(const DensityMatrix& rho, const BasisSpec& basis, std::size_t subsystem) {
  if (subsystem >= rho.dims().size()) throw Error("subsystem index out of range", "subsystem");
  if (basis.dim() != rho.dims()[subsystem])
    throw Error("basis dimension " + std::to_string(basis.dim()) +
                    " does not match subsystem dimension " + std::to_string(rho.dims()[subsystem]),
                "basis");
  const std::size_t keep[] = {subsystem};
  const auto reduced = rho.dims().size() == 1 ? rho : partial_trace(rho, keep);
  std::vector<double> p(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const auto v = basis.vectors().col(static_cast<Eigen::Index>(i));
    p[i] = (v.adjoint() * reduced.entries() * v)(0, 0).real();
  }
  return ProbDist(std::move(p));
}

ProbDist born_distribution(const PureState& state, const BasisSpec& basis, std::size_t subsystem) {
  return born_distribution(DensityMatrix::from_pure(state), basis, subsystem);
}

Collapse conditional_collapse(const PureState& state, const BasisSpec& basis,
                              std::size_t subsystem, std::size_t outcome) {
  if (subsystem >= state.subsystems()) throw Error("subsystem index out of range", "subsystem");
  if (basis.dim() != state.dims()[subsystem])
    throw Error("basis dimension does not match subsystem dimension", "basis");
  if (outcome >= basis.dim()) throw Error("outcome index out of range", "outcome");

  const auto v = basis.vectors().col(static_cast<Eigen::Index>(outcome));
  CMatrix projector = v * v.adjoint();
  const std::size_t subs[] = {subsystem};
  // The projector is not unitary; apply it through the same index map.
  const auto split = split_indices(state.dims(), subs);
  const std::size_t d = basis.dim();
  std::vector<std::size_t> lookup(split.outer_dim * d);
  for (std::size_t i = 0; i < state.dim(); ++i) lookup[split.outer[i] * d + split.inner[i]] = i;

  CVector projected = CVector::Zero(state.amps().size());
  for (std::size_t i = 0; i < state.dim(); ++i) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < d; ++t)
      acc += projector(static_cast<Eigen::Index>(split.inner[i]), static_cast<Eigen::Index>(t)) *
             state[lookup[split.outer[i] * d + t]];
    projected(static_cast<Eigen::Index>(i)) = acc;
  }
  const double prob = projected.squaredNorm();
  if (prob < kZeroBranch)
    throw Error("zero-probability branch: outcome " + std::to_string(outcome) + " has probability " +
                    std::to_string(prob),
                "outcome");
  return {prob, PureState::normalized(state.dims(), std::move(projected))};
}

PureState apply_unitary(const CMatrix& u, const PureState& state,
                        std::span<const std::size_t> subsystems) {
  check_subsystem_list(state.dims(), subsystems);
  if (subsystems.empty()) throw Error("no target subsystems", "subsystems");
  const auto split = split_indices(state.dims(), subsystems);
  if (u.rows() != u.cols() || static_cast<std::size_t>(u.rows()) != split.inner_dim)
    throw Error("unitary dimension does not match target subsystems", "unitary");
  if (!is_unitary(u)) throw Error("matrix is not unitary", "unitary");

  const std::size_t d = split.inner_dim;
  std::vector<std::size_t> lookup(split.outer_dim * d);
  for (std::size_t i = 0; i < state.dim(); ++i) lookup[split.outer[i] * d + split.inner[i]] = i;

  CVector out(state.amps().size());
  for (std::size_t i = 0; i < state.dim(); ++i) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < d; ++t)
      acc += u(static_cast<Eigen::Index>(split.inner[i]), static_cast<Eigen::Index>(t)) *
             state[lookup[split.outer[i] * d + t]];
    out(static_cast<Eigen::Index>(i)) = acc;
  }
  return PureState(state.dims(), std::move(out));
}

PureState extract_factor(const PureState& state, std::size_t subsystem) {
  const std::size_t keep[] = {subsystem};
  const auto rho = partial_trace(state, keep);
  if (std::abs(rho.purity() - 1.0) > 1e-10)
    throw Error("state is entangled across subsystem " + std::to_string(subsystem), "state");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.entries());
  CVector v = es.eigenvectors().col(es.eigenvectors().cols() - 1);
  // Fix the phase so the largest component is real and positive.
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  v *= std::polar(1.0, -std::arg(v(arg)));
  return PureState::normalized({rho.dim()}, std::move(v));
}

double overlap(const PureState& a, const PureState& b) {
  if (a.dims() != b.dims()) throw Error("overlap of states with different dims", "state");
  return std::abs(a.amps().dot(b.amps()));
}

bool same_up_to_phase(const PureState& a, const PureState& b, double tol) {
  return a.dims() == b.dims() && std::abs(overlap(a, b) - 1.0) < tol;
}

bool is_unitary(const CMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const CMatrix prod = u.adjoint() * u;
  return (prod - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

namespace gates {

CMatrix hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix h(2, 2);
  h << r, r, r, -r;
  return h;
}

CMatrix pauli_x() {
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

CMatrix pauli_z() {
  CMatrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

CMatrix cnot() {
  CMatrix c = CMatrix::Zero(4, 4);
  c(0, 0) = 1;
  c(1, 1) = 1;
  c(2, 3) = 1;
  c(3, 2) = 1;
  return c;
}

}  // namespace gates

void to_json(nlohmann::json& j, const PureState& s) {
  std::vector<double> re, im;
  for (Eigen::Index i = 0; i < s.amps().size(); ++i) {
    re.push_back(s.amps()(i).real());
    im.push_back(s.amps()(i).imag());
  }
  j = nlohmann::json{{"dims", s.dims()}, {"re", re}, {"im", im}};
}

PureState pure_state_from_json(const nlohmann::json& j) {
  const auto dims = j.at("dims").get<Dims>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != im.size()) throw Error("re/im length mismatch", "im");
  CVector v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
  return PureState(dims, std::move(v));
}

}  // namespace qnd
