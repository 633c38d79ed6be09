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

// Dense finite-dimensional state core.
//
// Composite spaces are ordered big-endian: subsystem 0 is the leftmost tensor
// factor, so |signal>|meter> has signal = 0, meter = 1, and the flat index of
// |i>|j> is i * d_meter + j.

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qnd/error.hpp"

namespace qnd {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Dims = std::vector<std::size_t>;

inline constexpr double kNormTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-12;
inline constexpr double kZeroBranch = 1e-14;

std::size_t total_dim(const Dims& dims);

/// Normalized pure state over a product of subsystems.
class PureState {
 public:
  /// Throws if the amplitude count does not match `dims`, any amplitude is
  /// non-finite, or the norm deviates from 1 by more than 1e-12.
  PureState(Dims dims, CVector amps);

  /// Rescales `amps` to unit norm first. Throws on a zero vector.
  static PureState normalized(Dims dims, CVector amps);

  /// Single qudit basis state |index> of dimension `dim`.
  static PureState basis(std::size_t dim, std::size_t index);

  /// a|0> + b|1>, normalized.
  static PureState qubit(Complex a, Complex b);

  const Dims& dims() const noexcept { return dims_; }
  const CVector& amps() const noexcept { return amps_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  std::size_t subsystems() const noexcept { return dims_.size(); }

  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

 private:
  Dims dims_;
  CVector amps_;
};

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  DensityMatrix(Dims dims, CMatrix entries);

  static DensityMatrix from_pure(const PureState& psi);

  /// Equal-weight classical mixture of the given states (all same dims).
  static DensityMatrix mixture(std::span<const PureState> states);

  const Dims& dims() const noexcept { return dims_; }
  const CMatrix& entries() const noexcept { return entries_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }

  double purity() const;

 private:
  Dims dims_;
  CMatrix entries_;
};

/// Orthonormal measurement basis; column i is the eigenstate for outcome i.
class BasisSpec {
 public:
  explicit BasisSpec(CMatrix columns);

  static BasisSpec computational(std::size_t dim);
  /// {|+>, |->} on a qubit.
  static BasisSpec pauli_x();
  /// {|+i>, |-i>} on a qubit.
  static BasisSpec pauli_y();

  const CMatrix& vectors() const noexcept { return vectors_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors_.rows()); }
  PureState state(std::size_t outcome) const;

  /// The unitary taking this basis to the computational one (V^dagger).
  CMatrix to_computational() const { return vectors_.adjoint(); }

 private:
  CMatrix vectors_;
};

/// Probability vector over measurement outcomes. Entries in [-1e-12, 0) are
/// clamped to 0; the total must be 1 within 1e-10.
class ProbDist {
 public:
  explicit ProbDist(std::vector<double> p);

  /// Accepts raw (nonnegative) counts or unnormalized weights.
  static ProbDist from_counts(std::span<const double> counts);

  static ProbDist uniform(std::size_t n);

  std::span<const double> values() const noexcept { return p_; }
  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_.at(i); }

 private:
  std::vector<double> p_;
};

PureState tensor_product(const PureState& a, const PureState& b);

/// Reduced state on the subsystems listed in `keep` (order preserved as in
/// the parent, duplicates rejected).
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep);
DensityMatrix partial_trace(const PureState& psi, std::span<const std::size_t> keep);

/// Marginal outcome distribution of measuring `subsystem` in `basis`.
ProbDist born_distribution(const PureState& state, const BasisSpec& basis, std::size_t subsystem);
ProbDist born_distribution(const DensityMatrix& rho, const BasisSpec& basis, std::size_t subsystem);

struct Collapse {
  double probability;
  PureState post;  ///< full state (all subsystems) after projection, renormalized
};

/// Projects `subsystem` onto basis vector `outcome`. Throws a "zero-probability
/// branch" error when the outcome probability is below 1e-14.
Collapse conditional_collapse(const PureState& state, const BasisSpec& basis,
                              std::size_t subsystem, std::size_t outcome);

/// Applies U to the listed subsystems (U acts on their tensor product in the
/// listed order). U must be unitary within 1e-12.
PureState apply_unitary(const CMatrix& u, const PureState& state,
                        std::span<const std::size_t> subsystems);

/// Fully factorized state's single-subsystem factor, up to global phase.
/// Throws if the state is not a product across `subsystem`.
PureState extract_factor(const PureState& state, std::size_t subsystem);

/// |<a|b>|, requires equal dims.
double overlap(const PureState& a, const PureState& b);
bool same_up_to_phase(const PureState& a, const PureState& b, double tol = 1e-10);

bool is_unitary(const CMatrix& u, double tol = kUnitaryTol);

namespace gates {
CMatrix hadamard();
CMatrix pauli_x();
CMatrix pauli_z();
/// Control = first factor, target = second factor.
CMatrix cnot();
}  // namespace gates

void to_json(nlohmann::json& j, const PureState& s);
PureState pure_state_from_json(const nlohmann::json& j);

}  // namespace qnd
