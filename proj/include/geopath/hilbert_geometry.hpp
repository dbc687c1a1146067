#pragma once

// Real/symplectic split of the Hermitian inner product and the ray-space
// (Bloch sphere, Fubini-Study) view of finite-dimensional states.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

#include "geopath/errors.hpp"

namespace geopath {

template <typename Scalar>
class BasicComplexState {
 public:
  using Complex = std::complex<Scalar>;
  using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  explicit BasicComplexState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() < 1) throw InvalidInput("ComplexState: dimension must be >= 1");
  }

  /// Rescales to unit norm; a zero vector is rejected.
  static BasicComplexState normalized(const Vector& amplitudes) {
    const Scalar n = amplitudes.norm();
    if (!(n > Scalar(0))) throw InvalidInput("ComplexState: cannot normalize a zero vector");
    return BasicComplexState(amplitudes / n);
  }

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  Eigen::Index dimension() const noexcept { return amplitudes_.size(); }
  Scalar squared_norm() const { return amplitudes_.squaredNorm(); }

  bool is_normalized(Scalar tolerance = Scalar(1e-12)) const {
    return std::abs(squared_norm() - Scalar(1)) <= tolerance;
  }

  /// Real part u of |psi> = u + i v.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> real_part() const { return amplitudes_.real(); }
  /// Imaginary part v of |psi> = u + i v.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> imag_part() const { return amplitudes_.imag(); }

 private:
  Vector amplitudes_;
};

using ComplexState = BasicComplexState<double>;

template <typename Scalar>
struct BasicInnerProductParts {
  Scalar riemannian = 0;  ///< G(psi1, psi2)
  Scalar symplectic = 0;  ///< Omega(psi1, psi2)

  /// G - i*Omega, which equals <psi1|psi2>.
  std::complex<Scalar> reconstruct() const { return {riemannian, -symplectic}; }
};

using InnerProductParts = BasicInnerProductParts<double>;

/// Splits <psi1|psi2> (conjugate-linear in psi1) into
///   G     = (u1,u2) + (v1,v2)
///   Omega = (v1,u2) - (u1,v2)
/// using real L2 products of the real and imaginary parts only.
template <typename Scalar>
BasicInnerProductParts<Scalar> decompose_inner_product(const BasicComplexState<Scalar>& psi1,
                                                       const BasicComplexState<Scalar>& psi2) {
  if (psi1.dimension() != psi2.dimension()) {
    throw InvalidInput("decompose_inner_product: dimension mismatch");
  }
  const auto u1 = psi1.real_part();
  const auto v1 = psi1.imag_part();
  const auto u2 = psi2.real_part();
  const auto v2 = psi2.imag_part();
  return {u1.dot(u2) + v1.dot(v2), v1.dot(u2) - u1.dot(v2)};
}

/// Bloch vector of a normalized two-level state: (1,0) is the north pole and the azimuth is the
/// phase of the second amplitude relative to the first.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> bloch_project(const BasicComplexState<Scalar>& psi,
                                          Scalar tolerance = Scalar(1e-12)) {
  if (psi.dimension() != 2) throw InvalidInput("bloch_project: state must have dimension 2");
  if (!psi.is_normalized(tolerance)) throw InvalidInput("bloch_project: state must be normalized");
  const auto& a = psi.amplitudes();
  const std::complex<Scalar> coherence = std::conj(a(0)) * a(1);
  Eigen::Matrix<Scalar, 3, 1> n(Scalar(2) * coherence.real(), Scalar(2) * coherence.imag(),
                                std::norm(a(0)) - std::norm(a(1)));
  // Absorb the residual normalization error so the result is on S^2 to round-off.
  return n / n.norm();
}

/// Fubini-Study angle between the rays of psi1 and psi2, in [0, pi/2].
/// Evaluated as atan2(|orthogonal part|, |overlap|), which stays accurate near 0 where
/// arccos of the overlap loses half the digits.
template <typename Scalar>
Scalar fubini_study_distance(const BasicComplexState<Scalar>& psi1, const BasicComplexState<Scalar>& psi2) {
  if (psi1.dimension() != psi2.dimension()) {
    throw InvalidInput("fubini_study_distance: dimension mismatch");
  }
  const Scalar n1 = psi1.amplitudes().norm();
  const Scalar n2 = psi2.amplitudes().norm();
  if (!(n1 > Scalar(0)) || !(n2 > Scalar(0))) {
    throw InvalidInput("fubini_study_distance: zero vector has no ray");
  }
  const auto e1 = (psi1.amplitudes() / n1).eval();
  const auto e2 = (psi2.amplitudes() / n2).eval();
  const std::complex<Scalar> overlap = e1.dot(e2);  // Eigen's dot conjugates the left operand
  const Scalar orthogonal = (e2 - overlap * e1).norm();
  return std::atan2(orthogonal, std::abs(overlap));
}

}  // namespace geopath
