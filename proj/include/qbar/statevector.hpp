#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qbar/error.hpp"

namespace qbar {

using cdouble = std::complex<double>;

/// Dense n-qubit pure state. Qubit 0 is the most significant bit of the basis
/// index, so basis index i corresponds to the bitstring b_0 b_1 ... b_{n-1}
/// with b_0 = qubit 0. All gates preserve the unit norm; the constructor and
/// every public gate verify it to 1e-10.
class StateVector {
 public:
  static constexpr int kMaxQubits = 16;
  static constexpr double kNormTolerance = 1e-10;

  StateVector(int n_qubits, std::vector<cdouble> amplitudes);

  static StateVector zero_state(int n_qubits);
  static StateVector basis_state(int n_qubits, size_t index);

  int n_qubits() const { return n_qubits_; }
  size_t dim() const { return amps_.size(); }
  std::span<const cdouble> amplitudes() const { return amps_; }
  cdouble amplitude(size_t i) const { return amps_[i]; }

  double norm_sq() const;

  // In-place gates. Ry(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]],
  // Rz(t) = diag(e^{-it/2}, e^{+it/2}).
  void ry(int qubit, double angle);
  void rz(int qubit, double angle);
  void cnot(int control, int target);

 private:
  friend StateVector run_ansatz(const StateVector&, const struct AnsatzConfig&,
                                std::span<const double>);
  friend std::vector<double> grad_overlap_real(const StateVector&,
                                               const StateVector&,
                                               const struct AnsatzConfig&,
                                               std::span<const double>,
                                               double*);

  int n_qubits_;
  std::vector<cdouble> amps_;
};

/// Loads a normalized real vector into the amplitudes of an n-qubit state,
/// n = log2(len). Errors: BadLength if len is not a power of two (or out of
/// the 1..16 qubit range), ZeroNormInput if ||x|| <= 1e-12.
StateVector amplitude_encode(std::span<const double> x);

StateVector apply_ry(const StateVector& state, int qubit, double angle);
StateVector apply_rz(const StateVector& state, int qubit, double angle);
StateVector apply_cnot(const StateVector& state, int control, int target);

/// <a|b> = sum_i conj(a_i) * b_i.
cdouble overlap(const StateVector& a, const StateVector& b);

/// Hardware-efficient ansatz: per layer, Ry on every qubit, then Rz on every
/// qubit, then the linear CNOT chain (control q -> target q+1, q = 0..n-2).
/// Parameter layout: theta[layer*2n + 2*qubit + rot], rot 0 = Ry, 1 = Rz.
struct AnsatzConfig {
  int n_qubits = 12;
  int n_layers = 10;

  bool operator==(const AnsatzConfig&) const = default;

  int parameter_count() const { return n_qubits * 2 * n_layers; }
  void validate() const;
};

using ParamVector = std::vector<double>;

StateVector run_ansatz(const StateVector& state_in, const AnsatzConfig& config,
                       std::span<const double> theta);

/// d/d theta_k of Re<center|U(theta)|state_in> for every k, computed by an
/// adjoint sweep: one forward pass, then one backward pass that un-applies
/// each gate from both the evolving ket and the back-propagated bra while
/// inserting the gate generator. O(parameter_count * 2^n) total.
/// When re_overlap_out is non-null it receives Re<center|U(theta)|state_in>
/// from the forward pass (the loss needs it anyway).
std::vector<double> grad_overlap_real(const StateVector& center,
                                      const StateVector& state_in,
                                      const AnsatzConfig& config,
                                      std::span<const double> theta,
                                      double* re_overlap_out = nullptr);

}  // namespace qbar
