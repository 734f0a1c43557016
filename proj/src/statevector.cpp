#include "qbar/statevector.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>

namespace qbar {
namespace {

// Kernels operate on the interleaved re/im doubles of the amplitude array.
// For qubit q (q0 = MSB) the pair stride is 2^(n-1-q) amplitudes, so both
// halves of each block are contiguous runs.

size_t pair_stride(int n_qubits, int qubit) {
  return size_t(1) << (n_qubits - 1 - qubit);
}

void ry_raw(double* a, size_t n2, size_t half, double c, double s) {
  const size_t h2 = half * 2, b2 = h2 * 2;
  for (size_t base = 0; base < n2; base += b2) {
    double* lo = a + base;
    double* hi = a + base + h2;
    for (size_t j = 0; j < h2; ++j) {
      const double x = lo[j], y = hi[j];
      lo[j] = c * x - s * y;
      hi[j] = s * x + c * y;
    }
  }
}

void rz_raw(double* a, size_t n2, size_t half, double c, double s) {
  // lo half: multiply by e^{-it/2} = (c, -s); hi half: e^{+it/2} = (c, +s).
  const size_t h2 = half * 2, b2 = h2 * 2;
  for (size_t base = 0; base < n2; base += b2) {
    double* lo = a + base;
    double* hi = a + base + h2;
    for (size_t j = 0; j < h2; j += 2) {
      const double re = lo[j], im = lo[j + 1];
      lo[j] = re * c + im * s;
      lo[j + 1] = im * c - re * s;
    }
    for (size_t j = 0; j < h2; j += 2) {
      const double re = hi[j], im = hi[j + 1];
      hi[j] = re * c - im * s;
      hi[j + 1] = im * c + re * s;
    }
  }
}

void cnot_raw(double* a, int n_qubits, int control, int target) {
  const size_t dim = size_t(1) << n_qubits;
  const size_t cs = pair_stride(n_qubits, control);
  const size_t ts = pair_stride(n_qubits, target);
  for (size_t b = cs; b < dim; b += 2 * cs) {  // control-bit = 1 blocks
    if (ts < cs) {
      for (size_t g = b; g < b + cs; g += 2 * ts)
        for (size_t j = g; j < g + ts; ++j) {
          std::swap(a[2 * j], a[2 * (j | ts)]);
          std::swap(a[2 * j + 1], a[2 * (j | ts) + 1]);
        }
    } else {  // control bit is below the target bit
      for (size_t j = b; j < b + cs; ++j) {
        if (j & ts) continue;
        std::swap(a[2 * j], a[2 * (j | ts)]);
        std::swap(a[2 * j + 1], a[2 * (j | ts) + 1]);
      }
    }
  }
}

double* raw(std::vector<cdouble>& amps) {
  return reinterpret_cast<double*>(amps.data());
}

void check_qubit(int n_qubits, int qubit) {
  if (qubit < 0 || qubit >= n_qubits)
    fail(ErrorCode::QubitOutOfRange,
         "qubit " + std::to_string(qubit) + " out of range for " +
             std::to_string(n_qubits) + " qubits");
}

void check_norm(const std::vector<cdouble>& amps) {
  double s = 0.0;
  for (const auto& z : amps) s += std::norm(z);
  if (std::abs(s - 1.0) > StateVector::kNormTolerance)
    fail(ErrorCode::InvalidState,
         "state norm^2 = " + std::to_string(s) + " is not 1");
}

// Ansatz gate sweep shared by run_ansatz and the adjoint gradient.
void apply_ansatz_inplace(std::vector<cdouble>& amps, int n, int layers,
                          std::span<const double> theta) {
  const size_t n2 = amps.size() * 2;
  double* a = raw(amps);
  for (int l = 0; l < layers; ++l) {
    const double* th = theta.data() + size_t(l) * 2 * n;
    for (int q = 0; q < n; ++q) {
      const double t = th[2 * q];
      ry_raw(a, n2, pair_stride(n, q), std::cos(0.5 * t), std::sin(0.5 * t));
    }
    for (int q = 0; q < n; ++q) {
      const double t = th[2 * q + 1];
      rz_raw(a, n2, pair_stride(n, q), std::cos(0.5 * t), std::sin(0.5 * t));
    }
    for (int q = 0; q + 1 < n; ++q) cnot_raw(a, n, q, q + 1);
  }
}

}  // namespace

StateVector::StateVector(int n_qubits, std::vector<cdouble> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits_ < 1 || n_qubits_ > kMaxQubits)
    fail(ErrorCode::BadLength,
         "n_qubits = " + std::to_string(n_qubits_) + " outside 1..16");
  if (amps_.size() != size_t(1) << n_qubits_)
    fail(ErrorCode::DimensionMismatch,
         "amplitude count " + std::to_string(amps_.size()) +
             " does not match 2^" + std::to_string(n_qubits_));
  check_norm(amps_);
}

StateVector StateVector::zero_state(int n_qubits) {
  return basis_state(n_qubits, 0);
}

StateVector StateVector::basis_state(int n_qubits, size_t index) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    fail(ErrorCode::BadLength, "n_qubits outside 1..16");
  std::vector<cdouble> amps(size_t(1) << n_qubits, cdouble(0.0, 0.0));
  if (index >= amps.size())
    fail(ErrorCode::DimensionMismatch, "basis index out of range");
  amps[index] = cdouble(1.0, 0.0);
  return StateVector(n_qubits, std::move(amps));
}

double StateVector::norm_sq() const {
  double s = 0.0;
  for (const auto& z : amps_) s += std::norm(z);
  return s;
}

void StateVector::ry(int qubit, double angle) {
  check_qubit(n_qubits_, qubit);
  ry_raw(raw(amps_), amps_.size() * 2, pair_stride(n_qubits_, qubit),
         std::cos(0.5 * angle), std::sin(0.5 * angle));
  check_norm(amps_);
}

void StateVector::rz(int qubit, double angle) {
  check_qubit(n_qubits_, qubit);
  rz_raw(raw(amps_), amps_.size() * 2, pair_stride(n_qubits_, qubit),
         std::cos(0.5 * angle), std::sin(0.5 * angle));
  check_norm(amps_);
}

void StateVector::cnot(int control, int target) {
  check_qubit(n_qubits_, control);
  check_qubit(n_qubits_, target);
  if (control == target)
    fail(ErrorCode::ControlEqualsTarget,
         "control and target are both " + std::to_string(control));
  cnot_raw(raw(amps_), n_qubits_, control, target);
  check_norm(amps_);
}

StateVector amplitude_encode(std::span<const double> x) {
  const size_t len = x.size();
  if (len < 2 || (len & (len - 1)) != 0)
    fail(ErrorCode::BadLength,
         "input length " + std::to_string(len) + " is not a power of two >= 2");
  int n = 0;
  while ((size_t(1) << n) < len) ++n;
  if (n > StateVector::kMaxQubits)
    fail(ErrorCode::BadLength, "input length exceeds 16 qubits");
  double nrm2 = 0.0;
  for (double v : x) nrm2 += v * v;
  const double nrm = std::sqrt(nrm2);
  if (nrm <= 1e-12)
    fail(ErrorCode::ZeroNormInput, "input vector has (near-)zero norm");
  std::vector<cdouble> amps(len);
  for (size_t i = 0; i < len; ++i) amps[i] = cdouble(x[i] / nrm, 0.0);
  return StateVector(n, std::move(amps));
}

StateVector apply_ry(const StateVector& state, int qubit, double angle) {
  StateVector out = state;
  out.ry(qubit, angle);
  return out;
}

StateVector apply_rz(const StateVector& state, int qubit, double angle) {
  StateVector out = state;
  out.rz(qubit, angle);
  return out;
}

StateVector apply_cnot(const StateVector& state, int control, int target) {
  StateVector out = state;
  out.cnot(control, target);
  return out;
}

cdouble overlap(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim())
    fail(ErrorCode::DimensionMismatch, "overlap of states with different dims");
  cdouble s(0.0, 0.0);
  const auto aa = a.amplitudes();
  const auto bb = b.amplitudes();
  for (size_t i = 0; i < aa.size(); ++i) s += std::conj(aa[i]) * bb[i];
  return s;
}

void AnsatzConfig::validate() const {
  if (n_qubits < 1 || n_qubits > StateVector::kMaxQubits)
    fail(ErrorCode::BadLength, "ansatz n_qubits outside 1..16");
  if (n_layers < 0) fail(ErrorCode::BadLength, "ansatz n_layers < 0");
}

StateVector run_ansatz(const StateVector& state_in, const AnsatzConfig& config,
                       std::span<const double> theta) {
  config.validate();
  if (state_in.n_qubits() != config.n_qubits)
    fail(ErrorCode::DimensionMismatch, "state/ansatz qubit count mismatch");
  if (theta.size() != size_t(config.parameter_count()))
    fail(ErrorCode::DimensionMismatch,
         "theta length " + std::to_string(theta.size()) + " != " +
             std::to_string(config.parameter_count()));
  StateVector out = state_in;
  apply_ansatz_inplace(out.amps_, config.n_qubits, config.n_layers, theta);
  check_norm(out.amps_);
  return out;
}

std::vector<double> grad_overlap_real(const StateVector& center,
                                      const StateVector& state_in,
                                      const AnsatzConfig& config,
                                      std::span<const double> theta,
                                      double* re_overlap_out) {
  config.validate();
  if (center.n_qubits() != config.n_qubits ||
      state_in.n_qubits() != config.n_qubits)
    fail(ErrorCode::DimensionMismatch, "state/ansatz qubit count mismatch");
  if (theta.size() != size_t(config.parameter_count()))
    fail(ErrorCode::DimensionMismatch, "theta length mismatch");

  const int n = config.n_qubits;
  const size_t n2 = state_in.dim() * 2;
  std::vector<double> grad(theta.size(), 0.0);

  // mu = U(theta)|in>, lam = |c>; sweeping backwards keeps
  //   mu  = G_k ... G_1 |in>,   <lam| = <c| G_M ... G_{k+1}
  // when gate k is about to be processed. For G = exp(-i t P / 2),
  // dG/dt = -(i/2) P G, so d f = Re <lam| (-i/2) P |mu> = (1/2) Im <lam|P|mu>.
  std::vector<cdouble> mu_v = {state_in.amps_.begin(), state_in.amps_.end()};
  apply_ansatz_inplace(mu_v, n, config.n_layers, theta);
  std::vector<cdouble> lam_v = {center.amps_.begin(), center.amps_.end()};
  if (re_overlap_out) {
    double re = 0.0;
    for (size_t i = 0; i < mu_v.size(); ++i) {
      re += lam_v[i].real() * mu_v[i].real() + lam_v[i].imag() * mu_v[i].imag();
    }
    *re_overlap_out = re;
  }
  double* mu = raw(mu_v);
  double* lam = raw(lam_v);

  for (int l = config.n_layers - 1; l >= 0; --l) {
    const double* th = theta.data() + size_t(l) * 2 * n;
    for (int q = n - 2; q >= 0; --q) {  // CNOT is self-inverse
      cnot_raw(mu, n, q, q + 1);
      cnot_raw(lam, n, q, q + 1);
    }
    for (int q = n - 1; q >= 0; --q) {  // Rz, generator Z_q
      const size_t half = pair_stride(n, q);
      const size_t h2 = half * 2, b2 = h2 * 2;
      double im = 0.0;
      for (size_t base = 0; base < n2; base += b2) {
        const double* ml = mu + base;
        const double* ll = lam + base;
        for (size_t j = 0; j < h2; j += 2) {
          // +Im conj(lam)*mu on the |0> half, - on the |1> half
          im += ll[j] * ml[j + 1] - ll[j + 1] * ml[j];
          im -= ll[h2 + j] * ml[h2 + j + 1] - ll[h2 + j + 1] * ml[h2 + j];
        }
      }
      grad[size_t(l) * 2 * n + 2 * q + 1] = 0.5 * im;
      const double t = th[2 * q + 1];
      const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
      rz_raw(mu, n2, half, c, -s);
      rz_raw(lam, n2, half, c, -s);
    }
    for (int q = n - 1; q >= 0; --q) {  // Ry, generator Y_q
      const size_t half = pair_stride(n, q);
      const size_t h2 = half * 2, b2 = h2 * 2;
      // (Y mu)_lo = -i mu_hi, (Y mu)_hi = +i mu_lo;
      // Im<lam|Y mu> = sum -Re(conj(lam_lo) mu_hi) + Re(conj(lam_hi) mu_lo)
      double acc = 0.0;
      for (size_t base = 0; base < n2; base += b2) {
        const double* ml = mu + base;
        const double* ll = lam + base;
        for (size_t j = 0; j < h2; j += 2) {
          acc -= ll[j] * ml[h2 + j] + ll[j + 1] * ml[h2 + j + 1];
          acc += ll[h2 + j] * ml[j] + ll[h2 + j + 1] * ml[j + 1];
        }
      }
      grad[size_t(l) * 2 * n + 2 * q] = 0.5 * acc;
      const double t = th[2 * q];
      const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
      ry_raw(mu, n2, half, c, -s);
      ry_raw(lam, n2, half, c, -s);
    }
  }
  return grad;
}

}  // namespace qbar
