#pragma once

// U(Q, phi) = +/- V(Q) |phi|^{p+1} / (p+1), or zero.

#include <cmath>
#include <sstream>
#include <string>

#include "uclab/error.hpp"
#include "uclab/weights.hpp"

namespace uclab {

struct USample {
  double U = 0.0;     // U(Q, phi)
  double Udot = 0.0;  // d U / d phi
  double SU = 0.0;    // grad f . grad_Q U at fixed phi
};

class NonlinearityU {
 public:
  NonlinearityU() = default;

  static NonlinearityU zero() { return {}; }

  static NonlinearityU power(int sign, double p, Potential V) {
    require(sign == 1 || sign == -1, ErrorCode::invalid_input, "sign must be +1 or -1");
    require(p >= 1.0, ErrorCode::invalid_input, "power nonlinearity needs p >= 1");
    NonlinearityU u;
    u.power_ = true;
    u.sign_ = sign;
    u.p_ = p;
    u.V_ = std::move(V);
    return u;
  }

  bool is_zero() const { return !power_; }
  int sign() const { return sign_; }
  double p() const { return p_; }
  const Potential& potential() const { return V_; }
  bool linear() const { return !power_ || p_ == 1.0; }

  std::string name() const {
    if (!power_) return "Zero";
    std::ostringstream os;
    os << "Power(" << (sign_ > 0 ? '+' : '-') << "," << p_ << "," << V_.name() << ")";
    return os.str();
  }

  USample at(double u, double v, double phi) const {
    if (!power_) return {};
    const PotentialSample ps = V_.at(u, v);
    if (!(ps.V > 0.0)) {
      std::ostringstream os;
      os << "V = " << ps.V << " at (u, v) = (" << u << ", " << v << ")";
      throw Error(ErrorCode::invalid_potential, os.str());
    }
    const double a = std::abs(phi);
    const double ap = p_ == 1.0 ? a * a : std::pow(a, p_ + 1.0);
    const double s = static_cast<double>(sign_);
    USample out;
    out.U = s * ps.V * ap / (p_ + 1.0);
    out.Udot = s * ps.V * (p_ == 1.0 ? phi : std::pow(a, p_ - 1.0) * phi);
    out.SU = s * 0.5 * ps.V * ps.D * ap / (p_ + 1.0);
    return out;
  }

  /// Mode-reduction is exact only for linear U or the spherically symmetric mode.
  void require_mode(int ell) const {
    if (!linear() && ell != 0) {
      std::ostringstream os;
      os << "power p = " << p_ << " mixes angular modes; ell = " << ell << " is not closed";
      throw Error(ErrorCode::mode_not_supported, os.str());
    }
  }

 private:
  bool power_ = false;
  int sign_ = 1;
  double p_ = 1.0;
  Potential V_;
};

}  // namespace uclab
