#include "mipm/kernel.hpp"

#include <cmath>

namespace mipm {

namespace {
constexpr double kInv4Pi = 1.0 / (4.0 * kPi);

// cosh(a2) - cos(a1) as 2(sinh^2(a2/2) + sin^2(a1/2)); exact and free of
// cancellation near the origin.
std::complex<double> denom(double a1, std::complex<double> a2) {
  std::complex<double> sh = std::sinh(0.5 * a2);
  double sn = std::sin(0.5 * a1);
  return 2.0 * (sh * sh + sn * sn);
}
}  // namespace

double star_norm(const StripPoint& a) {
  return std::hypot(a.a1, std::abs(a.a2));
}

double eval_green(double z1, double z2) {
  double w1 = wrap_angle(z1);
  double d = cosh_minus_cos(z2, w1);
  if (d == 0.0) throw std::domain_error("eval_green: singular point (0, 0)");
  return kInv4Pi * std::log(d);
}

std::array<double, 2> eval_kernel(double z1, double z2) {
  double w1 = wrap_angle(z1);
  double d = cosh_minus_cos(z2, w1);
  if (d == 0.0) throw std::domain_error("eval_kernel: singular point (0, 0)");
  return {-kInv4Pi * std::sinh(z2) / d, kInv4Pi * std::sin(w1) / d};
}

std::complex<double> eval_k2_complex(const StripPoint& a, int deriv_order) {
  std::complex<double> d = denom(a.a1, a.a2);
  if (d == std::complex<double>(0.0))
    throw std::domain_error("eval_k2_complex: cosh(a2) = cos(a1)");
  double s = std::sin(a.a1);
  switch (deriv_order) {
    case 0:
      return kInv4Pi * s / d;
    case 1:
      return -kInv4Pi * s * std::sinh(a.a2) / (d * d);
    case 2: {
      std::complex<double> sh = std::sinh(a.a2);
      std::complex<double> ch = std::cosh(a.a2);
      return -kInv4Pi * s * (ch * d - 2.0 * sh * sh) / (d * d * d);
    }
    default:
      throw std::invalid_argument("eval_k2_complex: deriv_order must be 0, 1 or 2");
  }
}

bool cone_membership(const StripPoint& a, double kappa) {
  double im = std::abs(a.a2.imag());
  return im < kappa * (std::abs(a.a1) + std::abs(a.a2.real())) && im < 0.5 * kPi;
}

}  // namespace mipm
