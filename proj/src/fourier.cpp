#include "mipm/fourier.hpp"

#include <cmath>
#include <stdexcept>

#include "mipm/util.hpp"

namespace mipm {

namespace {

// i^d for d >= 0
cd ipow(int d) {
  switch (d & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

double TrigSeries::eval(double x, int deriv) const {
  if (c.empty() && nyq == 0.0) return 0.0;
  cd eix(std::cos(x), std::sin(x));
  cd ek = eix;
  cd acc = 0.0;
  for (int k = 1; k <= kmax(); ++k) {
    double kd = 1.0;
    for (int d = 0; d < deriv; ++d) kd *= k;
    acc += (kd * ipow(deriv)) * c[k] * ek;
    ek *= eix;
  }
  double val = 2.0 * acc.real();
  if (deriv == 0 && !c.empty()) val += c[0].real();
  if (nyq != 0.0) {
    int n = kmax() + 1;
    double nd = 1.0;
    for (int d = 0; d < deriv; ++d) nd *= n;
    val += nyq * nd * (ipow(deriv) * cd(std::cos(n * x), std::sin(n * x))).real();
  }
  return val;
}

cd TrigSeries::eval_complex(cd x, int deriv) const {
  if (c.empty() && nyq == 0.0) return 0.0;
  // Positive and negative modes extend differently off the real axis.
  cd eix = std::exp(cd(0.0, 1.0) * x);
  cd emx = std::exp(cd(0.0, -1.0) * x);
  cd ep = eix, em = emx;
  cd acc = 0.0;
  for (int k = 1; k <= kmax(); ++k) {
    double kd = 1.0;
    for (int d = 0; d < deriv; ++d) kd *= k;
    acc += kd * ipow(deriv) * c[k] * ep + kd * std::conj(ipow(deriv)) * std::conj(c[k]) * em;
    ep *= eix;
    em *= emx;
  }
  if (deriv == 0 && !c.empty()) acc += c[0].real();
  if (nyq != 0.0) {
    int n = kmax() + 1;
    double nd = 1.0;
    for (int d = 0; d < deriv; ++d) nd *= n;
    cd epn = std::exp(cd(0.0, 1.0) * (double(n) * x));
    cd emn = std::exp(cd(0.0, -1.0) * (double(n) * x));
    acc += 0.5 * nyq * nd * (ipow(deriv) * epn + std::conj(ipow(deriv)) * emn);
  }
  return acc;
}

TrigSeries analyze(std::span<const double> samples, int kmax, bool nyquist) {
  int n = static_cast<int>(samples.size());
  if (n < 2) throw std::invalid_argument("analyze: need >= 2 samples");
  if (2 * kmax >= n) throw std::invalid_argument("analyze: kmax too large for sample count");
  TrigSeries s;
  s.c.assign(kmax + 1, cd(0.0));
  for (int k = 0; k <= kmax; ++k) {
    cd acc = 0.0;
    // e^{-ik x_j} recurrence over j
    cd w = std::exp(cd(0.0, -kTwoPi * k / n));
    cd ej(1.0, 0.0);
    for (int j = 0; j < n; ++j) {
      acc += samples[j] * ej;
      ej *= w;
    }
    s.c[k] = acc / double(n);
  }
  if (nyquist) {
    if (n % 2 != 0 || kmax != n / 2 - 1)
      throw std::invalid_argument("analyze: nyquist term requires even n and kmax = n/2 - 1");
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += (j % 2 == 0 ? samples[j] : -samples[j]);
    s.nyq = acc / n;
  }
  return s;
}

std::vector<double> synthesize(const TrigSeries& s, int n, int deriv) {
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = s.eval(kTwoPi * j / n, deriv);
  return out;
}

}  // namespace mipm
