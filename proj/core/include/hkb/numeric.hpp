#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/float128.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "hkb/rational.hpp"

namespace hkb {

using Extended = boost::multiprecision::float128;

enum class Precision { Double, Extended };

Precision parse_precision(const std::string& name);
const char* precision_name(Precision p);

template <class T>
T from_rational(const Rational& x) {
  if constexpr (std::is_same_v<T, double>) {
    return x.get_d();
  } else {
    return T(x.get_num().get_str()) / T(x.get_den().get_str());
  }
}

template <class T>
double to_double(const T& x) {
  return static_cast<double>(x);
}

template <class T>
T pi_v() {
  return boost::math::constants::pi<T>();
}

template <class T>
struct Cplx {
  T re{0};
  T im{0};

  Cplx() = default;
  Cplx(T r, T i = T(0)) : re(std::move(r)), im(std::move(i)) {}

  Cplx& operator+=(const Cplx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cplx& operator-=(const Cplx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Cplx& operator*=(const Cplx& o) {
    T r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = r;
    return *this;
  }
  Cplx& operator*=(const T& k) {
    re *= k;
    im *= k;
    return *this;
  }
  Cplx& operator/=(const Cplx& o) {
    T d = o.re * o.re + o.im * o.im;
    T r = (re * o.re + im * o.im) / d;
    im = (im * o.re - re * o.im) / d;
    re = r;
    return *this;
  }
  friend Cplx operator+(Cplx a, const Cplx& b) { return a += b; }
  friend Cplx operator-(Cplx a, const Cplx& b) { return a -= b; }
  friend Cplx operator*(Cplx a, const Cplx& b) { return a *= b; }
  friend Cplx operator*(Cplx a, const T& k) { return a *= k; }
  friend Cplx operator/(Cplx a, const Cplx& b) { return a /= b; }
  friend Cplx operator-(const Cplx& a) { return Cplx(-a.re, -a.im); }

  Cplx conj() const { return Cplx(re, -im); }
  T norm2() const { return re * re + im * im; }
};

template <class T>
Cplx<T> cexp(const Cplx<T>& z) {
  using std::cos;
  using std::exp;
  using std::sin;
  T m = exp(z.re);
  return Cplx<T>(m * cos(z.im), m * sin(z.im));
}

template <class T>
std::complex<double> to_std(const Cplx<T>& z) {
  return {to_double(z.re), to_double(z.im)};
}

// In-place DFT over an R^rank box stored with the first coordinate fastest.
// Forward: X[m] = Σ_k x[k] e^{-2πi k·m/R}. Inverse omits the 1/R^rank factor.
template <class T>
class Fft {
 public:
  explicit Fft(int resolution);

  int resolution() const { return n_; }
  void transform(std::vector<Cplx<T>>& data, int rank, bool inverse) const;

 private:
  void line(Cplx<T>* a, std::size_t stride, bool inverse) const;

  int n_;
  int log_n_;
  std::vector<Cplx<T>> twiddle_;
  std::vector<int> bitrev_;
};

extern template class Fft<double>;
extern template class Fft<Extended>;

// Pairwise summation for deterministic reductions.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace hkb
