#include "hkb/numeric.hpp"

#include <utility>

#include "hkb/error.hpp"

namespace hkb {

Precision parse_precision(const std::string& name) {
  if (name == "double") return Precision::Double;
  if (name == "extended") return Precision::Extended;
  throw Error(ErrorCode::InvalidConfig, "precision must be 'double' or 'extended', got '" + name + "'");
}

const char* precision_name(Precision p) { return p == Precision::Double ? "double" : "extended"; }

template <class T>
Fft<T>::Fft(int resolution) : n_(resolution), log_n_(0) {
  if (n_ < 1 || (n_ & (n_ - 1)) != 0)
    throw Error(ErrorCode::InvalidParameters, "FFT resolution must be a power of two");
  while ((1 << log_n_) < n_) ++log_n_;
  using std::cos;
  using std::sin;
  twiddle_.resize(static_cast<std::size_t>(n_ / 2 > 0 ? n_ / 2 : 1));
  const T two_pi = 2 * pi_v<T>();
  for (int j = 0; j < n_ / 2; ++j) {
    T ang = two_pi * T(j) / T(n_);
    twiddle_[j] = Cplx<T>(cos(ang), -sin(ang));
  }
  bitrev_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    int r = 0;
    for (int b = 0; b < log_n_; ++b)
      if (i & (1 << b)) r |= 1 << (log_n_ - 1 - b);
    bitrev_[i] = r;
  }
}

template <class T>
void Fft<T>::line(Cplx<T>* a, std::size_t stride, bool inverse) const {
  for (int i = 0; i < n_; ++i) {
    int j = bitrev_[i];
    if (i < j) std::swap(a[i * stride], a[j * stride]);
  }
  for (int len = 2; len <= n_; len <<= 1) {
    int half = len / 2;
    int step = n_ / len;
    for (int start = 0; start < n_; start += len) {
      for (int k = 0; k < half; ++k) {
        Cplx<T> w = twiddle_[k * step];
        if (inverse) w.im = -w.im;
        Cplx<T>& u = a[(start + k) * stride];
        Cplx<T>& v = a[(start + k + half) * stride];
        Cplx<T> t = v * w;
        v = u - t;
        u += t;
      }
    }
  }
}

template <class T>
void Fft<T>::transform(std::vector<Cplx<T>>& data, int rank, bool inverse) const {
  const std::size_t n = static_cast<std::size_t>(n_);
  if (rank == 1) {
    line(data.data(), 1, inverse);
    return;
  }
  for (std::size_t row = 0; row < n; ++row) line(data.data() + row * n, 1, inverse);
  for (std::size_t col = 0; col < n; ++col) line(data.data() + col, n, inverse);
}

template class Fft<double>;
template class Fft<Extended>;

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace hkb
