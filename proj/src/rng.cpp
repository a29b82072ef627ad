#include "jcpulse/rng.hpp"

#include <cmath>

namespace jcpulse {

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * pi * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * pi * u2);
}

cx Rng::complex_gaussian() {
  const double re = gaussian();
  const double im = gaussian();
  return cx(re, im) / std::sqrt(2.0);
}

Mat random_su(int n, std::uint64_t seed) {
  Rng rng(seed);
  Mat z(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) z(r, c) = rng.complex_gaussian();
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c) {
    cx d = r(c, c);
    d = (std::abs(d) > 0) ? d / std::abs(d) : cx(1, 0);
    q.col(c) *= d;
  }
  const cx det = q.determinant();
  q *= std::exp(cx(0, -std::arg(det) / n));
  return q;
}

}  // namespace jcpulse
