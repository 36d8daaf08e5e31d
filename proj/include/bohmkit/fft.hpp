#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace bohmkit {

/// In-place complex FFT on an n0 x n1 row-major array (n1 = 1 for 1D).
/// Backed by FFTW; plans are cached per shape and shared. The backward
/// transform is unnormalized.
class Fft {
 public:
  Fft(std::size_t n0, std::size_t n1 = 1);

  std::size_t size() const { return n0_ * n1_; }
  void forward(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;

 private:
  struct Plans;
  std::size_t n0_, n1_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace bohmkit
