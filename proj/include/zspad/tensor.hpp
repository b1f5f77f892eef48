#pragma once

#include <cstddef>
#include <vector>

namespace zspad {

// Dense activation stack, CHW layout: v[c*h*w + y*w + x].
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(size_t(c_) * h_ * w_, 0.0) {}

  size_t plane_size() const { return size_t(h) * size_t(w); }
  double* plane(int ch) { return v.data() + size_t(ch) * plane_size(); }
  const double* plane(int ch) const { return v.data() + size_t(ch) * plane_size(); }
};

}  // namespace zspad
