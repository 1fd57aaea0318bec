/*******************************************************************************
 * Copyright 2026 The mapsearch authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *******************************************************************************/

#include "mapsearch/kernels.hpp"

#include <stdexcept>

namespace mapsearch::kern {

namespace detail {

double dot_scalar(const double* a, const double* b, size_t n) {
  double s = 0;
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* w, size_t rows, size_t cols, const double* x,
                   const double* bias, double* y) {
  for (size_t r = 0; r < rows; ++r)
    y[r] = dot_scalar(w + r * cols, x, cols) + (bias ? bias[r] : 0.0);
}

void matvec_t_acc_scalar(const double* w, size_t rows, size_t cols, const double* d,
                         double* out) {
  for (size_t r = 0; r < rows; ++r) axpy_scalar(d[r], w + r * cols, out, cols);
}

}  // namespace detail

namespace {

struct Ops {
  double (*dot)(const double*, const double*, size_t);
  void (*axpy)(double, const double*, double*, size_t);
  void (*matvec)(const double*, size_t, size_t, const double*, const double*, double*);
  void (*matvec_t_acc)(const double*, size_t, size_t, const double*, double*);
  const char* name;
};

constexpr Ops kScalarOps = {detail::dot_scalar, detail::axpy_scalar, detail::matvec_scalar,
                            detail::matvec_t_acc_scalar, "scalar"};

#if defined(__x86_64__)
constexpr Ops kAvx2Ops = {detail::dot_avx2, detail::axpy_avx2, detail::matvec_avx2,
                          detail::matvec_t_acc_avx2, "avx2"};
#endif

bool detect_avx2() {
#if defined(__x86_64__) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* pick(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &kScalarOps;
    case Backend::kAvx2:
#if defined(__x86_64__)
      if (detect_avx2()) return &kAvx2Ops;
#endif
      throw std::runtime_error("kernels: avx2 backend not supported on this CPU");
    case Backend::kAuto:
    default:
#if defined(__x86_64__)
      if (detect_avx2()) return &kAvx2Ops;
#endif
      return &kScalarOps;
  }
}

// Thread-safe first-use detection; select_backend is a setup-time call.
const Ops*& ops_slot() {
  static const Ops* slot = pick(Backend::kAuto);
  return slot;
}

const Ops& ops() { return *ops_slot(); }

}  // namespace

void select_backend(Backend b) { ops_slot() = pick(b); }

const char* backend_name() { return ops().name; }

bool avx2_supported() { return detect_avx2(); }

double dot(const double* a, const double* b, size_t n) { return ops().dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, size_t n) { ops().axpy(alpha, x, y, n); }

void matvec(const double* w, size_t rows, size_t cols, const double* x, const double* bias,
            double* y) {
  ops().matvec(w, rows, cols, x, bias, y);
}

void matvec_t_acc(const double* w, size_t rows, size_t cols, const double* d, double* out) {
  ops().matvec_t_acc(w, rows, cols, d, out);
}

}  // namespace mapsearch::kern
