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

#ifndef MAPSEARCH_KERNELS_HPP
#define MAPSEARCH_KERNELS_HPP

#include <cstddef>

// Dense double-precision kernels behind the surrogate's forward/backward
// passes. Scalar reference implementations always exist; an AVX2+FMA variant
// is selected at runtime on CPUs that support it. Within one process the
// selected backend is fixed, so results are reproducible run to run.
namespace mapsearch::kern {

enum class Backend { kAuto, kScalar, kAvx2 };

// Defaults to kAuto (best supported). Throws std::runtime_error when an
// explicitly requested backend is unsupported on this CPU.
void select_backend(Backend b);
const char* backend_name();
bool avx2_supported();

double dot(const double* a, const double* b, size_t n);
void axpy(double alpha, const double* x, double* y, size_t n);
// y = W x + bias, W row-major rows x cols.
void matvec(const double* w, size_t rows, size_t cols, const double* x,
            const double* bias, double* y);
// out += W^T d  (accumulates; callers zero `out` first when needed).
void matvec_t_acc(const double* w, size_t rows, size_t cols, const double* d, double* out);

namespace detail {
double dot_scalar(const double* a, const double* b, size_t n);
void axpy_scalar(double alpha, const double* x, double* y, size_t n);
void matvec_scalar(const double* w, size_t rows, size_t cols, const double* x,
                   const double* bias, double* y);
void matvec_t_acc_scalar(const double* w, size_t rows, size_t cols, const double* d,
                         double* out);
#if defined(__x86_64__)
double dot_avx2(const double* a, const double* b, size_t n);
void axpy_avx2(double alpha, const double* x, double* y, size_t n);
void matvec_avx2(const double* w, size_t rows, size_t cols, const double* x,
                 const double* bias, double* y);
void matvec_t_acc_avx2(const double* w, size_t rows, size_t cols, const double* d,
                       double* out);
#endif
}  // namespace detail

}  // namespace mapsearch::kern

#endif  // MAPSEARCH_KERNELS_HPP
