// Copyright 2026-present the rcdh project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>

// Inner loops of the training and retrieval paths. Scalar reference kernels
// are always available; AVX2 (x86-64) and NEON (aarch64) variants are picked
// once at startup based on what the running CPU supports. The selected and
// the scalar kernels agree to floating-point accumulation-order differences;
// see the equivalence tests.

namespace rcdh::kernels {

namespace scalar {
double dot_f64(const double* a, const double* b, std::size_t n);
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);
double l2sqr_f64(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot_f64(const double* a, const double* b, std::size_t n);
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);
double l2sqr_f64(const double* a, const double* b, std::size_t n);
}  // namespace avx2
bool cpu_has_avx2();
#endif

#if defined(__aarch64__)
namespace neon {
double dot_f64(const double* a, const double* b, std::size_t n);
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);
double l2sqr_f64(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

/// a . b
double dot_f64(const double* a, const double* b, std::size_t n);

/// y += alpha * x
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);

/// sum (a_i - b_i)^2
double l2sqr_f64(const double* a, const double* b, std::size_t n);

/// popcount(a ^ b) over nwords 64-bit words. Single POPCNT/CNT instruction
/// per word; codes are a handful of words, so no wide variant is dispatched.
std::uint64_t hamming_u64(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t nwords);

/// Name of the selected backend: "avx2", "neon" or "scalar".
const char* backend();

}  // namespace rcdh::kernels
