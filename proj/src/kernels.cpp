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

#include "rcdh/kernels.hpp"

#include <bit>

namespace rcdh::kernels {

namespace scalar {

double dot_f64(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double l2sqr_f64(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace scalar

std::uint64_t hamming_u64(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t nwords) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < nwords; ++i) {
        c += static_cast<std::uint64_t>(std::popcount(a[i] ^ b[i]));
    }
    return c;
}

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

namespace {

struct Dispatch {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*l2sqr)(const double*, const double*, std::size_t);
    const char* name;
};

Dispatch select() {
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) {
        return {avx2::dot_f64, avx2::axpy_f64, avx2::l2sqr_f64, "avx2"};
    }
#elif defined(__aarch64__)
    return {neon::dot_f64, neon::axpy_f64, neon::l2sqr_f64, "neon"};
#endif
    return {scalar::dot_f64, scalar::axpy_f64, scalar::l2sqr_f64, "scalar"};
}

const Dispatch& dispatch() {
    static const Dispatch d = select();
    return d;
}

}  // namespace

double dot_f64(const double* a, const double* b, std::size_t n) {
    return dispatch().dot(a, b, n);
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
    dispatch().axpy(alpha, x, y, n);
}

double l2sqr_f64(const double* a, const double* b, std::size_t n) {
    return dispatch().l2sqr(a, b, n);
}

const char* backend() { return dispatch().name; }

}  // namespace rcdh::kernels
