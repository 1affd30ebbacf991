// Copyright 2026 The lsd-drt Authors
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

// Include this instead of <omp.h> so the kernels still build without OpenMP.

#if defined(_OPENMP)
#include <omp.h>
namespace lsd {
constexpr bool use_omp = true;
}  // namespace lsd
#define LSD_PRAGMA(x) _Pragma(#x)
#define LSD_OMP_PARALLEL_FOR LSD_PRAGMA(omp parallel for schedule(static))
#define LSD_OMP_PARALLEL_FOR_DYNAMIC LSD_PRAGMA(omp parallel for schedule(dynamic, 1))
#define LSD_OMP_PARALLEL_FOR_IF(cond) LSD_PRAGMA(omp parallel for schedule(static) if (cond))
#else
namespace lsd {
constexpr bool use_omp = false;
}  // namespace lsd
#define omp_get_thread_num() 0
#define omp_get_max_threads() 1
#define omp_get_num_procs() 1
#define omp_set_num_threads(n) ((void)(n))
#define LSD_OMP_PARALLEL_FOR
#define LSD_OMP_PARALLEL_FOR_DYNAMIC
#define LSD_OMP_PARALLEL_FOR_IF(cond)
#endif

namespace lsd {

/// Caps worker threads for subsequent parallel regions; 0 keeps the default.
inline void set_thread_count(int threads) {
    if (threads > 0) {
        omp_set_num_threads(threads);
    }
}

}  // namespace lsd
