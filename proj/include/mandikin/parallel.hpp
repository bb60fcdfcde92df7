#pragma once

#include <cstddef>

namespace mandikin {

// Worker cap for data-parallel kernels. Results never depend on `jobs`.
struct Parallel {
    int jobs = 0;  // 0 = OpenMP default

    int threads() const;
};

// Largest thread count OpenMP would use by default (1 without OpenMP).
int max_threads();

}  // namespace mandikin
