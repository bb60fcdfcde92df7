#include "mandikin/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mandikin {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int Parallel::threads() const { return jobs > 0 ? jobs : max_threads(); }

}  // namespace mandikin
