#include "core/blas.hpp"

extern "C" void openblas_set_num_threads(int);

namespace har {

void use_single_threaded_blas() { openblas_set_num_threads(1); }

}  // namespace har
