#pragma once

namespace klfls {

// Effective worker count for the parallel block kernels and Monte Carlo
// loops. Resolution order: explicit set_num_threads(), KLFLS_THREADS
// environment variable, then the OpenMP default.
int num_threads();
void set_num_threads(int n);

}  // namespace klfls
