#include "klfls/threads.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>

namespace klfls {

namespace {
std::atomic<int> g_threads{0};

int env_threads() {
  const char* s = std::getenv("KLFLS_THREADS");
  if (!s) return 0;
  int v = std::atoi(s);
  return v > 0 ? v : 0;
}
}  // namespace

int num_threads() {
  int v = g_threads.load(std::memory_order_relaxed);
  if (v > 0) return v;
  int e = env_threads();
  if (e > 0) return e;
  return omp_get_max_threads();
}

void set_num_threads(int n) { g_threads.store(n, std::memory_order_relaxed); }

}  // namespace klfls
