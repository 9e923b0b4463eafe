#include "fedbht/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include <omp.h>

namespace fedbht {

namespace {

int initial_thread_count() {
  if (const char* env = std::getenv("FEDBHT_THREADS")) {
    try {
      const int n = std::stoi(env);
      return n < 1 ? 1 : n;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

std::atomic<int>& configured() {
  static std::atomic<int> threads{initial_thread_count()};
  return threads;
}

}  // namespace

int thread_count() { return configured().load(std::memory_order_relaxed); }

void set_thread_count(int threads) { configured().store(threads < 1 ? 1 : threads, std::memory_order_relaxed); }

}  // namespace fedbht
