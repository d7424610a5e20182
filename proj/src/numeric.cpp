#include "qelab/numeric.hpp"

namespace qelab {

namespace {
std::atomic<unsigned> g_threads{0};
}

unsigned thread_count() {
  if (const unsigned t = g_threads.load()) return t;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void set_thread_count(unsigned threads) { g_threads = threads; }

}  // namespace qelab
