#include "radiant/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace radiant {

namespace {
int default_threads() {
  static const int n = omp_get_num_procs();
  return n;
}
}  // namespace

int thread_count() { return omp_get_max_threads(); }

void set_thread_count(int threads) {
  omp_set_num_threads(threads > 0 ? threads : default_threads());
}

void configure_threads_from_env() {
  const char* value = std::getenv("RADIANT_THREADS");
  if (value == nullptr || *value == '\0') return;
  const std::string text(value);
  int threads = -1;
  try {
    std::size_t used = 0;
    threads = std::stoi(text, &used);
    if (used != text.size()) threads = -1;
  } catch (const std::exception&) {
  }
  if (threads < 0) {
    throw std::invalid_argument("RADIANT_THREADS must be a non-negative integer, got '" + text +
                                "'");
  }
  set_thread_count(threads);
}

}  // namespace radiant
