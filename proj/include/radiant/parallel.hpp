#pragma once

namespace radiant {

// Number of worker threads OpenMP regions will use.
int thread_count();

// Caps the worker threads; 0 restores the OpenMP default (all cores).
void set_thread_count(int threads);

// Applies RADIANT_THREADS from the environment, if set. Throws on values that
// are not non-negative integers.
void configure_threads_from_env();

}  // namespace radiant
