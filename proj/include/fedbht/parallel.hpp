#pragma once

namespace fedbht {

/// Worker threads used by element and nodal loops. Defaults to the
/// FEDBHT_THREADS environment variable (0 or 1 = serial), otherwise the
/// OpenMP default.
int thread_count();
void set_thread_count(int threads);

}  // namespace fedbht
