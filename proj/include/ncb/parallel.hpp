#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef NCB_HAVE_OPENMP
#include <omp.h>
#endif

namespace ncb {

enum class ExecMode { Serial, Parallel };

#ifdef NCB_HAVE_OPENMP
inline ExecMode default_exec_mode() { return ExecMode::Parallel; }
#else
inline ExecMode default_exec_mode() { return ExecMode::Serial; }
#endif

// Runs body(i) for i in [0, n).  Iterations must be independent; results
// should be written to slot i of a pre-sized buffer so serial and parallel
// runs produce bitwise identical output.  Exceptions are captured and the
// first one (by completion order) is rethrown after the loop.
template <typename Body>
void parallel_for(ExecMode mode, std::size_t n, const Body& body) {
  if (n == 0) return;
#ifdef NCB_HAVE_OPENMP
  if (mode == ExecMode::Parallel) {
    std::exception_ptr err;
    std::mutex err_mu;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#else
  (void)mode;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace ncb
