// Timing comparison of the serial reference path against the OpenMP path.
// Every workload is run in both modes; results must agree bitwise, since the
// parallel loops write into pre-sized slots and keep the same seeding.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "ncb/choquet.hpp"
#include "ncb/classify.hpp"
#include "ncb/instances.hpp"

using namespace ncb;

namespace {

double time_of(ExecMode mode, const std::function<void(ExecMode)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  body(mode);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void row(const char* name, const std::function<void(ExecMode)>& body) {
  const double ts = time_of(ExecMode::Serial, body);
  const double tp = time_of(ExecMode::Parallel, body);
  std::printf("%-34s %10.3f s %10.3f s %8.2fx\n", name, ts, tp,
              tp > 0 ? ts / tp : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  int scale = 1;
  if (argc > 1) scale = std::max(1, std::atoi(argv[1]));

  const ParamSequence seq = random_reduced_sequence(3, {2, 2}, 42);
  const OperatorSystem sys = build_opsys(seq, 7);
  const OperatorSystem big =
      build_opsys(random_reduced_sequence(3, {3, 2}, 11), 7);

  std::printf("%-34s %12s %12s %9s\n", "workload", "serial", "openmp",
              "speedup");
  row("peaking search (2 blocks of M2)", [&](ExecMode m) {
    for (int r = 0; r < 4 * scale; ++r)
      find_peaking(sys, 0, 0, 200, static_cast<std::uint64_t>(r), m);
  });
  row("singleton tests (M3+M2 blocks)", [&](ExecMode m) {
    for (int r = 0; r < 2 * scale; ++r)
      for (int k = 0; k < static_cast<int>(big.num_blocks()); ++k)
        is_boundary(big, k, SolveOptions{}, m);
  });
  row("full boundary analysis", [&](ExecMode m) {
    for (int r = 0; r < 2 * scale; ++r)
      analyze_boundary(sys, 0, 200, static_cast<std::uint64_t>(r),
                       SolveOptions{}, m);
  });
  row("equivalence decision", [&](ExecMode m) {
    for (int r = 0; r < scale; ++r) {
      const OperatorSystem other =
          build_opsys(seq, 100 + static_cast<std::uint64_t>(r));
      decide_isomorphism(sys, other, 100, static_cast<std::uint64_t>(r), m);
    }
  });
  return 0;
}
