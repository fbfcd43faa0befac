#pragma once

// Shared numeric plumbing: dense row-major tables, deterministic float
// formatting, and a worker-count helper honoring WRINKLE_THREADS.

#include <charconv>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wrinkle {

/** Dense row-major matrix of doubles. Rows index x-nodes, columns frequencies. */
struct Table {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Table() = default;
  Table(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Table: negative shape");
  }

  double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }

  bool same_shape(const Table& o) const { return rows == o.rows && cols == o.cols; }
};

/** Shortest decimal representation that round-trips the double exactly. */
std::string fmt(double x);

/** Worker count: min(WRINKLE_THREADS, hardware concurrency), at least 1. */
int thread_budget();

/**
 * Run fn(i) for i in [0, n). Rows are distributed over the thread budget in
 * contiguous blocks; fn must only write row-local state so the result is
 * independent of the schedule.
 */
void parallel_rows(int n, const std::function<void(int)>& fn);

}  // namespace wrinkle
