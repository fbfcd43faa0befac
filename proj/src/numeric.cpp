#include "wrinkle/numeric.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace wrinkle {

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("WRINKLE_THREADS")) {
    char* end = nullptr;
    long req = std::strtol(env, &end, 10);
    if (end != env && req >= 1) hw = std::min<long>(req, hw);
  }
  return hw;
}

void parallel_rows(int n, const std::function<void(int)>& fn) {
  int workers = std::min(thread_budget(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  int base = n / workers, extra = n % workers, start = 0;
  for (int w = 0; w < workers; ++w) {
    int len = base + (w < extra ? 1 : 0);
    pool.emplace_back([&fn, start, len] {
      for (int i = start; i < start + len; ++i) fn(i);
    });
    start += len;
  }
  for (auto& t : pool) t.join();
}

}  // namespace wrinkle
