#include "modalign/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace modalign {

std::size_t configured_threads() {
  std::size_t threads = 0;
  if (const char* env = std::getenv("MODAL_ALIGN_THREADS"); env != nullptr && *env != '\0') {
    try {
      threads = static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      threads = 0;
    }
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return threads;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(configured_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  // first failing chunk wins so the surfaced error is deterministic
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace modalign
