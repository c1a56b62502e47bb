#include "linwalk/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "linwalk/types.hpp"

namespace linwalk {

void set_thread_limit(int threads) {
  if (threads < 1) throw ValidationError("thread limit must be >= 1");
  omp_set_num_threads(threads);
}

int thread_limit() { return omp_get_max_threads(); }

std::optional<int> apply_thread_limit_from_env() {
  const char* raw = std::getenv("LINWALK_THREADS");
  if (raw == nullptr) return std::nullopt;
  const std::string_view text(raw);
  int threads = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), threads);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || threads < 1) {
    throw ValidationError("LINWALK_THREADS must be a positive integer, got '" + std::string(text) + "'");
  }
  set_thread_limit(threads);
  return threads;
}

}  // namespace linwalk
