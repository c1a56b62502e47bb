#pragma once

#include <optional>

namespace linwalk {

/// Caps the OpenMP team size used by the parallel kernels.
void set_thread_limit(int threads);
[[nodiscard]] int thread_limit();

/// Reads LINWALK_THREADS; returns the applied limit, or nullopt when the
/// variable is unset. Throws ValidationError for non-positive or non-numeric
/// values.
std::optional<int> apply_thread_limit_from_env();

}  // namespace linwalk
