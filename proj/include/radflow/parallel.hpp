#pragma once

namespace radflow {

/// Selects between the OpenMP kernels and their serial reference versions.
enum class Exec { Serial, Parallel };

/// Sets the OpenMP worker count; values ≤ 0 keep the runtime default.
void set_thread_count(int jobs);
[[nodiscard]] int thread_count();

}  // namespace radflow
