#pragma once

namespace klr {

// Selects the OpenMP kernel or its serial reference. Both produce
// bit-identical results; the serial path exists for testing and benchmarks.
enum class Execution { serial, parallel };

// Number of OpenMP threads available to parallel kernels (1 without OpenMP).
int max_threads() noexcept;

}  // namespace klr
