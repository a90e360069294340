#pragma once

namespace govdisc {

// Kernels that have an OpenMP path also keep a serial reference; both must
// produce identical results.
enum class Execution { Serial, Parallel };

/// Number of worker threads for parallel kernels. Honors GOVDISC_THREADS as a
/// cap on the OpenMP default; always >= 1.
int thread_count();

/// Overrides the cap for this process (0 restores the environment setting).
void set_thread_cap(int threads);

} // namespace govdisc
