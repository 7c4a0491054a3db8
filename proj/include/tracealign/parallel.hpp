#pragma once

namespace tracealign {

/// Selects the OpenMP kernel or the serial path of an operation. Both produce
/// identical results; the serial path is the reference used in tests.
enum class Execution { kSerial, kParallel };

/// Caps the number of OpenMP threads used by parallel kernels. Values < 1
/// restore the runtime default.
void set_thread_count(int threads);
int thread_count();
bool openmp_enabled();

}  // namespace tracealign
