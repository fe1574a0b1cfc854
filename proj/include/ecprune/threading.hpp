#pragma once

namespace ecprune {

// Global worker count for the data-parallel kernels. 1 (the default) selects
// the serial reference implementations and makes every run bitwise
// reproducible; values > 1 select the OpenMP kernels, whose floating-point
// reductions are deterministic for a fixed worker count but may differ from
// the serial results by reassociation.
int max_jobs();
void set_max_jobs(int jobs);

} // namespace ecprune
