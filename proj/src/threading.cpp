#include "ecprune/threading.hpp"

#include <atomic>

namespace ecprune {

namespace {
std::atomic<int> g_max_jobs{1};
}

int max_jobs() { return g_max_jobs.load(std::memory_order_relaxed); }

void set_max_jobs(int jobs) { g_max_jobs.store(jobs < 1 ? 1 : jobs, std::memory_order_relaxed); }

} // namespace ecprune
