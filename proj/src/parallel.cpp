#include "ncderp/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace ncderp {

namespace {
std::atomic<int> override_count{0};
}

int worker_count() {
    if (const int forced = override_count.load(); forced > 0) return forced;
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("NCD_ERP_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0 && cap < n) n = cap;
        } catch (const std::exception&) {
        }
    }
    return n < 1 ? 1 : n;
}

void set_worker_count(int n) { override_count.store(n < 0 ? 0 : n); }

}  // namespace ncderp
