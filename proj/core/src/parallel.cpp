#include "kinkscan/parallel.hpp"

#include <cstdlib>
#include <string>

namespace kinkscan {

int worker_count() {
    const char* env = std::getenv("KINKSCAN_THREADS");
    if (env != nullptr) {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (...) {
            // fall through to auto
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace kinkscan
