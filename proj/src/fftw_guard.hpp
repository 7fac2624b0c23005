#pragma once

#include <mutex>

namespace rdness::detail {

/// FFTW planner calls are not thread-safe; all planning goes through this lock.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace rdness::detail
