#include "rdpr/parallel.hpp"

#include <cstdlib>
#include <string>

namespace rdpr {

unsigned default_thread_count() {
  if (const char* env = std::getenv("RDPR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace rdpr
