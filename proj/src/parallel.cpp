#include "normal_forge/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace normal_forge {

int default_thread_count() {
  const char* env = std::getenv("NORMAL_FORGE_THREADS");
  if (env == nullptr) return 1;
  int value = 0;
  const char* end = env + std::strlen(env);
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc() || ptr != end || value < 1) return 1;
  return value;
}

}  // namespace normal_forge
