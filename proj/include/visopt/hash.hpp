#pragma once

#include <cstdint>
#include <string_view>

namespace visopt {

/// FNV-1a 64-bit over bytes; used to fingerprint configs and scenarios
/// in output files.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 1469598103934665603ull) {
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace visopt
