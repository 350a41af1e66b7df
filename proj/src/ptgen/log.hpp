#ifndef PTGEN_LOG_HPP
#define PTGEN_LOG_HPP

#include <cstdlib>
#include <iostream>
#include <string>

namespace ptgen {

// Verbosity from PTGEN_LOG: 0 (default) warnings only, 1 info, 2 debug.
inline int log_level() {
  static const int level = [] {
    const char* env = std::getenv("PTGEN_LOG");
    if (!env) return 0;
    return std::atoi(env);
  }();
  return level;
}

inline void log_warn(const std::string& msg) { std::cerr << "[ptgen] warning: " << msg << "\n"; }

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[ptgen] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[ptgen] debug: " << msg << "\n";
}

}  // namespace ptgen

#endif
