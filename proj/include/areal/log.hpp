#pragma once

#include <iostream>
#include <string>

namespace areal {

// Stable single-line prefixes so scripts can grep logs. INFO and WARN go to
// stdout, ERROR to stderr. --verbose enables the extra detail lines.
namespace log_detail {
inline bool& verbose_flag() {
  static bool v = false;
  return v;
}
}  // namespace log_detail

inline void set_verbose(bool v) { log_detail::verbose_flag() = v; }

inline void log_info(const std::string& msg) {
  std::cout << "INFO " << msg << "\n";
}

// Detail lines share the INFO prefix but only appear under --verbose.
inline void log_detail_info(const std::string& msg) {
  if (log_detail::verbose_flag()) std::cout << "INFO " << msg << "\n";
}

inline void log_warn(const std::string& msg) {
  std::cout << "WARN " << msg << "\n";
}

inline void log_error(const std::string& msg) {
  std::cerr << "ERROR " << msg << std::endl;
}

}  // namespace areal
