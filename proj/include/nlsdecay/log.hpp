#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace nlsd {

using WarningHandler = std::function<void(const std::string&)>;

namespace detail {
struct WarningState {
  std::mutex mutex;
  WarningHandler handler = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
};

inline WarningState& warning_state() {
  static WarningState state;
  return state;
}
}  // namespace detail

/// Installs a process-wide warning handler and returns the previous one.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  auto& st = detail::warning_state();
  std::lock_guard lock(st.mutex);
  return std::exchange(st.handler, std::move(handler));
}

inline void warn(const std::string& msg) {
  auto& st = detail::warning_state();
  std::lock_guard lock(st.mutex);
  if (st.handler) st.handler(msg);
}

/// Silences warnings for the lifetime of the guard.
class ScopedWarningCapture {
 public:
  explicit ScopedWarningCapture(WarningHandler handler = [](const std::string&) {})
      : previous_(set_warning_handler(std::move(handler))) {}
  ~ScopedWarningCapture() { set_warning_handler(std::move(previous_)); }
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

 private:
  WarningHandler previous_;
};

}  // namespace nlsd
