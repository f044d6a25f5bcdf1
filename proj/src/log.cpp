#include "fusionrec/log.hpp"

#include <iostream>
#include <mutex>

namespace fusionrec {

namespace {
std::mutex g_mutex;
WarningSink g_sink;
}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(message);
    return;
  }
  std::cerr << "warning: " << message << '\n';
}

}  // namespace fusionrec
