#include "logwave/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace logwave {
namespace {

std::mutex sink_mutex;
WarningSink current_sink = [](std::string_view message) {
  std::cerr << "warning: " << message << '\n';
};

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex);
  return std::exchange(current_sink, std::move(sink));
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex);
  if (current_sink) current_sink(message);
}

}  // namespace logwave
