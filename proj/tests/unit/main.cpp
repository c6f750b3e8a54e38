#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "logwave/log.hpp"

int main(int argc, char** argv) {
  logwave::set_warning_sink({});
  doctest::Context context(argc, argv);
  return context.run();
}
