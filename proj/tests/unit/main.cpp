#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <spdlog/spdlog.h>

#include <cstdlib>

int main(int argc, char** argv) {
  // Expected warnings from error-path tests would drown the report.
  if (std::getenv("VICORPUS_TEST_LOG") == nullptr) spdlog::set_level(spdlog::level::off);
  doctest::Context context(argc, argv);
  return context.run();
}
