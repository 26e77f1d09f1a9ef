#include "rom/parallel.hpp"

#include <atomic>

namespace rom {
namespace {

int default_threads() noexcept {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& threads_setting() noexcept {
  static std::atomic<int> value{default_threads()};
  return value;
}

}  // namespace

int thread_count() noexcept { return threads_setting().load(); }

void set_thread_count(int threads) noexcept {
  threads_setting().store(threads < 1 ? default_threads() : threads);
}

}  // namespace rom
