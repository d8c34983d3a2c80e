#include "netfilter/util.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

namespace nf {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr err;
  std::mutex err_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace {

int env_log_level() {
  static const int level = [] {
    const char* v = std::getenv("NETFILTER_LOG");
    if (!v) return 0;
    const std::string s(v);
    if (s == "debug") return 1;
    if (s == "off" || s == "quiet" || s == "none") return -1;
    return 0;
  }();
  return level;
}

std::mutex& log_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

bool log_enabled(int level) { return env_log_level() >= level; }

void log_info(const std::string& msg) {
  if (!log_enabled(0)) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  std::cerr << "[netfilter] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (!log_enabled(1)) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  std::cerr << "[netfilter:debug] " << msg << "\n";
}

}  // namespace nf
