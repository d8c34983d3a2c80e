#pragma once

#include <functional>
#include <string>

namespace nf {

// Runs fn(0..n-1) on up to `threads` workers (inline when threads <= 1).
// Work items must write to disjoint, preallocated slots; iteration order is
// not observable, so results are deterministic either way.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Log levels come from the NETFILTER_LOG environment variable:
// "debug", "info" (default), or "off"/"quiet". Messages go to stderr.
bool log_enabled(int level);  // 0 = info, 1 = debug
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace nf
