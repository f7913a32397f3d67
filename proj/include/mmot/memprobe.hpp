#pragma once

#include <atomic>
#include <cstddef>

// Heap usage probe for the memory-bound checks. Define MMOT_MEMPROBE_IMPL in
// exactly one translation unit of a binary to activate the global
// operator new/delete instrumentation; otherwise the counters stay at zero.

namespace mmot::memprobe {

struct Counters {
  std::atomic<std::size_t> current{0};
  std::atomic<std::size_t> peak{0};
};

inline Counters& counters() {
  static Counters c;
  return c;
}

inline std::size_t current() {
  return counters().current.load(std::memory_order_relaxed);
}

inline std::size_t peak() {
  return counters().peak.load(std::memory_order_relaxed);
}

inline void reset_peak() {
  counters().peak.store(current(), std::memory_order_relaxed);
}

inline void on_alloc(std::size_t bytes) {
  auto& c = counters();
  const std::size_t now =
      c.current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::size_t prev = c.peak.load(std::memory_order_relaxed);
  while (now > prev &&
         !c.peak.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
  }
}

inline void on_free(std::size_t bytes) {
  counters().current.fetch_sub(bytes, std::memory_order_relaxed);
}

}  // namespace mmot::memprobe

#ifdef MMOT_MEMPROBE_IMPL

#include <cstdlib>
#include <malloc.h>
#include <new>

void* operator new(std::size_t size) {
  void* p = std::malloc(size ? size : 1);
  if (!p) throw std::bad_alloc();
  mmot::memprobe::on_alloc(malloc_usable_size(p));
  return p;
}

void* operator new[](std::size_t size) { return ::operator new(size); }

void operator delete(void* p) noexcept {
  if (!p) return;
  mmot::memprobe::on_free(malloc_usable_size(p));
  std::free(p);
}

void operator delete[](void* p) noexcept { ::operator delete(p); }

void operator delete(void* p, std::size_t) noexcept { ::operator delete(p); }

void operator delete[](void* p, std::size_t) noexcept { ::operator delete(p); }

#endif  // MMOT_MEMPROBE_IMPL
