#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace clusterflex {

// Training allocates many short-lived 256 KB activation buffers. Above
// glibc's default mmap threshold every one of them is a fresh mapping and
// costs a round of page faults, which roughly doubles the update time.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

}  // namespace clusterflex
