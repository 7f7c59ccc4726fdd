#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "reloc/parallel.hpp"

namespace reloc {
namespace {

TEST(Parallel, EveryIndexRunsOnce) {
  for (int threads : {1, 2, 7}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(Parallel, EmptyRangeIsNoop) {
  bool called = false;
  parallel_for(0, 4, [&](std::size_t) { called = true; });
  EXPECT_FALSE(called);
}

TEST(Parallel, LowestFailingIndexIsRethrown) {
  for (int threads : {1, 4}) {
    try {
      parallel_for(100, threads, [](std::size_t i) {
        if (i == 17 || i == 60) throw std::runtime_error("index " + std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "index 17");
    }
  }
}

TEST(Parallel, ThreadCountResolution) {
  EXPECT_EQ(resolve_thread_count(3), 3);
  ::setenv("RELOC_KIT_THREADS", "2", 1);
  EXPECT_EQ(resolve_thread_count(0), 2);
  ::unsetenv("RELOC_KIT_THREADS");
  EXPECT_GE(resolve_thread_count(0), 1);
}

}  // namespace
}  // namespace reloc
