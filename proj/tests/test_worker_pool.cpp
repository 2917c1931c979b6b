#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>

#include "lirlab/worker_pool.hpp"

using lirlab::WorkerPool;

TEST(WorkerPool, ResolvesAutoThreadCount) {
  EXPECT_GE(lirlab::resolve_thread_count(0), 1u);
  EXPECT_EQ(lirlab::resolve_thread_count(3), 3u);
  EXPECT_EQ(WorkerPool(1).size(), 1u);
  EXPECT_EQ(WorkerPool(4).size(), 4u);
}

TEST(WorkerPool, VisitsEveryIndexOnce) {
  for (std::size_t threads : {1, 2, 5}) {
    WorkerPool pool(threads);
    for (std::size_t count : {0, 1, 7, 1000}) {
      std::vector<std::atomic<int>> hits(count);
      pool.parallel_for(count, [&](std::size_t i) { hits[i]++; });
      for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    }
  }
}

TEST(WorkerPool, RethrowsFirstErrorAndStaysUsable) {
  WorkerPool pool(3);
  EXPECT_THROW(pool.parallel_for(100,
                                 [](std::size_t i) {
                                   if (i == 42) throw std::runtime_error("boom");
                                 }),
               std::runtime_error);
  std::atomic<int> n{0};
  pool.parallel_for(10, [&](std::size_t) { n++; });
  EXPECT_EQ(n.load(), 10);
}
