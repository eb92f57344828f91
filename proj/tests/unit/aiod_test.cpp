// Copyright 2026 The gridfs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "gridfs/aiod/channel.hpp"
#include "gridfs/aiod/page_store.hpp"
#include "gridfs/aiod/policy.hpp"
#include "gridfs/aiod/route.hpp"
#include "gridfs/aiod/server.hpp"
#include "gridfs/sim/grid.hpp"
#include "support.hpp"

namespace gridfs::aiod {
namespace {

using access::AccessStrategy;
using access::OpenMode;
using access::OpenOptions;
using catalogue::LfnPath;
using gridfs::testing::random_bytes;
using gridfs::testing::TempDir;
using sim::AiodSpec;
using sim::GridSpec;
using sim::SimGrid;

const Guid kGuid = Guid::parse("0a1b2c3d-4e5f-4a6b-8c7d-8e9f0a1b2c3d");

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// ---- RouteChain -------------------------------------------------------------------------

TEST(RouteChainTest, ParseSerializeRoundTrip) {
  auto r = RouteChain::parse("host1:1@host2:2@host3:3");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], "host1:1");
  EXPECT_EQ(r[2], "host3:3");
  EXPECT_EQ(r.str(), "host1:1@host2:2@host3:3");
  EXPECT_EQ(RouteChain::parse(r.str()).hops(), r.hops());
}

TEST(RouteChainTest, RejectsMalformed) {
  EXPECT_ERRC(RouteChain::parse("a@a"), Errc::InvalidArgument);
  EXPECT_ERRC(RouteChain::parse("a@@b"), Errc::InvalidArgument);
  EXPECT_ERRC(RouteChain::parse("@a"), Errc::InvalidArgument);
  EXPECT_NO_THROW(RouteChain::parse("a@b@a"));
}

TEST(RouteChainTest, RandomChainsRoundTrip) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    std::vector<wire::Address> hops;
    const auto n = 1 + rng() % 5;
    while (hops.size() < n) {
      auto h = "h" + std::to_string(rng() % 4) + ":" + std::to_string(9000 + rng() % 3);
      if (hops.empty() || hops.back() != h) hops.push_back(h);
    }
    RouteChain r(hops);
    EXPECT_EQ(RouteChain::parse(r.str()).hops(), hops);
  }
}

TEST(RouteChainTest, WithHopCollapsesRepeat) {
  auto r = RouteChain::parse("a@b@c");
  EXPECT_EQ(r.with_hop(0, "x").str(), "x@b@c");
  EXPECT_EQ(r.with_hop(0, "b").str(), "b@c");
}

// ---- PageSizePolicy ---------------------------------------------------------------------

TEST(PageSizeTest, SequentialFormula) {
  EXPECT_EQ(page_size_for(0, AccessKind::kSequential), 4096u);
  EXPECT_EQ(page_size_for(64 * 4096, AccessKind::kSequential), 4096u);
  EXPECT_EQ(page_size_for(64 * 4096 + 1, AccessKind::kSequential), 8192u);
  EXPECT_EQ(page_size_for(64ull << 20, AccessKind::kSequential), 1ull << 20);
  EXPECT_EQ(page_size_for(10ull << 30, AccessKind::kSequential), 4ull << 20);
  EXPECT_EQ(page_size_for(123, AccessKind::kRandom), 16384u);
  EXPECT_EQ(page_size_for(10ull << 30, AccessKind::kRandom), 16384u);
}

TEST(PageSizeTest, AlwaysPowerOfTwoInRange) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t size = rng() >> (rng() % 64);
    for (auto kind : {AccessKind::kSequential, AccessKind::kRandom}) {
      const auto p = page_size_for(size, kind);
      EXPECT_EQ(p & (p - 1), 0u);
      EXPECT_GE(p, kMinPage);
      EXPECT_LE(p, kMaxPage);
      // Oracle: smallest power of two >= size/64 by doubling.
      if (kind == AccessKind::kSequential) {
        std::uint64_t want = kMinPage;
        while (want < kMaxPage && want * 64 < size) want *= 2;
        EXPECT_EQ(p, want) << size;
      }
    }
  }
}

TEST(CoveringPagesTest, AlignedAndCutAtEof) {
  auto pages = covering_pages(4000, 5000, 10000, 4096);
  ASSERT_EQ(pages.size(), 3u);
  EXPECT_EQ(pages[0], (PageRange{0, 4096}));
  EXPECT_EQ(pages[1], (PageRange{4096, 4096}));
  EXPECT_EQ(pages[2], (PageRange{8192, 10000 - 8192}));
  EXPECT_TRUE(covering_pages(10000, 5, 10000, 4096).empty());
  EXPECT_TRUE(covering_pages(0, 0, 10000, 4096).empty());
}

TEST(CoveringPagesTest, RandomRangesAreCoveredExactly) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t size = 1 + rng() % 100'000;
    const std::uint64_t page = 1ull << (12 + rng() % 4);
    const std::uint64_t off = rng() % size;
    const std::uint64_t len = 1 + rng() % (size - off);
    auto pages = covering_pages(off, len, size, page);
    ASSERT_FALSE(pages.empty());
    EXPECT_LE(pages.front().offset, off);
    EXPECT_GE(pages.back().offset + pages.back().length, off + len);
    EXPECT_EQ(pages.size(), ceil_div(off + len, page) - off / page);
    for (std::size_t k = 0; k < pages.size(); ++k) {
      EXPECT_EQ(pages[k].offset % page, 0u);
      EXPECT_LE(pages[k].offset + pages[k].length, size);
      if (k > 0) EXPECT_EQ(pages[k].offset, pages[k - 1].offset + pages[k - 1].length);
    }
  }
}

// ---- TokenBucket ----------------------------------------------------------------------

TEST(TokenBucketTest, ZeroRateNeverDelays) {
  TokenBucket b(0, 0, 0);
  EXPECT_EQ(b.take(1ull << 40, 0), 0);
}

TEST(TokenBucketTest, TenMebibytesAtOneMebibytePerSecond) {
  const std::uint64_t rate = 1 << 20;
  TokenBucket b(rate, rate / 10, 0);
  std::int64_t now = 0;
  for (int i = 0; i < 160; ++i) now += b.take(64 << 10, now);
  // Oracle: (10 MiB - burst) / rate.
  const double expect_s = (10.0 * rate - rate / 10.0) / rate;
  EXPECT_NEAR(now / 1e6, expect_s, 0.01);
  EXPECT_GE(now, 9'000'000);
}

TEST(TokenBucketTest, LongRunThroughputWithinRate) {
  std::mt19937_64 rng(12);
  const std::uint64_t rate = 500'000;
  TokenBucket b(rate, 50'000, 0);
  std::int64_t now = 0;
  std::uint64_t sent = 0;
  for (int i = 0; i < 500; ++i) {
    now += static_cast<std::int64_t>(rng() % 20'000);
    const auto n = 1 + rng() % 100'000;
    now += b.take(n, now);
    sent += n;
    // Never more than rate * t + capacity by the time the bytes leave.
    EXPECT_LE(static_cast<double>(sent), rate * (now / 1e6) + 50'000 + 1);
  }
}

// ---- pick_io_slave ------------------------------------------------------------------

LoadReport report(const std::string& who, std::uint64_t conns, std::int64_t ts = 0, double bps = 0) {
  return {who, conns, bps, ts};
}

TEST(PickIoSlaveTest, LowestLoadWins) {
  EXPECT_EQ(pick_io_slave({report("A", 10), report("B", 2)}, 0, 10'000'000, 0), "B");
}

TEST(PickIoSlaveTest, SingleSlave) { EXPECT_EQ(pick_io_slave({report("A", 7)}, 0, 10'000'000, 0), "A"); }

TEST(PickIoSlaveTest, TieGoesToSmallestAddress) {
  EXPECT_EQ(pick_io_slave({report("b:1", 3), report("a:1", 3)}, 0, 10'000'000, 0), "a:1");
}

TEST(PickIoSlaveTest, RateTermAndStaleness) {
  // 1 conn + 2 MB/s / 1 MB/s = 3 > 2 conns
  EXPECT_EQ(pick_io_slave({report("A", 1, 0, 2e6), report("B", 2)}, 0, 10'000'000, 1'000'000), "B");
  EXPECT_EQ(pick_io_slave({report("A", 1, 0), report("B", 9, 20'000'000)}, 20'000'000, 10'000'000, 0), "B");
  EXPECT_ERRC(pick_io_slave({report("A", 1, 0)}, 20'000'001, 10'000'000, 0), Errc::NoFreshReports);
  EXPECT_ERRC(pick_io_slave({}, 0, 10'000'000, 0), Errc::NoFreshReports);
}

// ---- PageStore ----------------------------------------------------------------------

TEST(PageStoreTest, FetchOnceThenHit) {
  TempDir tmp;
  PageStore store(tmp.path(), 1 << 20);
  int fetches = 0;
  bool hit = true;
  EXPECT_EQ(store.get_or_fetch(kGuid, 0, 4, [&] { ++fetches; return std::string("abcd"); }, &hit), "abcd");
  EXPECT_FALSE(hit);
  EXPECT_EQ(store.get_or_fetch(kGuid, 0, 4, [&] { ++fetches; return std::string("zzzz"); }, &hit), "abcd");
  EXPECT_TRUE(hit);
  EXPECT_EQ(fetches, 1);
  EXPECT_TRUE(std::filesystem::exists(tmp / (kGuid.to_string() + ".0.4.page")));
}

TEST(PageStoreTest, CoveringPageAnswersSubrange) {
  TempDir tmp;
  PageStore store(tmp.path(), 1 << 20);
  store.insert(kGuid, 0, "0123456789");
  EXPECT_EQ(store.lookup(kGuid, 2, 3), "234");
  EXPECT_FALSE(store.lookup(kGuid, 8, 5).has_value());
  store.insert(kGuid, 2, "23");  // already covered
  EXPECT_EQ(store.pages().size(), 1u);
}

TEST(PageStoreTest, ShortFetchIsBackendFailure) {
  TempDir tmp;
  PageStore store(tmp.path(), 1 << 20);
  EXPECT_ERRC(store.get_or_fetch(kGuid, 0, 4, [] { return std::string("ab"); }), Errc::BackendFailure);
  EXPECT_TRUE(store.pages().empty());
}

TEST(PageStoreTest, FetchErrorsAreNotCached) {
  TempDir tmp;
  PageStore store(tmp.path(), 1 << 20);
  EXPECT_ERRC(store.get_or_fetch(kGuid, 0, 1, [] () -> std::string { fail(Errc::TransportError, "down"); }),
              Errc::TransportError);
  EXPECT_EQ(store.get_or_fetch(kGuid, 0, 1, [] { return std::string("x"); }), "x");
}

TEST(PageStoreTest, BudgetAndLruEviction) {
  TempDir tmp;
  PageStore store(tmp.path(), 10);
  store.insert(kGuid, 0, "aaaa");
  store.insert(kGuid, 4, "bbbb");
  EXPECT_TRUE(store.lookup(kGuid, 0, 4).has_value());  // touch page 0
  store.insert(kGuid, 8, "cccc");                        // evicts page 4
  EXPECT_TRUE(store.lookup(kGuid, 0, 4).has_value());
  EXPECT_FALSE(store.lookup(kGuid, 4, 4).has_value());
  EXPECT_LE(store.bytes(), 10u);
  store.insert(kGuid, 100, std::string(11, 'x'));  // larger than the budget
  EXPECT_LE(store.bytes(), 10u);
}

TEST(PageStoreTest, RestartRestoresIndexAndDropsStrays) {
  TempDir tmp;
  {
    PageStore store(tmp.path(), 1 << 20);
    store.insert(kGuid, 0, "abcd");
    store.insert(kGuid, 4096, "efgh");
  }
  std::ofstream(tmp / "stray.page") << "junk";
  PageStore store(tmp.path(), 1 << 20);
  EXPECT_EQ(store.pages().size(), 2u);
  EXPECT_EQ(store.bytes(), 8u);
  EXPECT_EQ(store.lookup(kGuid, 4096, 4), "efgh");
  EXPECT_FALSE(std::filesystem::exists(tmp / "stray.page"));
}

TEST(PageStoreTest, ConcurrentMissesCoalesce) {
  TempDir tmp;
  PageStore store(tmp.path(), 1 << 20);
  std::atomic<int> fetches{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      auto d = store.get_or_fetch(kGuid, 0, 3, [&] {
        ++fetches;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        return std::string("abc");
      });
      EXPECT_EQ(d, "abc");
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(fetches.load(), 1);
}

TEST(PageStoreTest, BudgetNeverExceededUnderRandomInserts) {
  TempDir tmp;
  std::mt19937_64 rng(31);
  PageStore store(tmp.path(), 50'000);
  for (int i = 0; i < 500; ++i) {
    const Guid g = Guid::random(rng);
    const std::uint64_t page = 4096;
    const std::uint64_t off = page * (rng() % 8);
    store.insert(g, off, std::string(1 + rng() % page, 'p'));
    ASSERT_LE(store.bytes(), store.budget());
  }
  std::uint64_t sum = 0;
  for (const auto& k : store.pages()) sum += k.length;
  EXPECT_EQ(sum, store.bytes());
}

// ---- servers on the simulated grid ----------------------------------------------------

struct ScratchBase {
  TempDir tmp;
};

class AiodGridTest : public ::testing::Test, protected ScratchBase {
 protected:
  using SpecFactory = GridSpec (*)(const std::filesystem::path&);
  static GridSpec standard_spec(const std::filesystem::path& root) { return GridSpec::standard(root, 5); }
  explicit AiodGridTest(SpecFactory make = standard_spec) : grid(make(tmp.path())) {}

  access::GridClient& alice() { return grid.client("alice"); }

  std::string put(const std::string& lfn, std::size_t n, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    auto data = random_bytes(rng, n);
    int h = alice().open(lfn, OpenMode::kWriteOnce, AccessStrategy::kRemotePartial, OpenOptions{RouteChain()});
    alice().write(h, 0, data);
    alice().close(h);
    return data;
  }

  std::string read_via(const std::string& route, const std::string& lfn, std::uint64_t off = 0,
                       std::optional<std::uint64_t> len = std::nullopt) {
    OpenOptions o;
    o.route = RouteChain::parse(route);
    int h = alice().open(lfn, OpenMode::kRead, AccessStrategy::kRemotePartial, o);
    auto data = alice().read(h, off, len.value_or(alice().info(h).size - off));
    alice().close(h);
    return data;
  }

  AccessTicket ticket(const std::string& route, const std::string& lfn) {
    auto r = grid.catalogue().resolve(grid.principal("alice"), LfnPath::parse(lfn));
    AccessTicket t;
    t.route = RouteChain::parse(route);
    t.grid_user = "alice";
    t.credential_ref = "/alice/.credential";
    t.lfn = lfn;
    t.pfn = r.pfns.front();
    t.guid = r.guid;
    return t;
  }

  std::unique_ptr<AiodChannel> open_channel(const AccessTicket& t, AccessKind kind = AccessKind::kSequential) {
    AiodOpen o;
    o.ticket = t;
    o.access = kind;
    return AiodChannel::open(grid.net(), "client-alice", grid.token("alice"), o);
  }

  std::uint64_t fetches(const std::string& server) { return grid.aiod(server).stats().next_hop_fetches; }

  SimGrid grid;
};

TEST_F(AiodGridTest, ValidTicketOpensSession) {
  put("/alice/f", 1000);
  auto ch = open_channel(ticket("aiod1:9000", "/alice/f"));
  EXPECT_EQ(ch->size(), 1000u);
  EXPECT_EQ(grid.aiod("aiod1:9000").open_sessions(), 1u);
  ch->close();
  EXPECT_EQ(grid.aiod("aiod1:9000").open_sessions(), 0u);
}

TEST_F(AiodGridTest, TicketValidation) {
  put("/alice/f", 1000);
  put("/alice/g", 10, 2);
  auto t = ticket("aiod1:9000", "/alice/f");
  t.guid = ticket("aiod1:9000", "/alice/g").guid;
  EXPECT_ERRC(open_channel(t), Errc::TicketInvalid);

  t = ticket("aiod1:9000", "/alice/f");
  t.grid_user = "bob";
  EXPECT_ERRC(open_channel(t), Errc::TicketInvalid);

  t = ticket("aiod1:9000", "/alice/f");
  t.credential_ref = "/alice/f";  // not the token
  EXPECT_THROW(open_channel(t), Error);

  t = ticket("aiod1:9000", "/alice/f");
  t.pfn = catalogue::Pfn::parse("mem://se2:7100/data/00/nothing");
  EXPECT_ERRC(open_channel(t), Errc::TicketInvalid);
  EXPECT_EQ(grid.aiod("aiod1:9000").open_sessions(), 0u);
}

TEST_F(AiodGridTest, BobCannotReadPrivateFile) {
  put("/alice/p", 100);
  grid.catalogue().set_access(grid.principal("alice"), LfnPath::parse("/alice/p"), std::nullopt, std::nullopt,
                              catalogue::PermissionBits(0600));
  auto t = ticket("aiod1:9000", "/alice/p");
  t.grid_user = "bob";
  t.credential_ref = "/bob/.credential";
  AiodOpen o;
  o.ticket = t;
  EXPECT_ERRC(AiodChannel::open(grid.net(), "client-bob", grid.token("bob"), o), Errc::PermissionDenied);
}

TEST_F(AiodGridTest, ColdReadFetchesEveryPageOnceThenNothing) {
  for (std::size_t n : {1ul, 4096ul, 4097ul, 300'000ul, 3'000'001ul}) {
    const std::string lfn = "/alice/cold" + std::to_string(n);
    put(lfn, n);
    const auto p = page_size_for(n, AccessKind::kSequential);
    const auto before = fetches("aiod1:9000");
    read_via("aiod1:9000", lfn);
    EXPECT_EQ(fetches("aiod1:9000") - before, ceil_div(n, p)) << n;
    read_via("aiod1:9000", lfn);
    EXPECT_EQ(fetches("aiod1:9000") - before, ceil_div(n, p)) << n;
  }
}

TEST_F(AiodGridTest, PageBoundaryReadMatchesDirectFetch) {
  auto data = put("/alice/b", 50'000);
  auto r = grid.catalogue().resolve(grid.principal("alice"), LfnPath::parse("/alice/b"));
  const std::string oracle = grid.se("se1").fetch_file(r.pfns.front(), 0, r.size);
  ASSERT_EQ(oracle, data);
  auto ch = open_channel(ticket("aiod1:9000@aiod2:9000", "/alice/b"), AccessKind::kRandom);
  EXPECT_EQ(ch->page_size(), kRandomPage);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t off = rng() % data.size();
    const std::uint64_t len = rng() % 40'000;
    ASSERT_EQ(ch->read(off, len), oracle.substr(off, len));
  }
  EXPECT_ERRC(ch->read(data.size() + 1, 1), Errc::RangeError);
  ch->close();
}

TEST_F(AiodGridTest, ReadThroughTransparencyAtEveryDepth) {
  auto data = put("/alice/t", 77'777);
  EXPECT_EQ(read_via("aiod1:9000", "/alice/t"), data);
  EXPECT_EQ(read_via("aiod2:9000@aiod1:9000", "/alice/t"), data);
  EXPECT_EQ(read_via("aiod3:9000@aiod2:9000@aiod1:9000", "/alice/t"), data);
}

TEST_F(AiodGridTest, NextHopDeadAndPageAbsentIsTransportError) {
  put("/alice/d", 100'000);
  auto ch = open_channel(ticket("aiod1:9000", "/alice/d"));
  ch->read(0, 10);
  grid.net().partition("se1:7100");
  EXPECT_EQ(ch->read(0, 10).size(), 10u);  // cached page
  EXPECT_ERRC(ch->read(90'000, 10), Errc::TransportError);
  grid.net().heal("se1:7100");
  EXPECT_EQ(ch->read(90'000, 10).size(), 10u);
  ch->close();
}

TEST_F(AiodGridTest, WriteThroughLeavesWarmCachesOnEveryHop) {
  std::mt19937_64 rng(6);
  auto data = random_bytes(rng, 200'000);
  OpenOptions o;
  o.route = RouteChain::parse("aiod1:9000@aiod2:9000");
  int h = alice().open("/alice/wt", OpenMode::kWriteOnce, AccessStrategy::kRemotePartial, o);
  alice().write(h, 0, std::string_view(data).substr(0, 70'000));
  alice().write(h, 70'000, std::string_view(data).substr(70'000));
  alice().close(h);
  const auto f1 = fetches("aiod1:9000");
  const auto f2 = fetches("aiod2:9000");
  grid.net().partition("se1:7100");
  EXPECT_EQ(read_via("aiod1:9000", "/alice/wt"), data);
  EXPECT_EQ(read_via("aiod2:9000", "/alice/wt"), data);
  EXPECT_EQ(fetches("aiod1:9000"), f1);
  EXPECT_EQ(fetches("aiod2:9000"), f2);
  grid.net().heal("se1:7100");
}

TEST_F(AiodGridTest, WriteThroughRejectsNonSequentialOffset) {
  OpenOptions o;
  o.route = RouteChain::parse("aiod1:9000");
  int h = alice().open("/alice/ns", OpenMode::kWriteOnce, AccessStrategy::kRemotePartial, o);
  alice().write(h, 0, "abc");
  EXPECT_ERRC(alice().write(h, 0, "abc"), Errc::NonSequentialWrite);
  alice().close(h);
}

TEST_F(AiodGridTest, DownstreamDeathMidWriteCommitsNothing) {
  const auto committed_before = grid.se("se1").placements().size();
  OpenOptions o;
  o.route = RouteChain::parse("aiod1:9000@aiod2:9000");
  int h = alice().open("/alice/mid", OpenMode::kWriteOnce, AccessStrategy::kRemotePartial, o);
  alice().write(h, 0, std::string(5000, 'a'));
  grid.net().partition("aiod2:9000");
  EXPECT_ERRC(alice().write(h, 5000, std::string(5000, 'b')), Errc::TransportError);
  EXPECT_THROW(alice().close(h), Error);
  grid.net().heal("aiod2:9000");
  // Oracle: SE lslist has no file beyond those committed before.
  EXPECT_EQ(grid.se("se1").placements().size(), committed_before);
  EXPECT_FALSE(grid.catalogue().lookup_via_index(LfnPath::parse("/alice/mid")).has_value());
}

TEST_F(AiodGridTest, PreloadThenReadNeedsNoFetch) {
  auto data = put("/alice/pre", 100'000);
  auto ch = open_channel(ticket("aiod1:9000", "/alice/pre"));
  EXPECT_TRUE(ch->preload({{0, data.size()}}).empty());
  const auto after_preload = fetches("aiod1:9000");
  EXPECT_EQ(after_preload, ceil_div(data.size(), ch->page_size()));
  EXPECT_EQ(ch->read(0, data.size()), data);
  EXPECT_EQ(fetches("aiod1:9000"), after_preload);
  EXPECT_TRUE(ch->preload({{0, data.size()}}).empty());
  EXPECT_EQ(fetches("aiod1:9000"), after_preload);
  ch->close();
}

TEST_F(AiodGridTest, PreloadAndConcurrentReadShareOneFetch) {
  put("/alice/pc", 10'000);
  auto ch1 = open_channel(ticket("aiod1:9000", "/alice/pc"));
  auto ch2 = open_channel(ticket("aiod1:9000", "/alice/pc"));
  const auto before = fetches("aiod1:9000");
  grid.net().run_concurrently({[&] { ch1->preload({{0, 4096}}); }, [&] { ch2->read(0, 100); }});
  EXPECT_EQ(fetches("aiod1:9000") - before, 1u);
  ch1->close();
  ch2->close();
}

TEST_F(AiodGridTest, PreloadReportsFailedRanges) {
  put("/alice/pf", 10'000);
  auto ch = open_channel(ticket("aiod1:9000", "/alice/pf"));
  grid.net().partition("se1:7100");
  auto failed = ch->preload({{0, 4096}});
  grid.net().heal("se1:7100");
  ASSERT_EQ(failed.size(), 1u);
  EXPECT_EQ(ch->read(0, 10).size(), 10u);
  ch->close();
}

TEST_F(AiodGridTest, CachesStayCoherentUnderRandomReads) {
  auto data = put("/alice/coh", 400'000);
  const std::vector<std::string> caches = {"aiod1:9000", "aiod2:9000", "aiod3:9000"};
  std::mt19937_64 rng(17);
  std::vector<std::function<void()>> tasks;
  for (int i = 0; i < 30; ++i) {
    const auto& via = caches[rng() % 3];
    const auto kind = rng() % 2 ? AccessKind::kRandom : AccessKind::kSequential;
    const std::uint64_t off = rng() % data.size();
    const std::uint64_t len = 1 + rng() % 60'000;
    // Some reads go through a second cache.
    std::string route = via;
    if (rng() % 3 == 0) route += "@" + caches[(std::find(caches.begin(), caches.end(), via) - caches.begin() + 1) % 3];
    tasks.push_back([this, route, kind, off, len, &data] {
      auto ch = open_channel(ticket(route, "/alice/coh"), kind);
      EXPECT_EQ(ch->read(off, len), data.substr(off, len));
      ch->close();
    });
  }
  grid.net().run_concurrently(std::move(tasks));

  const Guid guid = grid.catalogue().resolve(grid.principal("alice"), LfnPath::parse("/alice/coh")).guid;
  std::map<std::uint64_t, std::vector<std::string>> by_offset;
  for (const auto& c : caches) {
    auto& store = grid.aiod(c).pages();
    for (const auto& key : store.pages()) {
      if (key.guid != guid) continue;
      auto bytes = store.page_data(key);
      ASSERT_EQ(bytes.size(), key.length);
      EXPECT_EQ(bytes, data.substr(key.offset, key.length));
      by_offset[key.offset].push_back(bytes);
    }
  }
  std::size_t compared = 0;
  for (const auto& [off, copies] : by_offset) {
    for (std::size_t i = 1; i < copies.size(); ++i) {
      const auto n = std::min(copies[0].size(), copies[i].size());
      EXPECT_EQ(copies[0].substr(0, n), copies[i].substr(0, n)) << off;
      ++compared;
    }
  }
  EXPECT_GT(compared, 0u);
}

// ---- gatekeepers --------------------------------------------------------------------

GridSpec gatekeeper_spec(const std::filesystem::path& root) {
  auto spec = GridSpec::standard(root, 5);
  AiodSpec io;
  io.listen = "gk-io:9000";
  io.roles = {"io_gatekeeper"};
  io.slaves = {"aiod1:9000", "aiod2:9000"};
  AiodSpec cache;
  cache.listen = "gk-cache:9000";
  cache.roles = {"cache_gatekeeper", "io_gatekeeper"};
  cache.slaves = {"aiod1:9000", "aiod2:9000", "aiod3:9000"};
  spec.aiods.push_back(io);
  spec.aiods.push_back(cache);
  for (auto& a : spec.aiods) {
    if (a.listen == "aiod1:9000" || a.listen == "aiod2:9000") a.gatekeeper = "gk-io:9000";
  }
  // Latencies from the cache gatekeeper: aiod3 is closest.
  spec.links.push_back({"gk-cache:9000", "aiod1:9000", 5.0, 100'000'000, true});
  spec.links.push_back({"gk-cache:9000", "aiod2:9000", 3.0, 100'000'000, true});
  spec.links.push_back({"gk-cache:9000", "aiod3:9000", 1.0, 100'000'000, true});
  return spec;
}

class GatekeeperTest : public AiodGridTest {
 protected:
  GatekeeperTest() : AiodGridTest(gatekeeper_spec) {}

  void loads(std::uint64_t a, std::uint64_t b) {
    const auto now = grid.net().now_us();
    grid.aiod("gk-io:9000").ingest({"aiod1:9000", a, 0, now});
    grid.aiod("gk-io:9000").ingest({"aiod2:9000", b, 0, now});
  }
};

TEST_F(GatekeeperTest, OpensRedirectToLeastLoadedSlave) {
  put("/alice/g", 1000);
  loads(10, 2);
  for (int i = 0; i < 100; ++i) {
    auto ch = open_channel(ticket("gk-io:9000", "/alice/g"));
    ASSERT_EQ(ch->endpoint(), "aiod2:9000");
    EXPECT_EQ(ch->redirects(), 1);
    EXPECT_EQ(ch->route().str(), "aiod2:9000");
    ch->close();
  }
  EXPECT_EQ(grid.aiod("gk-io:9000").stats().redirects_issued, 100u);
  grid.net().advance_to(grid.net().now_us() + 1'000'000);
  loads(2, 10);
  auto ch = open_channel(ticket("gk-io:9000", "/alice/g"));
  EXPECT_EQ(ch->endpoint(), "aiod1:9000");
  ch->close();
}

TEST_F(GatekeeperTest, ReportsComeFromSlaves) {
  put("/alice/g", 1000);
  grid.aiod("aiod1:9000").report_load();
  grid.aiod("aiod2:9000").report_load();
  auto ch = open_channel(ticket("gk-io:9000", "/alice/g"));
  EXPECT_EQ(ch->endpoint(), "aiod1:9000");  // equal loads, smallest address
  ch->close();
  EXPECT_ERRC(grid.aiod("gk-io:9000").ingest({"stranger:1", 0, 0, grid.net().now_us()}), Errc::InvalidArgument);
}

TEST_F(GatekeeperTest, StaleReportsMeanLocalService) {
  put("/alice/g", 1000);
  loads(1, 1);
  grid.net().advance_to(grid.net().now_us() + 11'000'000);
  auto ch = open_channel(ticket("gk-io:9000", "/alice/g"));
  EXPECT_EQ(ch->endpoint(), "gk-io:9000");
  EXPECT_EQ(ch->redirects(), 0);
  ch->close();
}

TEST_F(GatekeeperTest, LocateGuid) {
  put("/alice/l", 5000);
  const Guid guid = grid.catalogue().resolve(grid.principal("alice"), LfnPath::parse("/alice/l")).guid;
  auto& gk = grid.aiod("gk-cache:9000");
  EXPECT_EQ(gk.locate_guid(guid), std::nullopt);
  read_via("aiod2:9000", "/alice/l");
  EXPECT_EQ(gk.locate_guid(guid), "aiod2:9000");
  read_via("aiod1:9000", "/alice/l");
  EXPECT_EQ(gk.locate_guid(guid), "aiod2:9000");  // 3 ms beats 5 ms
  read_via("aiod3:9000", "/alice/l");
  EXPECT_EQ(gk.locate_guid(guid), "aiod3:9000");
}

TEST_F(GatekeeperTest, CacheGatekeeperRedirectsToHolder) {
  put("/alice/h", 5000);
  read_via("aiod3:9000", "/alice/h");
  auto ch = open_channel(ticket("gk-cache:9000", "/alice/h"));
  EXPECT_EQ(ch->endpoint(), "aiod3:9000");
  const auto before = fetches("aiod3:9000");
  ch->read(0, 5000);
  EXPECT_EQ(fetches("aiod3:9000"), before);
  ch->close();
}

GridSpec loop_spec(const std::filesystem::path& root) {
  auto spec = GridSpec::standard(root, 5);
  AiodSpec a;
  a.listen = "loop-a:9000";
  a.roles = {"io_gatekeeper"};
  a.slaves = {"loop-b:9000"};
  AiodSpec b = a;
  b.listen = "loop-b:9000";
  b.slaves = {"loop-a:9000"};
  spec.aiods.push_back(a);
  spec.aiods.push_back(b);
  return spec;
}

class RedirectLoopTest : public AiodGridTest {
 protected:
  RedirectLoopTest() : AiodGridTest(loop_spec) {}
};

TEST_F(RedirectLoopTest, CycleIsUnreachable) {
  put("/alice/x", 10);
  const auto now = grid.net().now_us();
  grid.aiod("loop-a:9000").ingest({"loop-b:9000", 0, 0, now});
  grid.aiod("loop-b:9000").ingest({"loop-a:9000", 0, 0, now});
  EXPECT_ERRC(open_channel(ticket("loop-a:9000", "/alice/x")), Errc::Unreachable);
  EXPECT_EQ(grid.aiod("loop-a:9000").open_sessions(), 0u);
  EXPECT_EQ(grid.aiod("loop-b:9000").open_sessions(), 0u);
}

// ---- rate limiting ---------------------------------------------------------------

GridSpec limited_spec(const std::filesystem::path& root, std::uint64_t rate) {
  auto spec = GridSpec::standard(root, 5);
  spec.bandwidth_bps = 1'000'000'000;
  for (auto& a : spec.aiods) a.rate_limit = rate;
  return spec;
}

class RateLimitTest : public AiodGridTest {
 protected:
  RateLimitTest() : AiodGridTest([](const std::filesystem::path& r) { return limited_spec(r, 1 << 20); }) {}
};

TEST_F(RateLimitTest, TenMebibytesTakeAboutTenSeconds) {
  put("/alice/big", 10 << 20);
  auto ch = open_channel(ticket("aiod1:9000", "/alice/big"));
  const auto start = grid.net().now_us();
  for (std::uint64_t off = 0; off < (10u << 20); off += 1 << 20) ch->read(off, 1 << 20);
  const double elapsed = (grid.net().now_us() - start) / 1e6;
  EXPECT_GE(elapsed, 9.0);
  EXPECT_NEAR(elapsed, 10.0, 1.0);
  ch->close();
}

TEST_F(RateLimitTest, ConnectionsAreLimitedIndependently) {
  put("/alice/big", 10 << 20);
  auto ch1 = open_channel(ticket("aiod1:9000", "/alice/big"));
  auto ch2 = open_channel(ticket("aiod1:9000", "/alice/big"));
  const auto start = grid.net().now_us();
  auto done = grid.net().run_concurrently({[&] { ch1->read(0, 10 << 20); }, [&] { ch2->read(0, 10 << 20); }});
  for (auto t : done) EXPECT_NEAR((t - start) / 1e6, 10.0, 1.0);
  ch1->close();
  ch2->close();
}

class UnlimitedTest : public AiodGridTest {
 protected:
  UnlimitedTest() : AiodGridTest([](const std::filesystem::path& r) { return limited_spec(r, 0); }) {}
};

TEST_F(UnlimitedTest, ZeroRateAddsNoDelay) {
  put("/alice/big", 10 << 20);
  auto ch = open_channel(ticket("aiod1:9000", "/alice/big"));
  const auto start = grid.net().now_us();
  ch->read(0, 10 << 20);
  EXPECT_LT((grid.net().now_us() - start) / 1e6, 1.0);
  ch->close();
}

TEST(AiodConfigTest, GatekeeperNeedsSlaves) {
  AiodConfig c;
  c.listen = "gk:1";
  c.roles = {"io_gatekeeper"};
  EXPECT_ERRC(c.validate(), Errc::InvalidArgument);
  c.slaves = {"s:1"};
  EXPECT_NO_THROW(c.validate());
  c.roles.insert("janitor");
  EXPECT_ERRC(c.validate(), Errc::InvalidArgument);
  c.roles.erase("janitor");
  EXPECT_EQ(AiodConfig::from_json(c.to_json()).to_json(), c.to_json());
}

}  // namespace
}  // namespace gridfs::aiod
