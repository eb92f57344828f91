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

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "gridfs/catalogue/catalogue.hpp"
#include "gridfs/catalogue/service.hpp"
#include "gridfs/simnet/simnet.hpp"
#include "support.hpp"

namespace gridfs::catalogue {
namespace {

using gridfs::testing::TempDir;

const Principal kAdmin{"admin", {"admin"}};
const Principal kAlice{"alice", {"alice", "physics"}};
const Principal kBob{"bob", {"bob", "physics"}};
const Principal kEve{"eve", {"eve"}};

LfnPath L(const char* text) { return LfnPath::parse(text); }
Pfn P(const char* text) { return Pfn::parse(text); }
PermissionBits M(unsigned mode) { return PermissionBits(mode); }

Guid guid_n(std::uint64_t n) {
  std::mt19937_64 rng(n);
  return Guid::random(rng);
}

class CatalogueTest : public ::testing::Test {
 protected:
  void SetUp() override {
    cat.mkdir(kAdmin, L("/alice"), M(0755));
    cat.set_access(kAdmin, L("/alice"), "alice", "alice", std::nullopt);
  }
  void reg(const char* lfn, const char* pfn, std::uint64_t size, std::uint64_t guid, const Principal& who = kAlice) {
    cat.register_file(who, L(lfn), P(pfn), size, guid_n(guid), M(0644));
  }
  Catalogue cat{CatalogueOptions{.seed = 7}};
};

// ---- types --------------------------------------------------------------

TEST(LfnPathTest, CanonicalFormRoundTrips) {
  for (const char* text : {"/", "/a", "/a/b/c", "/alice/sim/run.7"}) {
    EXPECT_EQ(LfnPath::parse(text).str(), text);
    EXPECT_EQ(LfnPath::parse(LfnPath::parse(text).str()), LfnPath::parse(text));
  }
}

TEST(LfnPathTest, GridSchemeAndDotsAreNormalized) {
  EXPECT_EQ(L("grid://alice/x/../y").str(), "/alice/y");
  EXPECT_EQ(L("//a///b/./c/").str(), "/a/b/c");
  EXPECT_ERRC(L("/.."), Errc::InvalidArgument);
  EXPECT_ERRC(L("relative/path"), Errc::InvalidArgument);
  EXPECT_ERRC(L("/a@se1"), Errc::InvalidArgument);
  EXPECT_ERRC(L(("/" + std::string(256, 'x')).c_str()), Errc::InvalidArgument);
  EXPECT_EQ(LfnPath::resolve(L("/alice"), "sim/../f").str(), "/alice/f");
}

TEST(LfnPathTest, RandomCanonicalPathsRoundTrip) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "abcXYZ019._-";
  for (int i = 0; i < 500; ++i) {
    std::string text;
    int depth = static_cast<int>(rng() % 6);
    for (int d = 0; d < depth; ++d) {
      std::string seg;
      int len = 1 + static_cast<int>(rng() % 12);
      for (int k = 0; k < len; ++k) seg.push_back(alphabet[rng() % alphabet.size()]);
      if (seg == "." || seg == "..") seg = "s";
      text += "/" + seg;
    }
    if (text.empty()) text = "/";
    EXPECT_EQ(LfnPath::parse(text).str(), text);
  }
}

TEST(PfnTest, SerializeParseIdentity) {
  const char* text = "file://se1:7100/v0/ab/f1.guid";
  Pfn p = P(text);
  EXPECT_EQ(p.protocol, "file");
  EXPECT_EQ(p.host, "se1");
  EXPECT_EQ(p.port, 7100);
  EXPECT_EQ(p.direntry, "v0/ab/f1.guid");
  EXPECT_EQ(p.str(), text);
  EXPECT_ERRC(P("file://se1:0/x"), Errc::InvalidArgument);
  EXPECT_ERRC(P("file://se1:65536/x"), Errc::InvalidArgument);
  EXPECT_ERRC(P("se1:7100/x"), Errc::InvalidArgument);
}

TEST(PermissionBitsTest, OctalRoundTrip) {
  for (unsigned mode = 0; mode <= 0777; ++mode) {
    PermissionBits bits(mode);
    EXPECT_EQ(PermissionBits::from_octal(bits.to_octal()), bits);
  }
  EXPECT_EQ(PermissionBits::from_octal("755").to_symbolic(), "rwxr-xr-x");
  EXPECT_ERRC(PermissionBits::from_octal("8"), Errc::InvalidArgument);
}

// ---- mkdir ----------------------------------------------------------------

TEST_F(CatalogueTest, MkdirThenListShowsDirectory) {
  cat.mkdir(kAlice, L("/alice/sim"), M(0755));
  auto entries = cat.list_dir(kAlice, L("/alice"));
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].name, "sim");
  EXPECT_TRUE(entries[0].is_dir);
  EXPECT_EQ(entries[0].owner, "alice");
  EXPECT_EQ(entries[0].group, "alice");
  EXPECT_TRUE(cat.indexed_files().empty());
}

TEST_F(CatalogueTest, MkdirInForeignDirectoryIsDenied) {
  EXPECT_ERRC(cat.mkdir(kBob, L("/alice/x"), M(0755)), Errc::PermissionDenied);
}

TEST_F(CatalogueTest, MkdirTwiceIsAlreadyExists) {
  cat.mkdir(kAlice, L("/alice/sim"), M(0755));
  EXPECT_ERRC(cat.mkdir(kAlice, L("/alice/sim"), M(0755)), Errc::AlreadyExists);
}

TEST_F(CatalogueTest, MkdirWithMissingParentIsNotFound) {
  EXPECT_ERRC(cat.mkdir(kAlice, L("/alice/a/b"), M(0755)), Errc::NotFound);
}

// ---- register_file / resolve ---------------------------------------------

TEST_F(CatalogueTest, RegisterThenResolveReturnsSinglePfn) {
  reg("/alice/f1", "file://se1:7100/v0/ab/f1.guid", 1024, 1);
  auto r = cat.resolve(kAlice, L("/alice/f1"));
  ASSERT_EQ(r.pfns.size(), 1u);
  EXPECT_EQ(r.pfns[0].str(), "file://se1:7100/v0/ab/f1.guid");
  EXPECT_EQ(r.size, 1024u);
  EXPECT_EQ(r.guid, guid_n(1));
  EXPECT_TRUE(cat.replica_row(L("/alice/f1")).empty());
}

TEST_F(CatalogueTest, RegisterSameLfnTwiceIsAlreadyExists) {
  reg("/alice/f1", "file://se1:7100/v0/a", 10, 1);
  EXPECT_ERRC(reg("/alice/f1", "file://se1:7100/v0/b", 10, 2), Errc::AlreadyExists);
}

TEST_F(CatalogueTest, RegisterTwoLfnsWithOneGuidIsDuplicateGuid) {
  reg("/alice/f1", "file://se1:7100/v0/a", 10, 1);
  // Oracle: scan every live entry for the GUID before inserting.
  auto guid_in_use = [&](const Guid& g) {
    for (const auto& lfn : cat.walk_files()) {
      if (cat.lookup_via_walk(lfn)->guid == g) return true;
    }
    return false;
  };
  ASSERT_TRUE(guid_in_use(guid_n(1)));
  EXPECT_ERRC(reg("/alice/f2", "file://se1:7100/v0/b", 10, 1), Errc::DuplicateGuid);
  EXPECT_FALSE(cat.lookup_via_index(L("/alice/f2")));
}

TEST_F(CatalogueTest, RegisterMetaNameIsRejected) {
  EXPECT_ERRC(reg("/alice/f.meta", "file://se1:7100/v0/a", 1, 1), Errc::InvalidArgument);
}

TEST_F(CatalogueTest, ResolveListsMasterFirst) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  cat.add_replica(kAlice, L("/alice/f"), P("file://se2:7100/v0/a"), 10);
  auto r = cat.resolve(kAlice, L("/alice/f"));
  ASSERT_EQ(r.pfns.size(), 2u);
  EXPECT_EQ(r.pfns[0].host, "se1");
  EXPECT_EQ(r.pfns[1].host, "se2");
}

TEST_F(CatalogueTest, ResolveWithoutReadBitIsDenied) {
  cat.register_file(kAlice, L("/alice/f"), P("file://se1:7100/v0/a"), 10, guid_n(1), M(0640));
  EXPECT_ERRC(cat.resolve(kBob, L("/alice/f")), Errc::PermissionDenied);
  cat.set_access(kAlice, L("/alice/f"), std::nullopt, "physics", std::nullopt);
  EXPECT_NO_THROW(cat.resolve(kBob, L("/alice/f")).size);
  EXPECT_ERRC(cat.resolve(kEve, L("/alice/f")), Errc::PermissionDenied);
}

TEST_F(CatalogueTest, ResolveAfterThreeReplicasHasFourLocations) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  const int added = 3;
  for (int i = 0; i < added; ++i) {
    cat.add_replica(kAlice, L("/alice/f"), P(("file://se" + std::to_string(i + 2) + ":7100/v0/a").c_str()), 10);
  }
  EXPECT_EQ(cat.resolve(kAlice, L("/alice/f")).pfns.size(), static_cast<std::size_t>(1 + added));
}

// ---- add_replica -----------------------------------------------------------

TEST_F(CatalogueTest, AddReplicaAppearsInResolve) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  cat.add_replica(kAlice, L("/alice/f"), P("mem://se2:7100/v0/a"), 10);
  auto r = cat.resolve(kAlice, L("/alice/f"));
  EXPECT_EQ(r.pfns.back().str(), "mem://se2:7100/v0/a");
}

TEST_F(CatalogueTest, AddReplicaWithWrongSizeIsSizeMismatch) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  EXPECT_ERRC(cat.add_replica(kAlice, L("/alice/f"), P("file://se2:7100/v0/a"), 11), Errc::SizeMismatch);
}

TEST_F(CatalogueTest, AddSamePfnTwiceIsDuplicateReplica) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  cat.add_replica(kAlice, L("/alice/f"), P("file://se2:7100/v0/a"), 10);
  EXPECT_ERRC(cat.add_replica(kAlice, L("/alice/f"), P("file://se2:7100/v0/a"), 10), Errc::DuplicateReplica);
  EXPECT_ERRC(cat.add_replica(kAlice, L("/alice/f"), P("file://se1:7100/v0/a"), 10), Errc::DuplicateReplica);
}

TEST_F(CatalogueTest, SuperuserMayAddReplicaToAnyFile) {
  cat.register_file(kAlice, L("/alice/f"), P("file://se1:7100/v0/a"), 10, guid_n(1), M(0400));
  EXPECT_ERRC(cat.add_replica(kBob, L("/alice/f"), P("file://se2:7100/v0/a"), 10), Errc::PermissionDenied);
  cat.add_replica(kAdmin, L("/alice/f"), P("file://se2:7100/v0/a"), 10);
  EXPECT_EQ(cat.replica_row(L("/alice/f")).size(), 1u);
}

TEST_F(CatalogueTest, RemovingMasterPromotesFirstReplica) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  cat.add_replica(kAlice, L("/alice/f"), P("file://se2:7100/v0/a"), 10);
  cat.remove_replica(kAlice, L("/alice/f"), P("file://se1:7100/v0/a"));
  auto r = cat.resolve(kAlice, L("/alice/f"));
  ASSERT_EQ(r.pfns.size(), 1u);
  EXPECT_EQ(r.pfns[0].host, "se2");
  EXPECT_ERRC(cat.remove_replica(kAlice, L("/alice/f"), P("file://se2:7100/v0/a")), Errc::InvalidArgument);
}

// ---- remove ----------------------------------------------------------------

TEST_F(CatalogueTest, RemoveReturnsAllPfns) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  cat.add_replica(kAlice, L("/alice/f"), P("file://se2:7100/v0/a"), 10);
  auto pfns = cat.remove(kAlice, L("/alice/f"));
  EXPECT_EQ(pfns.size(), 2u);
  EXPECT_ERRC(cat.resolve(kAlice, L("/alice/f")), Errc::NotFound);
  EXPECT_TRUE(cat.replica_row(L("/alice/f")).empty());
  EXPECT_TRUE(cat.indexed_files().empty());
}

TEST_F(CatalogueTest, RemoveNonEmptyDirectoryIsIsDirectory) {
  cat.mkdir(kAlice, L("/alice/sim"), M(0755));
  reg("/alice/sim/f", "file://se1:7100/v0/a", 1, 1);
  EXPECT_ERRC(cat.remove(kAlice, L("/alice/sim")), Errc::IsDirectory);
  cat.remove(kAlice, L("/alice/sim/f"));
  EXPECT_TRUE(cat.remove(kAlice, L("/alice/sim")).empty());
}

TEST_F(CatalogueTest, RemoveThenRegisterWithNewGuidSucceeds) {
  // Oracle: a plain map where insert fails only on a live key.
  std::map<std::string, Guid> naive;
  auto naive_register = [&](const std::string& lfn, const Guid& g) { return naive.emplace(lfn, g).second; };

  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  ASSERT_TRUE(naive_register("/alice/f", guid_n(1)));
  cat.remove(kAlice, L("/alice/f"));
  naive.erase("/alice/f");
  EXPECT_TRUE(naive_register("/alice/f", guid_n(2)));
  reg("/alice/f", "file://se1:7100/v0/b", 20, 2);
  EXPECT_EQ(cat.resolve(kAlice, L("/alice/f")).guid, naive.at("/alice/f"));
}

TEST_F(CatalogueTest, RemoveNeedsWriteOnParent) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  EXPECT_ERRC(cat.remove(kBob, L("/alice/f")), Errc::PermissionDenied);
}

// ---- move ------------------------------------------------------------------

TEST_F(CatalogueTest, MoveKeepsIdentity) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  auto before = cat.resolve(kAlice, L("/alice/f"));
  cat.move(kAlice, L("/alice/f"), L("/alice/g"));
  auto after = cat.resolve(kAlice, L("/alice/g"));
  EXPECT_EQ(after.guid, before.guid);
  EXPECT_EQ(after.size, before.size);
  EXPECT_EQ(after.pfns, before.pfns);
  EXPECT_ERRC(cat.resolve(kAlice, L("/alice/f")), Errc::NotFound);
}

TEST_F(CatalogueTest, MoveOntoExistingIsAlreadyExists) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  reg("/alice/g", "file://se1:7100/v0/b", 10, 2);
  EXPECT_ERRC(cat.move(kAlice, L("/alice/f"), L("/alice/g")), Errc::AlreadyExists);
}

TEST_F(CatalogueTest, MoveAcrossDirectoriesKeepsIndexCoherent) {
  cat.mkdir(kAlice, L("/alice/a"), M(0755));
  cat.mkdir(kAlice, L("/alice/b"), M(0755));
  reg("/alice/a/f", "file://se1:7100/v0/a", 10, 1);
  cat.add_replica(kAlice, L("/alice/a/f"), P("file://se2:7100/v0/a"), 10);
  cat.move(kAlice, L("/alice/a/f"), L("/alice/b/f"));
  for (const auto& lfn : cat.walk_files()) {
    auto via_index = cat.lookup_via_index(lfn);
    auto via_walk = cat.lookup_via_walk(lfn);
    ASSERT_TRUE(via_index && via_walk);
    EXPECT_EQ(entry_to_json(*via_index), entry_to_json(*via_walk));
  }
  EXPECT_EQ(cat.indexed_files(), cat.walk_files());
  EXPECT_EQ(cat.replica_row(L("/alice/b/f")).size(), 1u);
}

TEST_F(CatalogueTest, MoveDirectoryReindexesSubtree) {
  cat.mkdir(kAlice, L("/alice/a"), M(0755));
  cat.mkdir(kAlice, L("/alice/a/deep"), M(0755));
  reg("/alice/a/deep/f", "file://se1:7100/v0/a", 10, 1);
  cat.move(kAlice, L("/alice/a"), L("/alice/z"));
  EXPECT_EQ(cat.indexed_files(), std::vector<LfnPath>{L("/alice/z/deep/f")});
  EXPECT_EQ(cat.resolve(kAlice, L("/alice/z/deep/f")).guid, guid_n(1));
  EXPECT_ERRC(cat.move(kAlice, L("/alice/z"), L("/alice/z/deep/q")), Errc::InvalidArgument);
}

// ---- set_access --------------------------------------------------------------

TEST_F(CatalogueTest, OwnerChmod600HidesFile) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  cat.set_access(kAlice, L("/alice/f"), std::nullopt, std::nullopt, M(0600));
  EXPECT_ERRC(cat.resolve(kBob, L("/alice/f")), Errc::PermissionDenied);
  EXPECT_NO_THROW(cat.resolve(kAlice, L("/alice/f")).size);
}

TEST_F(CatalogueTest, NonOwnerChownIsDenied) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  EXPECT_ERRC(cat.set_access(kBob, L("/alice/f"), "bob", std::nullopt, std::nullopt), Errc::PermissionDenied);
}

TEST_F(CatalogueTest, SuperuserChownThenNewOwnerChmods) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  cat.set_access(kAdmin, L("/alice/f"), "bob", std::nullopt, std::nullopt);
  EXPECT_NO_THROW(cat.set_access(kBob, L("/alice/f"), std::nullopt, std::nullopt, M(0600)));
  EXPECT_EQ(cat.stat(kBob, L("/alice/f")).perms, M(0600));
}

// ---- metadata ----------------------------------------------------------------

TEST_F(CatalogueTest, MetadataSerializesSorted) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  cat.set_metadata(kAlice, L("/alice/f"), "type", "raw");
  cat.set_metadata(kAlice, L("/alice/f"), "run", "7");
  EXPECT_EQ(cat.read_metadata(kAlice, L("/alice/f")), "run=7\ntype=raw");
}

TEST_F(CatalogueTest, NoTagsGivesEmptyText) {
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  EXPECT_EQ(cat.read_metadata(kAlice, L("/alice/f")), "");
}

TEST_F(CatalogueTest, ListingDecoratesFilesWithMetaViews) {
  cat.mkdir(kAlice, L("/alice/d"), M(0755));
  reg("/alice/f", "file://se1:7100/v0/a", 10, 1);
  reg("/alice/g", "file://se1:7100/v0/b", 10, 2);
  // Oracle: plain entries plus a ".meta" sibling for each file.
  std::set<std::string> expected = {"d", "f", "g"};
  for (const char* f : {"f", "g"}) expected.insert(std::string(f) + ".meta");
  std::set<std::string> got;
  for (const auto& e : cat.list_dir(kAlice, L("/alice"))) {
    got.insert(e.name);
    EXPECT_EQ(e.is_virtual, e.name.size() > 5 && e.name.substr(e.name.size() - 5) == ".meta");
  }
  EXPECT_EQ(got, expected);
}

// ---- mint / inline ------------------------------------------------------------

TEST_F(CatalogueTest, MintedGuidIsReservedForItsLfn) {
  Guid g = cat.mint_guid(kAlice, L("/alice/new"));
  EXPECT_TRUE(cat.is_pending(L("/alice/new"), g));
  EXPECT_ERRC(cat.register_file(kAlice, L("/alice/other"), P("file://se1:7100/v0/a"), 1, g, M(0644)),
              Errc::DuplicateGuid);
  cat.register_file(kAlice, L("/alice/new"), P("file://se1:7100/v0/a"), 1, g, M(0644));
  EXPECT_FALSE(cat.is_pending(L("/alice/new"), g));
  EXPECT_ERRC(cat.mint_guid(kAlice, L("/alice/new")), Errc::AlreadyExists);
  EXPECT_ERRC(cat.mint_guid(kBob, L("/alice/x")), Errc::PermissionDenied);
}

TEST_F(CatalogueTest, InlineFilesAreReadable) {
  cat.put_inline(kAlice, L("/alice/.credential"), "tok-alice", M(0600));
  EXPECT_EQ(cat.read_inline(kAlice, L("/alice/.credential")), "tok-alice");
  EXPECT_ERRC(cat.read_inline(kBob, L("/alice/.credential")), Errc::PermissionDenied);
  EXPECT_EQ(cat.resolve(kAlice, L("/alice/.credential")).pfns[0].protocol, "db");
}

// ---- journal ---------------------------------------------------------------------

void populate(Catalogue& c) {
  c.mkdir(kAdmin, L("/alice"), M(0755));
  c.set_access(kAdmin, L("/alice"), "alice", "alice", std::nullopt);
  c.mkdir(kAlice, L("/alice/d"), M(0750));
  for (int i = 0; i < 7; ++i) {
    auto lfn = L(("/alice/d/f" + std::to_string(i)).c_str());
    c.register_file(kAlice, lfn, P("file://se1:7100/v0/x"), 100 + i, guid_n(100 + i), M(0644));
    c.set_metadata(kAlice, lfn, "i", std::to_string(i));
  }
  c.add_replica(kAlice, L("/alice/d/f1"), P("file://se2:7100/v0/x"), 101);
  c.remove(kAlice, L("/alice/d/f2"));
  c.move(kAlice, L("/alice/d/f3"), L("/alice/f3"));
  c.put_inline(kAlice, L("/alice/.credential"), "secret", M(0600));
}

json dump(const Catalogue& c) {
  json out = json::object();
  for (const auto& lfn : c.walk_files()) {
    json e = entry_to_json(*c.lookup_via_walk(lfn));
    for (const auto& r : c.replica_row(lfn)) e["replicas"].push_back(r.str());
    out[lfn.str()] = e;
  }
  for (const auto& e : c.list_dir(kAdmin, L("/alice"))) out["ls:" + e.name] = e.perms.to_octal() + e.owner;
  return out;
}

TEST(CatalogueJournalTest, ReplayRestoresState) {
  TempDir dir;
  json before;
  {
    Catalogue c(CatalogueOptions{.journal_path = dir / "cat.journal", .snapshot_every_n_ops = 1000, .seed = 3});
    populate(c);
    before = dump(c);
  }
  Catalogue restored(CatalogueOptions{.journal_path = dir / "cat.journal", .seed = 3});
  EXPECT_EQ(dump(restored), before);
  EXPECT_EQ(restored.read_inline(kAlice, L("/alice/.credential")), "secret");
}

TEST(CatalogueJournalTest, SnapshotPlusTailRestoresState) {
  TempDir dir;
  json before;
  {
    Catalogue c(CatalogueOptions{.journal_path = dir / "cat.journal", .snapshot_every_n_ops = 5, .seed = 3});
    populate(c);
    before = dump(c);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "cat.journal.snapshot"));
  Catalogue restored(CatalogueOptions{.journal_path = dir / "cat.journal", .snapshot_every_n_ops = 5});
  EXPECT_EQ(dump(restored), before);
}

TEST(CatalogueJournalTest, TornFinalRecordIsIgnored) {
  TempDir dir;
  {
    Catalogue c(CatalogueOptions{.journal_path = dir / "cat.journal"});
    c.mkdir(kAdmin, L("/a"), M(0755));
  }
  {
    std::ofstream out(dir / "cat.journal", std::ios::app);
    out << R"({"seq":2,"op":"mkdir","args":{"path":"/b")";
  }
  Catalogue restored(CatalogueOptions{.journal_path = dir / "cat.journal"});
  EXPECT_NO_THROW(restored.stat(kAdmin, L("/a")));
  EXPECT_ERRC(restored.stat(kAdmin, L("/b")), Errc::NotFound);
}

TEST(CatalogueJournalTest, RecordsCarryIncreasingSeq) {
  TempDir dir;
  {
    Catalogue c(CatalogueOptions{.journal_path = dir / "cat.journal"});
    populate(c);
  }
  std::ifstream in(dir / "cat.journal");
  std::string line;
  std::uint64_t last = 0;
  int n = 0;
  while (std::getline(in, line)) {
    auto j = json::parse(line);
    EXPECT_GT(j.at("seq").get<std::uint64_t>(), last);
    last = j["seq"].get<std::uint64_t>();
    EXPECT_TRUE(j.contains("op") && j.contains("args"));
    ++n;
  }
  EXPECT_GT(n, 10);
}

// ---- properties ------------------------------------------------------------------

// Randomized operation sequences over a small namespace.
class CatalogueFuzz {
 public:
  explicit CatalogueFuzz(std::uint64_t seed) : rng_(seed), cat_(CatalogueOptions{.seed = seed}) {
    cat_.mkdir(kAdmin, L("/w"), M(0777));
    dirs_ = {"/w"};
  }

  void step() {
    auto pick = [&](const auto& v) { return v[rng_() % v.size()]; };
    const std::string dir = pick(dirs_);
    const std::string name = "n" + std::to_string(rng_() % 6);
    const LfnPath lfn = L((dir + "/" + name).c_str());
    const Principal& who = (rng_() % 2) ? kAlice : kBob;
    try {
      switch (rng_() % 7) {
        case 0:
          cat_.mkdir(who, lfn, M(0777));
          dirs_.push_back(lfn.str());
          break;
        case 1:
        case 2: {
          Guid g = (rng_() % 10 == 0 && !used_.empty()) ? pick(used_) : Guid::random(rng_);
          cat_.register_file(who, lfn, P("file://se1:7100/v0/x"), 5, g, M(0666));
          registrations_[lfn.str()]++;
          used_.push_back(g);
          break;
        }
        case 3: {
          cat_.remove(who, lfn);
          registrations_.erase(lfn.str());
          dirs_.erase(std::remove_if(dirs_.begin(), dirs_.end(),
                                     [&](const std::string& d) { return d == lfn.str(); }),
                      dirs_.end());
          break;
        }
        case 4: {
          const LfnPath to = L((pick(dirs_) + "/m" + std::to_string(rng_() % 4)).c_str());
          bool was_dir = cat_.stat(kAdmin, lfn).is_dir;
          cat_.move(who, lfn, to);
          if (was_dir) {
            for (auto& d : dirs_) {
              if (lfn.is_prefix_of(L(d.c_str()))) {
                d = to.str() + d.substr(lfn.str().size());
              }
            }
          } else {
            registrations_.erase(lfn.str());
            registrations_[to.str()] = 1;
          }
          // moves may relocate whole subtrees; rebuild the registration view
          registrations_.clear();
          for (const auto& f : cat_.walk_files()) registrations_[f.str()] = 1;
          break;
        }
        case 5:
          cat_.add_replica(who, lfn, P(("file://se" + std::to_string(2 + rng_() % 3) + ":7100/v0/x").c_str()), 5);
          break;
        default:
          cat_.remove_replica(who, lfn, P("file://se2:7100/v0/x"));
          break;
      }
    } catch (const Error&) {
    }
  }

  Catalogue& catalogue() { return cat_; }
  const std::map<std::string, int>& registrations() const { return registrations_; }

 private:
  std::mt19937_64 rng_;
  Catalogue cat_;
  std::vector<std::string> dirs_;
  std::vector<Guid> used_;
  std::map<std::string, int> registrations_;
};

TEST(CataloguePropertyTest, IndexCoherenceGuidUniquenessAndOrdering) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CatalogueFuzz fuzz(seed);
    for (int i = 0; i < 300; ++i) {
      fuzz.step();
      auto& cat = fuzz.catalogue();
      auto walked = cat.walk_files();
      ASSERT_EQ(cat.indexed_files(), walked) << "seed " << seed << " step " << i;
      std::set<Guid> guids;
      for (const auto& lfn : walked) {
        auto a = cat.lookup_via_index(lfn);
        auto b = cat.lookup_via_walk(lfn);
        ASSERT_TRUE(a && b);
        ASSERT_EQ(entry_to_json(*a), entry_to_json(*b));
        ASSERT_TRUE(guids.insert(a->guid).second) << "duplicate GUID at seed " << seed;
        auto r = cat.resolve(kAdmin, lfn);
        ASSERT_EQ(r.pfns.front(), a->master_pfn);
        auto row = cat.replica_row(lfn);
        ASSERT_EQ(std::set<Pfn>(row.begin(), row.end()).size(), row.size());
      }
    }
  }
}

TEST(CataloguePropertyTest, WriteOnceBetweenCreationAndRemoval) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CatalogueFuzz fuzz(seed * 977);
    for (int i = 0; i < 300; ++i) fuzz.step();
    for (const auto& [lfn, count] : fuzz.registrations()) EXPECT_LE(count, 1) << lfn;
  }
}

// Reference evaluator working on the raw 9-bit mode.
bool reference_allows(const Principal& who, const std::string& owner, const std::string& group, unsigned mode,
                      unsigned need) {
  if (who.user == "admin") return true;
  unsigned shift = 0;
  if (who.user == owner) {
    shift = 6;
  } else if (std::find(who.groups.begin(), who.groups.end(), group) != who.groups.end()) {
    shift = 3;
  }
  return ((mode >> shift) & need) == need;
}

TEST(CataloguePropertyTest, DirectoryMutationsRequireWriteBit) {
  std::mt19937_64 rng(5);
  const std::vector<Principal> people = {kAlice, kBob, kEve, kAdmin};
  for (int trial = 0; trial < 2000; ++trial) {
    Catalogue cat(CatalogueOptions{.seed = static_cast<std::uint64_t>(trial + 1)});
    const unsigned mode = static_cast<unsigned>(rng() % 01000);
    const std::string owner = people[rng() % 3].user;
    const std::string group = rng() % 2 ? "physics" : owner;
    cat.mkdir(kAdmin, L("/d"), M(mode));
    cat.set_access(kAdmin, L("/d"), owner, group, std::nullopt);
    cat.register_file(kAdmin, L("/d/existing"), P("file://se1:7100/v0/x"), 1, guid_n(trial * 2 + 1), M(0666));
    const Principal& who = people[rng() % people.size()];
    const bool expect = reference_allows(who, owner, group, mode, 1u | 2u);
    bool allowed = true;
    try {
      switch (rng() % 3) {
        case 0:
          cat.mkdir(who, L("/d/new"), M(0755));
          break;
        case 1:
          cat.register_file(who, L("/d/new"), P("file://se1:7100/v0/x"), 1, guid_n(trial * 2 + 2), M(0644));
          break;
        default:
          cat.remove(who, L("/d/existing"));
          break;
      }
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), Errc::PermissionDenied) << e.what();
      allowed = false;
    }
    ASSERT_EQ(allowed, expect) << "mode " << std::oct << mode << " owner " << owner << " who " << who.user;
  }
}

// ---- service ----------------------------------------------------------------------

TEST(CatalogueServiceTest, ClientRoundTripOverSimnet) {
  simnet::Topology topo;
  topo.add_node("cat:7000", "catalogue");
  topo.add_node("client", "client");
  topo.full_mesh(1.0, 100'000'000);
  simnet::SimNetwork net(topo);
  Catalogue cat(CatalogueOptions{.seed = 9});
  AuthTable auth;
  auth.add("tok-admin", kAdmin);
  auth.add("tok-alice", kAlice);
  CatalogueService service(cat, auth);
  net.attach("cat:7000", service);

  CatalogueClient admin(net, "client", "cat:7000", "tok-admin");
  admin.mkdir(L("/alice"), M(0755));
  admin.set_access(L("/alice"), "alice", "alice", std::nullopt);
  CatalogueClient alice(net, "client", "cat:7000", "tok-alice");
  EXPECT_EQ(alice.whoami().user, "alice");
  Guid g = alice.mint_guid(L("/alice/f"));
  EXPECT_TRUE(alice.is_pending(L("/alice/f"), g));
  alice.register_file(L("/alice/f"), P("file://se1:7100/v0/a"), 3, g, M(0644));
  alice.set_metadata(L("/alice/f"), "run", "7");
  EXPECT_EQ(alice.read_metadata(L("/alice/f")), "run=7");
  EXPECT_EQ(alice.resolve(L("/alice/f")).guid, g);
  EXPECT_EQ(alice.list_dir(L("/alice")).size(), 2u);
  EXPECT_EQ(alice.stat(L("/alice/f")).size, 3u);
  alice.put_inline(L("/alice/.credential"), "tok-alice", M(0600));
  EXPECT_EQ(alice.read_inline(L("/alice/.credential")), "tok-alice");
  EXPECT_ERRC(alice.mkdir(L("/alice"), M(0755)), Errc::AlreadyExists);
  EXPECT_GT(net.now_us(), 0);

  CatalogueClient stranger(net, "client", "cat:7000", "nope");
  EXPECT_ERRC(stranger.resolve(L("/alice/f")), Errc::Unauthenticated);
}

TEST(CatalogueServiceTest, ClientReauthenticatesAfterPartition) {
  simnet::Topology topo;
  topo.add_node("cat:7000", "catalogue");
  topo.add_node("client", "client");
  topo.full_mesh(1.0, 100'000'000);
  simnet::SimNetwork net(topo);
  Catalogue cat;
  AuthTable auth;
  auth.add("tok", kAdmin);
  CatalogueService service(cat, auth);
  net.attach("cat:7000", service);
  CatalogueClient client(net, "client", "cat:7000", "tok");
  client.mkdir(L("/a"), M(0755));
  net.partition("cat:7000");
  EXPECT_ERRC(client.stat(L("/a")), Errc::TransportError);
  EXPECT_FALSE(client.connected());
  net.heal("cat:7000");
  EXPECT_TRUE(client.stat(L("/a")).is_dir);
  EXPECT_TRUE(client.connected());
  EXPECT_EQ(client.reconnects(), 1u);
}

}  // namespace
}  // namespace gridfs::catalogue
