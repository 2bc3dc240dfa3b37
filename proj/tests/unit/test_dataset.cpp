#include <doctest.h>

#include <fstream>

#include "support/oracles.hpp"
#include "taskprog/dataset.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/f32t.hpp"

using namespace taskprog;

TEST_CASE("f32t encoding") {
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto bytes = f32t::encode(t);
  CHECK(bytes.size() == 4 + 1 + 2 * 4 + 6 * 4);
  CHECK(static_cast<char>(bytes[0]) == 'F');
  CHECK(static_cast<char>(bytes[3]) == 'T');
  CHECK(static_cast<unsigned>(bytes[4]) == 2);
  CHECK(static_cast<unsigned>(bytes[5]) == 2);  // little-endian first dim
  CHECK(f32t::decode(bytes) == t);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(f32t::decode(truncated), InvalidArgument);
  auto bad_magic = bytes;
  bad_magic[0] = std::byte{'X'};
  CHECK_THROWS_AS(f32t::decode(bad_magic), InvalidArgument);
  oracle::TempDir dir("f32t");
  {
    std::ofstream out(dir.path() / "bad.f32t", std::ios::binary);
    out << "F32Q";
  }
  CHECK_THROWS_AS(f32t::read(dir.path() / "bad.f32t"), IoError);
}

TEST_CASE("split rule") {
  CHECK(validation_run_count(2) == 1);
  CHECK(validation_run_count(10) == 1);
  CHECK(validation_run_count(11) == 2);
  CHECK(validation_run_count(100) == 10);
  CHECK(validation_run_count(200) == 20);
}

TEST_CASE("two-run corpus: layout, split, round trip and determinism") {
  oracle::TempDir dir("corpus");
  const Corpus c = generate_corpus(Task::floor, 2, 48, 17, dir.path() / "a");
  CHECK(c.sequence_count() == 8);
  CHECK(c.val_run_ids.size() >= 1);
  CHECK(c.train_run_ids.size() + c.val_run_ids.size() == 2);
  for (int id : c.train_run_ids) CHECK(std::find(c.val_run_ids.begin(), c.val_run_ids.end(), id) == c.val_run_ids.end());
  CHECK(std::filesystem::exists(dir.path() / "a" / "floor" / "manifest.json"));
  CHECK(std::filesystem::exists(dir.path() / "a" / "floor" / "run_0" / "view_3" / "frame_15.f32t"));

  const Corpus again = generate_corpus(Task::floor, 2, 48, 17, dir.path() / "b", 2);
  CHECK(again.digest == c.digest);
  const Corpus other = generate_corpus(Task::floor, 2, 48, 18, dir.path() / "c");
  CHECK(other.digest != c.digest);

  const Corpus opened = open_corpus(dir.path() / "a");
  CHECK(opened.digest == c.digest);
  const auto recorded = record_run(Task::floor, 1, run_seed(17, 1), 48);
  for (int v = 0; v < kViewCount; ++v) {
    const SequenceRecord s = load_sequence(opened, 1, v);
    REQUIRE(s.frames.size() == 16);
    for (int p = 0; p < kPhaseCount; ++p) CHECK(s.frames[p] == recorded[v].frames[p]);
    for (int p = 1; p < kPhaseCount; ++p) CHECK(s.ground_truth[p] < s.ground_truth[p - 1]);
  }
  CHECK_THROWS_AS(load_sequence(opened, 7, 0), NotFound);
  CHECK_THROWS_AS(open_corpus(dir.path() / "nowhere"), NotFound);

  const auto victim = frame_path(opened, 0, 2, 5);
  {
    std::fstream f(victim, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x7f');
  }
  try {
    load_sequence(opened, 0, 2);
    FAIL("corruption went unnoticed");
  } catch (const DigestMismatch& e) {
    CHECK(std::string(e.what()).find("frame_5.f32t") != std::string::npos);
  }
}

TEST_CASE("corpus arguments are validated") {
  oracle::TempDir dir("corpus_args");
  CHECK_THROWS_AS(generate_corpus(Task::cup, 1, 64, 1, dir.path()), InvalidArgument);
  CHECK_THROWS_AS(generate_corpus(Task::cup, 2, 50, 1, dir.path()), InvalidArgument);
}

TEST_CASE("frame store caches") {
  oracle::TempDir dir("store");
  const Corpus c = generate_corpus(Task::cup, 2, 48, 3, dir.path());
  FrameStore store(c);
  const Tensor& a = store.frame({0, 1, 2});
  CHECK(&store.frame({0, 1, 2}) == &a);
  CHECK(a == load_sequence(c, 0, 1).frames[2]);
}
