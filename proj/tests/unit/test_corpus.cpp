#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "culture_probe/corpus.hpp"
#include "culture_probe/error.hpp"
#include "support.hpp"

using namespace cprobe;
using namespace cprobe::corpus;

namespace {

const char* kLong =
    "participantId\tcountry\tnativeLanguage\tcue\tresponsePosition\tresponse\n"
    "p1\tChina\tChinese\tdog\tR1\tcat\n"
    "p1\tChina\tChinese\tdog\tR2\tBone\n"
    "p1\tChina\tChinese\tdog\tR3\tNA\n"
    "p2\tUnited States\tEnglish\tdog\tR1\t cat \n"
    "p2\tUnited States\tEnglish\tdog\tR2\tbone\n"
    "p2\tUnited States\tEnglish\tdog\tR3\tleash\n"
    "\n"
    "p3\t\tEnglish\tsun\t1\tmoon\n"
    "p3\t\tEnglish\tsun\tR4\thot\n"
    "p3\tChina\tEnglish\tsun\n";

AssociationTable syntheticTable(std::size_t cues) {
  AssociationTable::Entries e;
  for (std::size_t i = 0; i < cues; ++i) e["cue" + std::to_string(1000 + i)] = {{"x", 1}};
  return AssociationTable(std::move(e));
}

}  // namespace

TEST_CASE("long TSV ingest collects row errors and skips placeholders") {
  std::istringstream in(kLong);
  const auto r = ingest(in, CorpusFormat::LongTsv);
  CHECK(r.records.size() == 6);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].line == 10);
  CHECK(r.errors[0].message.find("R4") != std::string::npos);
  CHECK(r.errors[1].line == 11);
  CHECK(r.skippedEmptyLines == std::vector<std::size_t>{4});
  CHECK(r.records[0].position == ResponsePosition::R1);
  CHECK(r.records[5].position == ResponsePosition::R1);
  CHECK(!r.records[5].country.has_value());
  CHECK(*r.records[0].participantId == "p1");
}

TEST_CASE("ingest rejects empty files and missing columns") {
  std::istringstream empty("\n\n");
  CHECK_THROWS_AS(ingest(empty, CorpusFormat::LongTsv), ValidationError);
  std::istringstream noParticipant("cue\tresponse\ndog\tcat\n");
  CHECK_THROWS_AS(ingest(noParticipant, CorpusFormat::LongTsv), ValidationError);
  std::istringstream noCount("cue\tresponse\ndog\tcat\n");
  CHECK_THROWS_AS(ingest(noCount, CorpusFormat::AggregatedTsv), ValidationError);
  CHECK_THROWS_AS(ingest(std::filesystem::path("/nonexistent/corpus.tsv"), CorpusFormat::LongTsv), IoError);
}

TEST_CASE("aggregated TSV requires positive integer counts") {
  std::istringstream in("cue\tresponse\tcount\ndog\tcat\t3\ndog\tbone\t0\ndog\tfur\t-1\ndog\tleash\tx\ndog\ttail\t2\n");
  const auto r = ingest(in, CorpusFormat::AggregatedTsv);
  CHECK(r.records.size() == 2);
  CHECK(r.errors.size() == 3);
  CHECK(r.records[0].count == 3);
}

TEST_CASE("filtering by country and native language") {
  std::istringstream in(kLong);
  const auto r = ingest(in, CorpusFormat::LongTsv);
  SUBCASE("empty spec is identity") {
    CHECK(filterRecords(r.records, {}).records.size() == r.records.size());
  }
  SUBCASE("country match is case-insensitive and counts missing metadata") {
    const auto f = filterRecords(r.records, {std::string("china"), std::nullopt});
    CHECK(f.records.size() == 2);
    CHECK(f.missingMetadata == 1);
  }
  SUBCASE("both criteria") {
    const auto f = filterRecords(r.records, {std::string("United States"), std::string("english")});
    CHECK(f.records.size() == 3);
  }
}

TEST_CASE("aggregation normalizes responses and orders by count then response") {
  std::istringstream in(kLong);
  const auto table = aggregate(ingest(in, CorpusFormat::LongTsv).records);
  REQUIRE(table.size() == 2);
  const auto& dog = table.responses("dog");
  REQUIRE(dog.size() == 3);
  CHECK(dog[0] == ResponseCount{"bone", 2});
  CHECK(dog[1] == ResponseCount{"cat", 2});
  CHECK(dog[2] == ResponseCount{"leash", 1});
  CHECK(table.total("dog") == 5);
  CHECK(table.countOf("dog", "cat") == 2);
  CHECK(table.countOf("dog", "moon") == 0);
  CHECK(topK(table, "dog", 2) == std::vector<std::string>{"bone", "cat"});
  CHECK(topK(table, "sun", 10) == std::vector<std::string>{"moon"});
  CHECK_THROWS_AS(table.responses("cat"), UnknownCueError);
  CHECK_THROWS_AS(aggregate({}), ValidationError);
}

TEST_CASE("table construction validates entries") {
  CHECK_THROWS_AS(AssociationTable({{"dog", {{"cat", 0}}}}), ValidationError);
  CHECK_THROWS_AS(AssociationTable({{"dog", {{"cat", 1}, {"cat", 2}}}}), ValidationError);
  CHECK_THROWS_AS(AssociationTable({{"", {{"cat", 1}}}}), ValidationError);
}

TEST_CASE("aggregated TSV round trip") {
  testing::TempDir dir;
  std::istringstream in(kLong);
  const auto table = aggregate(ingest(in, CorpusFormat::LongTsv).records);
  writeAggregatedTsv(table, dir / "table.tsv");
  CHECK(readAggregatedTable(dir / "table.tsv") == table);
}

TEST_CASE("split sizes, disjointness and determinism") {
  const auto table = syntheticTable(100);
  const auto a = splitByCue(table, {0.8, 0.1, 0.1}, 7);
  CHECK(a.train.size() == 80);
  CHECK(a.valid.size() == 10);
  CHECK(a.test.size() == 10);
  std::set<std::string> all(a.train.begin(), a.train.end());
  all.insert(a.valid.begin(), a.valid.end());
  all.insert(a.test.begin(), a.test.end());
  CHECK(all.size() == 100);
  CHECK(std::is_sorted(a.train.begin(), a.train.end()));

  const auto b = splitByCue(table, {0.8, 0.1, 0.1}, 7);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  const auto c = splitByCue(table, {0.8, 0.1, 0.1}, 8);
  CHECK(c.test != a.test);
}

TEST_CASE("small corpora still populate every non-empty partition") {
  const auto s = splitByCue(syntheticTable(3), {0.8, 0.1, 0.1}, 1);
  CHECK(s.train.size() == 1);
  CHECK(s.valid.size() == 1);
  CHECK(s.test.size() == 1);
  const auto t = splitByCue(syntheticTable(30), {0.8, 0.1, 0.1}, 1);
  CHECK(t.train.size() == 24);
  CHECK(t.valid.size() == 3);
  CHECK(t.test.size() == 3);
  const auto u = splitByCue(syntheticTable(10), {0.9, 0.1, 0.0}, 1);
  CHECK(u.test.empty());
  CHECK(u.train.size() + u.valid.size() == 10);
}

TEST_CASE("split rejects bad ratios and tiny corpora") {
  CHECK_THROWS_AS(splitByCue(syntheticTable(10), {0.8, 0.1, 0.2}, 1), ValidationError);
  CHECK_THROWS_AS(splitByCue(syntheticTable(10), {-0.1, 0.6, 0.5}, 1), ValidationError);
  CHECK_THROWS_AS(splitByCue(syntheticTable(2), {0.8, 0.1, 0.1}, 1), ValidationError);
}

TEST_CASE("split JSON round trip") {
  const auto s = splitByCue(syntheticTable(20), {0.8, 0.1, 0.1}, 42);
  const auto r = splitFromJson(splitToJson(s));
  CHECK(r.train == s.train);
  CHECK(r.valid == s.valid);
  CHECK(r.test == s.test);
  CHECK(r.seed == 42);
  CHECK(splitToJson(r) == splitToJson(s));
  CHECK_THROWS_AS(splitFromJson("{not json"), ValidationError);
}
