#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "curate/pipeline.hpp"

using namespace curate;
using namespace curate::pipeline;
namespace fs = std::filesystem;

namespace {

// the toy dataset ships next to the tests; tests run from anywhere
fs::path toy_root() {
  fs::path guess = fs::path(__FILE__).parent_path() / "data" / "toy_dataset";
  REQUIRE(fs::exists(guess));
  return guess;
}

struct TempDataset {
  fs::path dir;
  explicit TempDataset(const std::string& tag) {
    dir = fs::temp_directory_path() / ("curate_pipeline_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::copy(toy_root() / "base", dir / "base", fs::copy_options::recursive);
  }
  ~TempDataset() { fs::remove_all(dir); }
  std::string base() const { return (dir / "base").string(); }
  std::string review() const { return (dir / "review.md").string(); }
};

PipelineConfig toy_config() {
  return PipelineConfig::load((toy_root() / "config.json").string());
}

// tick every checkbox in a review document with one verdict
void fill_review(const std::string& path, bool correct) {
  std::ifstream in(path);
  std::string doc((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  const std::string target = correct ? "- [ ] Correct" : "- [ ] Incorrect";
  std::size_t pos = 0;
  while ((pos = doc.find(target, pos)) != std::string::npos) {
    doc[pos + 3] = 'x';
    pos += target.size();
  }
  std::ofstream out(path, std::ios::trunc);
  out << doc;
}

}  // namespace

TEST_CASE("data versions parse, order, and bump") {
  CHECK(DataVersion::parse("1.2.3").str() == "1.2.3");
  CHECK(DataVersion{1, 2, 3} < DataVersion{1, 10, 0});
  CHECK(DataVersion{0, 9, 9} < DataVersion{1, 0, 0});
  CHECK_THROWS_AS(DataVersion::parse("not-a-version"), CurateError);

  CHECK(bump_version({1, 2, 3}, ChangeClass::patch).str() == "1.2.4");
  CHECK(bump_version({1, 2, 3}, ChangeClass::minor).str() == "1.3.0");
  CHECK(bump_version({1, 2, 3}, ChangeClass::major).str() == "2.0.0");
  // before 1.0.0 a breaking change bumps the minor number
  CHECK(bump_version({0, 4, 1}, ChangeClass::major).str() == "0.5.0");
  CHECK(bump_version({0, 4, 1}, ChangeClass::patch).str() == "0.4.2");
}

TEST_CASE("classify_change") {
  FormatSchema base = FormatSchema::load((toy_root() / "base" / "schema.json").string());
  CHECK(classify_change(base, base) == ChangeClass::patch);

  FormatSchema col_added = base;
  col_added.parts[0].columns.push_back("seat");
  CHECK(classify_change(base, col_added) == ChangeClass::minor);

  FormatSchema col_removed = base;
  col_removed.parts[0].columns.pop_back();
  CHECK(classify_change(base, col_removed) == ChangeClass::major);

  FormatSchema col_renamed = base;
  col_renamed.parts[0].columns[1] = "fullname";
  CHECK(classify_change(base, col_renamed) == ChangeClass::major);

  FormatSchema rows_grown = base;
  rows_grown.parts[0].rows = 6;
  CHECK(classify_change(base, rows_grown) == ChangeClass::minor);
  FormatSchema rows_shrunk = base;
  rows_shrunk.parts[0].rows = 3;
  CHECK(classify_change(base, rows_shrunk) == ChangeClass::major);

  FormatSchema file_added = base;
  file_added.parts[1].files.push_back("speeches/part3.txt");
  CHECK(classify_change(base, file_added) == ChangeClass::minor);
  FormatSchema file_removed = base;
  file_removed.parts[1].files.pop_back();
  CHECK(classify_change(base, file_removed) == ChangeClass::major);

  FormatSchema part_added = base;
  PartSchema extra;
  extra.name = "metrics";
  extra.format = data::Format::indexed_table;
  extra.path = "metrics.csv";
  part_added.parts.push_back(extra);
  CHECK(classify_change(base, part_added) == ChangeClass::minor);

  FormatSchema part_removed;
  part_removed.parts = {base.parts[0]};
  CHECK(classify_change(base, part_removed) == ChangeClass::major);
}

TEST_CASE("validate_format flags the right violations") {
  FormatSchema schema = FormatSchema::load((toy_root() / "base" / "schema.json").string());
  CHECK(validate_format((toy_root() / "base").string(), schema).empty());
  CHECK(validate_format((toy_root() / "proposal_good").string(), schema).empty());

  auto bad = validate_format((toy_root() / "proposal_bad_format").string(), schema);
  REQUIRE_FALSE(bad.empty());
  bool names_column = false;
  for (const auto& v : bad) {
    names_column |= v.message.find("party") != std::string::npos;
  }
  CHECK(names_column);

  TempDataset tmp("validate");
  fs::remove(fs::path(tmp.base()) / "speeches" / "part2.txt");
  auto removed = validate_format(tmp.base(), schema);
  REQUIRE_FALSE(removed.empty());
  CHECK(removed[0].message.find("removed") != std::string::npos);

  TempDataset tmp2("validate2");
  std::ofstream(fs::path(tmp2.base()) / "stray.csv") << "x\n";
  auto extra = validate_format(tmp2.base(), schema);
  REQUIRE_FALSE(extra.empty());
  CHECK(extra[0].message.find("unexpected") != std::string::npos);
}

TEST_CASE("sanity checks: pins and counts") {
  FormatSchema schema = FormatSchema::load((toy_root() / "base" / "schema.json").string());
  SanityRegistry registry =
      SanityRegistry::load((toy_root() / "base" / "assertions.json").string());
  auto base_parts = load_parts((toy_root() / "base").string(), schema);
  CHECK(run_sanity_checks(base_parts, SanityRegistry{}).empty());
  CHECK(run_sanity_checks(base_parts, registry).empty());

  auto broken = load_parts((toy_root() / "proposal_sanity").string(), schema);
  auto violations = run_sanity_checks(broken, registry);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0].message.find("regressed") != std::string::npos);

  SanityRegistry wrong_count;
  wrong_count.counts.push_back({"members", "rows", 7});
  auto count_violation = run_sanity_checks(base_parts, wrong_count);
  REQUIRE(count_violation.size() == 1);
  CHECK(count_violation[0].message.find("expected 7") != std::string::npos);
}

TEST_CASE("pipeline: format gate rejects before any review is emitted") {
  TempDataset tmp("gate");
  auto result = run_pipeline(tmp.base(),
                             (toy_root() / "proposal_bad_format").string(),
                             toy_config(), tmp.review());
  CHECK(result.status == PipelineStatus::validation_failed);
  CHECK_FALSE(fs::exists(tmp.review()));
}

TEST_CASE("pipeline: sanity gate rejects before any review is emitted") {
  TempDataset tmp("sanity");
  auto result = run_pipeline(tmp.base(),
                             (toy_root() / "proposal_sanity").string(),
                             toy_config(), tmp.review());
  CHECK(result.status == PipelineStatus::validation_failed);
  CHECK_FALSE(fs::exists(tmp.review()));
}

TEST_CASE("pipeline: identical proposal is rejected as empty") {
  TempDataset tmp("empty");
  auto result = run_pipeline(tmp.base(), tmp.base(), toy_config(), tmp.review());
  CHECK(result.status == PipelineStatus::rejected);
  CHECK(result.message.find("empty proposal") != std::string::npos);
}

TEST_CASE("pipeline: accept path releases a patch") {
  TempDataset tmp("accept");
  FormatSchema schema = FormatSchema::load((toy_root() / "base" / "schema.json").string());
  std::string before = dataset_fingerprint(load_parts(tmp.base(), schema));

  auto phase1 = run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                             toy_config(), tmp.review());
  CHECK(phase1.status == PipelineStatus::awaiting_review);
  REQUIRE(fs::exists(tmp.review()));
  CHECK(phase1.sample_n == 3);  // delta has 3 edits, n clamps

  fill_review(tmp.review(), true);
  auto phase2 = run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                             toy_config(), tmp.review());
  CHECK(phase2.status == PipelineStatus::released);
  REQUIRE(phase2.release.has_value());
  CHECK(phase2.release->version.str() == "0.1.1");
  CHECK(phase2.release->change_class == ChangeClass::patch);
  CHECK(phase2.release->m_observed == 3);
  CHECK(phase2.release->sample_n == 3);
  CHECK(phase2.release->parent_fingerprint == before);

  // base now equals the proposal
  std::string after = dataset_fingerprint(load_parts(tmp.base(), schema));
  CHECK(after == phase2.release->fingerprint);
  std::string proposal_fp = dataset_fingerprint(
      load_parts((toy_root() / "proposal_good").string(), schema));
  CHECK(after == proposal_fp);

  auto log = read_changelog(tmp.base());
  REQUIRE(log.size() == 1);
  CHECK(log[0].version.str() == "0.1.1");
  CHECK(current_version(tmp.base()).str() == "0.1.1");
  CHECK(log[0].timestamp.find('T') != std::string::npos);
  CHECK(log[0].timestamp.back() == 'Z');
}

TEST_CASE("pipeline: reject path leaves the base bit-identical") {
  TempDataset tmp("reject");
  FormatSchema schema = FormatSchema::load((toy_root() / "base" / "schema.json").string());
  std::string before = dataset_fingerprint(load_parts(tmp.base(), schema));

  auto phase1 = run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                             toy_config(), tmp.review());
  CHECK(phase1.status == PipelineStatus::awaiting_review);
  fill_review(tmp.review(), false);  // every verdict Incorrect
  auto phase2 = run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                             toy_config(), tmp.review());
  CHECK(phase2.status == PipelineStatus::rejected);
  CHECK(phase2.m_observed == 0);

  CHECK(dataset_fingerprint(load_parts(tmp.base(), schema)) == before);
  CHECK(read_changelog(tmp.base()).empty());
}

TEST_CASE("pipeline: successive releases strictly increase the version") {
  TempDataset tmp("monotone");
  auto release = [&](const std::string& proposal) {
    run_pipeline(tmp.base(), proposal, toy_config(), tmp.review());
    fill_review(tmp.review(), true);
    auto result = run_pipeline(tmp.base(), proposal, toy_config(), tmp.review());
    REQUIRE(result.status == PipelineStatus::released);
    fs::remove(tmp.review());
  };
  // accept the fixes, then a second revision that reverts them
  fs::path original = toy_root() / "base";
  release((toy_root() / "proposal_good").string());
  release(original.string());
  auto log = read_changelog(tmp.base());
  REQUIRE(log.size() == 2);
  CHECK(log[0].version < log[1].version);
  CHECK(log[1].version.str() == "0.1.2");
}

TEST_CASE("pipeline: resume is deterministic") {
  // two fresh runs with the same review produce the same decision and
  // release fingerprint
  std::string fp1, fp2;
  for (int round = 0; round < 2; ++round) {
    TempDataset tmp("resume" + std::to_string(round));
    run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                 toy_config(), tmp.review());
    fill_review(tmp.review(), true);
    auto result = run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                               toy_config(), tmp.review());
    REQUIRE(result.status == PipelineStatus::released);
    (round == 0 ? fp1 : fp2) = result.release->fingerprint;
  }
  CHECK(fp1 == fp2);
}

TEST_CASE("pipeline: a stale review is refused") {
  TempDataset tmp("stale");
  run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(), toy_config(),
               tmp.review());
  fill_review(tmp.review(), true);
  // corrupt the recorded fingerprints
  std::ifstream in(tmp.review());
  std::string doc((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  in.close();
  std::size_t pos = doc.find("base: ");
  doc.replace(pos + 6, 4, "dead");
  std::ofstream(tmp.review(), std::ios::trunc) << doc;
  CHECK_THROWS_AS(run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                               toy_config(), tmp.review()),
                  CurateError);
}

TEST_CASE("pipeline: an unfilled review halts again without deciding") {
  TempDataset tmp("unfilled");
  run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(), toy_config(),
               tmp.review());
  // rerun without touching the checkboxes: the parse must flag the first
  // edit as unreviewed
  try {
    run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(), toy_config(),
                 tmp.review());
    CHECK(false);
  } catch (const CurateError& e) {
    CHECK(e.code() == ErrorCode::review_incomplete);
  }
}

TEST_CASE("pipeline: the lock file serializes runs") {
  TempDataset tmp("lock");
  std::ofstream(fs::path(tmp.base()) / ".curate.lock") << "held\n";
  CHECK_THROWS_AS(run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                               toy_config(), tmp.review()),
                  CurateError);
  fs::remove(fs::path(tmp.base()) / ".curate.lock");
  auto result = run_pipeline(tmp.base(), (toy_root() / "proposal_good").string(),
                             toy_config(), tmp.review());
  CHECK(result.status == PipelineStatus::awaiting_review);
  CHECK_FALSE(fs::exists(fs::path(tmp.base()) / ".curate.lock"));
}

TEST_CASE("release records serialize and parse") {
  ReleaseRecord rec;
  rec.version = {1, 4, 2};
  rec.parent_fingerprint = "aaaa";
  rec.fingerprint = "bbbb";
  rec.change_class = ChangeClass::minor;
  rec.sample_n = 50;
  rec.m_observed = 42;
  rec.tests_passed = 4;
  rec.timestamp = "2026-08-10T12:00:00Z";
  ReleaseRecord back = ReleaseRecord::parse(rec.serialize());
  CHECK(back.version == rec.version);
  CHECK(back.fingerprint == rec.fingerprint);
  CHECK(back.change_class == ChangeClass::minor);
  CHECK(back.m_observed == 42);
  CHECK(back.timestamp == rec.timestamp);
}
