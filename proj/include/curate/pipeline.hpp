// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#ifndef CURATE_PIPELINE_HPP
#define CURATE_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curate/decision.hpp"
#include "curate/edits.hpp"
#include "curate/sampling.hpp"

namespace curate::pipeline {

// Semantic data version. Pre-1.0.0 releases are unstable; breaking changes
// bump the minor number until 1.0.0.
struct DataVersion {
  int major = 0;
  int minor = 1;
  int patch = 0;

  auto operator<=>(const DataVersion&) const = default;
  std::string str() const;
  static DataVersion parse(std::string_view text);
};

enum class ChangeClass { major, minor, patch };
const char* change_class_name(ChangeClass c);

DataVersion bump_version(const DataVersion& v, ChangeClass c);

// Declared format of one dataset part.
struct PartSchema {
  std::string name;
  data::Format format = data::Format::fixed_table;
  std::string path;                 // table/indexed parts: one file
  std::vector<std::string> files;   // sequence parts: file list
  std::size_t rows = 0;             // fixed table shape
  std::vector<std::string> columns; // fixed table column names
  std::vector<std::int64_t> column_ids;  // indexed table column set
};

struct FormatSchema {
  std::vector<PartSchema> parts;

  static FormatSchema parse(std::string_view text);
  static FormatSchema load(const std::string& path);
  std::string serialize() const;
  const PartSchema* find(const std::string& name) const;
};

struct Violation {
  std::string part;
  std::string message;
};

// Step 3.1 format gate: shapes, columns and file sets against the schema.
std::vector<Violation> validate_format(const std::string& dir,
                                       const FormatSchema& schema);

// Declarative sanity checks: coordinate pins and exact summary counts.
struct SanityPin {
  std::string part;
  std::size_t row = 0;
  std::size_t col = 0;
  Scalar value;
};

struct SanityCount {
  std::string part;
  std::string kind;  // "rows" | "tuples" | "tokens"
  std::int64_t expected = 0;
};

struct SanityRegistry {
  std::vector<SanityPin> pins;
  std::vector<SanityCount> counts;

  static SanityRegistry parse(std::string_view text);
  static SanityRegistry load(const std::string& path);
  bool empty() const { return pins.empty() && counts.empty(); }
};

std::vector<Violation> run_sanity_checks(
    const std::map<std::string, data::DataState>& parts,
    const SanityRegistry& registry);

// Schema comparison: broken or narrowed -> major, extended -> minor,
// identical -> patch (content edits only).
ChangeClass classify_change(const FormatSchema& old_schema,
                            const FormatSchema& new_schema);

struct ReleaseRecord {
  DataVersion version;
  std::string parent_fingerprint;
  std::string fingerprint;
  ChangeClass change_class = ChangeClass::patch;
  std::size_t sample_n = 0;
  std::size_t m_observed = 0;
  std::size_t tests_passed = 0;
  std::string timestamp;  // UTC, ISO 8601

  std::string serialize() const;
  static ReleaseRecord parse(std::string_view line);
};

// Whole-dataset fingerprint: hash over part names and part fingerprints.
std::string dataset_fingerprint(
    const std::map<std::string, data::DataState>& parts);

std::map<std::string, data::DataState> load_parts(const std::string& dir,
                                                  const FormatSchema& schema);

enum class PipelineStatus {
  released,          // accepted and versioned
  rejected,          // oracle said no, or empty proposal
  validation_failed, // step 3.1 gates
  awaiting_review,   // review document emitted, verdicts pending
};

struct PipelineResult {
  PipelineStatus status = PipelineStatus::rejected;
  std::vector<Violation> violations;
  std::optional<ReleaseRecord> release;
  std::string review_path;
  std::string message;
  std::size_t sample_n = 0;
  std::size_t m_observed = 0;
};

struct PipelineConfig {
  decision::DecisionConfig decision{50, 25, 0.0};
  std::uint64_t seed = 0;

  static PipelineConfig load(const std::string& path);
};

// End-to-end Step 2-4 orchestration over dataset directories. First
// invocation validates, samples and emits the review document, then halts.
// Re-invocation with a completed review decides, applies the delta on
// accept, bumps the version and appends a changelog entry. Rejection
// leaves the base directory bit-identical. A lock file serializes
// concurrent runs over the same base.
PipelineResult run_pipeline(const std::string& base_dir,
                            const std::string& proposal_dir,
                            const PipelineConfig& config,
                            const std::string& review_path);

DataVersion current_version(const std::string& base_dir);
std::vector<ReleaseRecord> read_changelog(const std::string& base_dir);

}  // namespace curate::pipeline

#endif  // CURATE_PIPELINE_HPP
