// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#ifndef CURATE_SAMPLING_HPP
#define CURATE_SAMPLING_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "curate/edits.hpp"

namespace curate::sampling {

enum class Verdict { unreviewed, correct, incorrect };

const char* verdict_name(Verdict v);

struct SampleEntry {
  std::string edit_id;
  std::string stratum;
  Verdict verdict = Verdict::unreviewed;

  bool operator==(const SampleEntry&) const = default;
};

// A drawn review sample. `requested_n` is what the caller asked for;
// `n` is the effective sample size after clamping to the delta size
// (`exhaustive` marks a clamped, all-edits sample).
struct SampleReport {
  std::size_t requested_n = 0;
  std::size_t n = 0;
  bool exhaustive = false;
  std::uint64_t seed = 0;
  std::vector<SampleEntry> entries;

  std::size_t m_observed() const;
  std::size_t unreviewed_count() const;
};

struct StratumAllocation {
  std::string stratum;
  std::size_t size = 0;        // available edits in the stratum
  std::size_t allocation = 0;  // sampled edits
};

struct SamplePlan {
  std::size_t total_n = 0;
  std::uint64_t seed = 0;
  std::vector<StratumAllocation> strata;
};

// Simple random sample without replacement, uniform over the delta.
// n >= |delta| returns every edit and records the effective n.
SampleReport srs_sample(const data::EditSet& delta, std::size_t n,
                        std::uint64_t seed);

// Proportional allocation by largest remainder; ties and overflow are
// redistributed with a seeded shuffle so results are deterministic.
SamplePlan stratified_allocate(
    const std::vector<std::pair<std::string, std::size_t>>& stratum_sizes,
    std::size_t n, std::uint64_t seed);

// Stratified sample: allocate per stratum, then SRS within each stratum.
SampleReport stratified_sample(const data::EditSet& delta, std::size_t n,
                               std::uint64_t seed);

std::string serialize_report(const SampleReport& report);
SampleReport deserialize_report(std::string_view text);
SampleReport load_report(const std::string& path);
void save_report(const SampleReport& report, const std::string& path);

std::string serialize_plan(const SamplePlan& plan);
SamplePlan deserialize_plan(std::string_view text);

// Per-edit context shown to the reviewer.
struct ReviewContext {
  std::string edit_id;
  std::string path;       // source file the edit belongs to
  std::size_t line = 1;   // 1-based anchor in that file
  std::vector<std::string> hunk;  // unified-diff style lines
};

struct ReviewHeader {
  std::string base_fingerprint;
  std::string target_fingerprint;
};

// Emits one section per sampled edit: header line with the file path, a
// line anchor, the diff hunk in a fence, then exactly the two checkbox
// lines "- [ ] Correct" / "- [ ] Incorrect". Edits are keyed by stable id
// comments so reordered or hand-edited documents still parse.
std::string emit_review_document(const SampleReport& report,
                                 const std::vector<ReviewContext>& context,
                                 const ReviewHeader& header);

// Parses a (possibly checkbox-edited) review document back into the report.
// Exactly one checked box per edit is required; unknown edit ids are stale.
SampleReport parse_review_document(std::string_view document,
                                   const SampleReport& skeleton);

std::optional<ReviewHeader> peek_review_header(std::string_view document);

}  // namespace curate::sampling

#endif  // CURATE_SAMPLING_HPP
