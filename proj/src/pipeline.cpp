// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#include "curate/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "curate/rng.hpp"

namespace curate::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string DataVersion::str() const {
  return std::to_string(major) + "." + std::to_string(minor) + "." +
         std::to_string(patch);
}

DataVersion DataVersion::parse(std::string_view text) {
  DataVersion v;
  int fields = std::sscanf(std::string(text).c_str(), "%d.%d.%d", &v.major,
                           &v.minor, &v.patch);
  if (fields != 3 || v.major < 0 || v.minor < 0 || v.patch < 0) {
    fail(ErrorCode::validation_failed,
         "bad version string '" + std::string(text) + "'");
  }
  return v;
}

const char* change_class_name(ChangeClass c) {
  switch (c) {
    case ChangeClass::major: return "major";
    case ChangeClass::minor: return "minor";
    case ChangeClass::patch: return "patch";
  }
  return "?";
}

DataVersion bump_version(const DataVersion& v, ChangeClass c) {
  // before 1.0.0 only major and minor versioning is followed: breaking
  // changes bump the minor number
  if (c == ChangeClass::major && v.major == 0) {
    return DataVersion{0, v.minor + 1, 0};
  }
  switch (c) {
    case ChangeClass::major: return DataVersion{v.major + 1, 0, 0};
    case ChangeClass::minor: return DataVersion{v.major, v.minor + 1, 0};
    case ChangeClass::patch: return DataVersion{v.major, v.minor, v.patch + 1};
  }
  return v;
}

// ---------------------------------------------------------------------------
// Schemas

FormatSchema FormatSchema::parse(std::string_view text) {
  FormatSchema schema;
  try {
    json j = json::parse(text);
    for (const auto& jp : j.at("parts")) {
      PartSchema part;
      part.name = jp.at("name").get<std::string>();
      part.format = data::parse_format(jp.at("format").get<std::string>());
      if (part.format == data::Format::token_sequence) {
        for (const auto& f : jp.at("files")) {
          part.files.push_back(f.get<std::string>());
        }
      } else {
        part.path = jp.at("path").get<std::string>();
      }
      if (part.format == data::Format::fixed_table) {
        part.rows = jp.at("rows").get<std::size_t>();
        for (const auto& c : jp.at("columns")) {
          part.columns.push_back(c.get<std::string>());
        }
      }
      if (part.format == data::Format::indexed_table && jp.contains("column_ids")) {
        for (const auto& c : jp.at("column_ids")) {
          part.column_ids.push_back(c.get<std::int64_t>());
        }
      }
      schema.parts.push_back(std::move(part));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad schema: ") + e.what());
  }
  return schema;
}

FormatSchema FormatSchema::load(const std::string& path) {
  return parse(data::read_file(path));
}

std::string FormatSchema::serialize() const {
  json j;
  json parts = json::array();
  for (const auto& p : this->parts) {
    json jp;
    jp["name"] = p.name;
    jp["format"] = data::format_name(p.format);
    if (p.format == data::Format::token_sequence) {
      jp["files"] = p.files;
    } else {
      jp["path"] = p.path;
    }
    if (p.format == data::Format::fixed_table) {
      jp["rows"] = p.rows;
      jp["columns"] = p.columns;
    }
    if (p.format == data::Format::indexed_table && !p.column_ids.empty()) {
      jp["column_ids"] = p.column_ids;
    }
    parts.push_back(std::move(jp));
  }
  j["parts"] = std::move(parts);
  return j.dump(2) + "\n";
}

const PartSchema* FormatSchema::find(const std::string& name) const {
  for (const auto& p : parts) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Validation gates

std::vector<Violation> validate_format(const std::string& dir,
                                       const FormatSchema& schema) {
  std::vector<Violation> violations;
  std::set<std::string> declared;
  for (const auto& part : schema.parts) {
    std::vector<std::string> files =
        part.format == data::Format::token_sequence
            ? part.files
            : std::vector<std::string>{part.path};
    for (const auto& rel : files) {
      declared.insert(rel);
      fs::path p = fs::path(dir) / rel;
      if (!fs::exists(p)) {
        violations.push_back({part.name, "file has been removed: " + rel});
        continue;
      }
      if (part.format == data::Format::token_sequence) continue;
      try {
        data::DataState state = data::load_state(part.format, p.string());
        if (part.format == data::Format::fixed_table) {
          const auto& t = std::get<data::FixedTable>(state);
          if (t.columns != part.columns) {
            std::string missing;
            for (const auto& c : part.columns) {
              if (std::find(t.columns.begin(), t.columns.end(), c) ==
                  t.columns.end()) {
                missing = c;
                break;
              }
            }
            violations.push_back(
                {part.name, missing.empty()
                                ? "column set differs from schema"
                                : "required column missing: " + missing});
          } else if (t.row_count() != part.rows) {
            violations.push_back(
                {part.name, "row count " + std::to_string(t.row_count()) +
                                " differs from declared " +
                                std::to_string(part.rows)});
          }
        } else {
          const auto& t = std::get<data::IndexedTable>(state);
          if (!part.column_ids.empty()) {
            std::set<std::int64_t> allowed(part.column_ids.begin(),
                                           part.column_ids.end());
            for (const auto& [key, value] : t.tuples) {
              if (!allowed.count(key.second)) {
                violations.push_back(
                    {part.name, "tuple uses undeclared column " +
                                    std::to_string(key.second)});
                break;
              }
            }
          }
        }
      } catch (const CurateError& e) {
        violations.push_back({part.name, e.what()});
      }
    }
  }
  // unexpected data files count as unintended additions
  static const std::set<std::string> kMeta = {"schema.json", "assertions.json",
                                              "CHANGELOG", "config.json"};
  std::error_code ec;
  for (fs::recursive_directory_iterator it(dir, ec), end; it != end && !ec;
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    std::string rel = fs::relative(it->path(), dir).string();
    if (rel.rfind('.', 0) == 0 || kMeta.count(rel)) continue;
    if (!declared.count(rel)) {
      violations.push_back({"", "unexpected file: " + rel});
    }
  }
  return violations;
}

std::map<std::string, data::DataState> load_parts(const std::string& dir,
                                                  const FormatSchema& schema) {
  std::map<std::string, data::DataState> out;
  for (const auto& part : schema.parts) {
    if (part.format == data::Format::token_sequence) {
      for (const auto& rel : part.files) {
        out.emplace(rel, data::load_state(part.format,
                                          (fs::path(dir) / rel).string()));
      }
    } else {
      out.emplace(part.name, data::load_state(
                                 part.format, (fs::path(dir) / part.path).string()));
    }
  }
  return out;
}

SanityRegistry SanityRegistry::parse(std::string_view text) {
  SanityRegistry reg;
  try {
    json j = json::parse(text);
    if (j.contains("pins")) {
      for (const auto& jp : j.at("pins")) {
        SanityPin pin;
        pin.part = jp.at("part").get<std::string>();
        pin.row = jp.at("row").get<std::size_t>();
        pin.col = jp.at("col").get<std::size_t>();
        pin.value = parse_scalar(jp.at("value").get<std::string>());
        reg.pins.push_back(std::move(pin));
      }
    }
    if (j.contains("counts")) {
      for (const auto& jc : j.at("counts")) {
        SanityCount count;
        count.part = jc.at("part").get<std::string>();
        count.kind = jc.at("kind").get<std::string>();
        count.expected = jc.at("expected").get<std::int64_t>();
        reg.counts.push_back(std::move(count));
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad assertions file: ") + e.what());
  }
  return reg;
}

SanityRegistry SanityRegistry::load(const std::string& path) {
  return parse(data::read_file(path));
}

std::vector<Violation> run_sanity_checks(
    const std::map<std::string, data::DataState>& parts,
    const SanityRegistry& registry) {
  std::vector<Violation> violations;
  for (const auto& pin : registry.pins) {
    auto it = parts.find(pin.part);
    if (it == parts.end()) {
      violations.push_back({pin.part, "pinned part is missing"});
      continue;
    }
    const auto* table = std::get_if<data::FixedTable>(&it->second);
    if (!table) {
      violations.push_back({pin.part, "pins only apply to fixed tables"});
      continue;
    }
    if (pin.row >= table->row_count() || pin.col >= table->col_count()) {
      violations.push_back({pin.part, "pinned cell is out of range"});
      continue;
    }
    if (!scalar_eq(table->rows[pin.row][pin.col], pin.value)) {
      violations.push_back(
          {pin.part, "pinned cell (" + std::to_string(pin.row) + "," +
                         std::to_string(pin.col) + ") regressed to '" +
                         format_scalar(table->rows[pin.row][pin.col]) +
                         "', expected '" + format_scalar(pin.value) + "'"});
    }
  }
  for (const auto& count : registry.counts) {
    auto it = parts.find(count.part);
    if (it == parts.end()) {
      violations.push_back({count.part, "counted part is missing"});
      continue;
    }
    std::int64_t actual = -1;
    if (const auto* t = std::get_if<data::FixedTable>(&it->second)) {
      if (count.kind == "rows") actual = static_cast<std::int64_t>(t->row_count());
    } else if (const auto* t = std::get_if<data::IndexedTable>(&it->second)) {
      if (count.kind == "tuples") actual = static_cast<std::int64_t>(t->size());
    } else if (const auto* t = std::get_if<data::TokenSequence>(&it->second)) {
      if (count.kind == "tokens") actual = static_cast<std::int64_t>(t->size());
    }
    if (actual < 0) {
      violations.push_back({count.part, "count kind '" + count.kind +
                                            "' does not apply to this part"});
    } else if (actual != count.expected) {
      violations.push_back({count.part, count.kind + " = " +
                                            std::to_string(actual) +
                                            ", expected " +
                                            std::to_string(count.expected)});
    }
  }
  return violations;
}

// ---------------------------------------------------------------------------
// Change classification

namespace {

template <typename T>
bool is_superset(const std::vector<T>& big, const std::vector<T>& small) {
  std::set<T> have(big.begin(), big.end());
  for (const auto& x : small) {
    if (!have.count(x)) return false;
  }
  return true;
}

}  // namespace

ChangeClass classify_change(const FormatSchema& old_schema,
                            const FormatSchema& new_schema) {
  bool extended = false;
  for (const auto& old_part : old_schema.parts) {
    const PartSchema* np = new_schema.find(old_part.name);
    if (!np || np->format != old_part.format) return ChangeClass::major;
    switch (old_part.format) {
      case data::Format::fixed_table: {
        // old columns must survive as a prefix; appended columns and rows
        // extend the format, anything else breaks it
        if (np->columns.size() < old_part.columns.size() ||
            !std::equal(old_part.columns.begin(), old_part.columns.end(),
                        np->columns.begin())) {
          return ChangeClass::major;
        }
        if (np->rows < old_part.rows) return ChangeClass::major;
        if (np->columns.size() > old_part.columns.size() ||
            np->rows > old_part.rows) {
          extended = true;
        }
        break;
      }
      case data::Format::indexed_table: {
        if (!is_superset(np->column_ids, old_part.column_ids)) {
          return ChangeClass::major;
        }
        if (np->column_ids.size() > old_part.column_ids.size()) extended = true;
        break;
      }
      case data::Format::token_sequence: {
        if (!is_superset(np->files, old_part.files)) return ChangeClass::major;
        if (np->files.size() > old_part.files.size()) extended = true;
        break;
      }
    }
  }
  for (const auto& new_part : new_schema.parts) {
    if (!old_schema.find(new_part.name)) extended = true;
  }
  return extended ? ChangeClass::minor : ChangeClass::patch;
}

// ---------------------------------------------------------------------------
// Releases

std::string dataset_fingerprint(
    const std::map<std::string, data::DataState>& parts) {
  std::uint64_t h = fnv1a64("dataset");
  for (const auto& [name, state] : parts) {
    h = fnv1a64(name, h);
    h = fnv1a64(data::fingerprint(state), h);
  }
  return to_hex(h);
}

std::string ReleaseRecord::serialize() const {
  json j;
  j["version"] = version.str();
  j["parent"] = parent_fingerprint;
  j["fingerprint"] = fingerprint;
  j["class"] = change_class_name(change_class);
  j["n"] = sample_n;
  j["m_observed"] = m_observed;
  j["tests_passed"] = tests_passed;
  j["timestamp"] = timestamp;
  return j.dump();
}

ReleaseRecord ReleaseRecord::parse(std::string_view line) {
  ReleaseRecord rec;
  try {
    json j = json::parse(line);
    rec.version = DataVersion::parse(j.at("version").get<std::string>());
    rec.parent_fingerprint = j.at("parent").get<std::string>();
    rec.fingerprint = j.at("fingerprint").get<std::string>();
    std::string cls = j.at("class").get<std::string>();
    rec.change_class = cls == "major"   ? ChangeClass::major
                       : cls == "minor" ? ChangeClass::minor
                                        : ChangeClass::patch;
    rec.sample_n = j.at("n").get<std::size_t>();
    rec.m_observed = j.at("m_observed").get<std::size_t>();
    rec.tests_passed = j.at("tests_passed").get<std::size_t>();
    rec.timestamp = j.at("timestamp").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad changelog entry: ") + e.what());
  }
  return rec;
}

std::vector<ReleaseRecord> read_changelog(const std::string& base_dir) {
  fs::path p = fs::path(base_dir) / "CHANGELOG";
  std::vector<ReleaseRecord> out;
  if (!fs::exists(p)) return out;
  std::istringstream in(data::read_file(p.string()));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(ReleaseRecord::parse(line));
  }
  return out;
}

DataVersion current_version(const std::string& base_dir) {
  auto log = read_changelog(base_dir);
  if (log.empty()) return DataVersion{0, 1, 0};
  return log.back().version;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  PipelineConfig cfg;
  try {
    json j = json::parse(data::read_file(path));
    cfg.decision.n = j.at("n").get<int>();
    cfg.decision.m = j.at("m").get<int>();
    if (j.contains("epsilon")) cfg.decision.epsilon = j.at("epsilon").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad pipeline config: ") + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// The pipeline itself

namespace {

struct LockFile {
  std::string path;
  explicit LockFile(const std::string& dir) {
    path = (fs::path(dir) / ".curate.lock").string();
    int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      fail(ErrorCode::internal,
           "another pipeline run holds the lock " + path);
    }
    ::close(fd);
  }
  ~LockFile() { ::unlink(path.c_str()); }
};

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

struct DeltaPart {
  std::string label;
  std::string display_path;
  data::DataState base_state;
  data::EditSet edits;
};

}  // namespace

PipelineResult run_pipeline(const std::string& base_dir,
                            const std::string& proposal_dir,
                            const PipelineConfig& config,
                            const std::string& review_path) {
  LockFile lock(base_dir);
  PipelineResult result;

  FormatSchema base_schema =
      FormatSchema::load((fs::path(base_dir) / "schema.json").string());
  fs::path proposal_schema_path = fs::path(proposal_dir) / "schema.json";
  FormatSchema proposal_schema = fs::exists(proposal_schema_path)
                                     ? FormatSchema::load(proposal_schema_path.string())
                                     : base_schema;

  // Step 3.1 gates run before any sampling.
  result.violations = validate_format(proposal_dir, proposal_schema);
  if (result.violations.empty()) {
    auto proposal_parts = load_parts(proposal_dir, proposal_schema);
    fs::path assertions = fs::path(base_dir) / "assertions.json";
    SanityRegistry registry;
    if (fs::exists(assertions)) {
      registry = SanityRegistry::load(assertions.string());
    }
    auto sanity = run_sanity_checks(proposal_parts, registry);
    result.violations.insert(result.violations.end(), sanity.begin(),
                             sanity.end());
  }
  if (!result.violations.empty()) {
    result.status = PipelineStatus::validation_failed;
    result.message = "proposal failed step 3.1 gates";
    return result;
  }

  auto base_parts = load_parts(base_dir, base_schema);
  auto proposal_parts = load_parts(proposal_dir, proposal_schema);
  ChangeClass change_class = classify_change(base_schema, proposal_schema);

  // Per-part deltas; parts and files double as sampling strata.
  std::vector<DeltaPart> deltas;
  data::EditSet combined;
  for (const auto& [label, base_state] : base_parts) {
    auto it = proposal_parts.find(label);
    if (it == proposal_parts.end()) continue;
    if (data::format_of(base_state) != data::format_of(it->second)) continue;
    if (const auto* bt = std::get_if<data::FixedTable>(&base_state)) {
      const auto& pt = std::get<data::FixedTable>(it->second);
      if (bt->row_count() != pt.row_count() || bt->col_count() != pt.col_count()) {
        continue;  // shape changes are reviewed at the schema level
      }
    }
    data::EditSet set = data::enumerate_edits(base_state, it->second);
    if (set.empty()) continue;
    DeltaPart dp;
    dp.label = label;
    dp.display_path = label;
    dp.base_state = base_state;
    for (auto& rec : set.edits) {
      rec.stratum = label;
      combined.edits.push_back(rec);
    }
    dp.edits = std::move(set);
    deltas.push_back(std::move(dp));
  }
  // new sequence files enter as pure insertions against an empty sequence
  for (const auto& [label, prop_state] : proposal_parts) {
    if (base_parts.count(label)) continue;
    if (!std::holds_alternative<data::TokenSequence>(prop_state)) continue;
    data::TokenSequence empty;
    data::EditSet set = data::enumerate_edits(data::DataState{empty}, prop_state);
    if (set.empty()) continue;
    DeltaPart dp;
    dp.label = label;
    dp.display_path = label;
    dp.base_state = data::DataState{empty};
    for (auto& rec : set.edits) {
      rec.stratum = label;
      combined.edits.push_back(rec);
    }
    dp.edits = std::move(set);
    deltas.push_back(std::move(dp));
  }

  std::string base_fp = dataset_fingerprint(base_parts);
  std::string proposal_fp = dataset_fingerprint(proposal_parts);
  combined.base_fingerprint = base_fp;

  if (combined.empty()) {
    result.status = PipelineStatus::rejected;
    result.message = "empty proposal: nothing differs from the base";
    return result;
  }

  sampling::SampleReport skeleton = sampling::stratified_sample(
      combined, static_cast<std::size_t>(config.decision.n), config.seed);
  result.sample_n = skeleton.n;

  bool have_review = false;
  std::string review_text;
  if (fs::exists(review_path)) {
    review_text = data::read_file(review_path);
    auto header = sampling::peek_review_header(review_text);
    if (header && header->base_fingerprint == base_fp &&
        header->target_fingerprint == proposal_fp) {
      have_review = true;
    } else if (header) {
      fail(ErrorCode::stale_review,
           "review at " + review_path + " was made for other fingerprints");
    }
  }

  if (!have_review) {
    // emit the review document and halt awaiting verdicts
    std::unordered_map<std::string, std::pair<const DeltaPart*, const data::Edit*>>
        edit_lookup;
    for (const auto& dp : deltas) {
      for (const auto& rec : dp.edits.edits) {
        edit_lookup[rec.id] = {&dp, &rec.edit};
      }
    }
    std::vector<sampling::ReviewContext> context;
    context.reserve(skeleton.entries.size());
    for (const auto& entry : skeleton.entries) {
      auto [dp, edit] = edit_lookup.at(entry.edit_id);
      data::EditHunk hunk = data::render_hunk(dp->base_state, *edit);
      sampling::ReviewContext rc;
      rc.edit_id = entry.edit_id;
      rc.path = dp->display_path;
      rc.line = hunk.line;
      rc.hunk = std::move(hunk.lines);
      context.push_back(std::move(rc));
    }
    std::string doc = sampling::emit_review_document(
        skeleton, context, sampling::ReviewHeader{base_fp, proposal_fp});
    data::write_file(review_path, doc);
    result.status = PipelineStatus::awaiting_review;
    result.review_path = review_path;
    result.message = "review document emitted; fill the checkboxes and rerun";
    return result;
  }

  sampling::SampleReport reviewed =
      sampling::parse_review_document(review_text, skeleton);
  result.m_observed = reviewed.m_observed();
  decision::Outcome outcome = decision::decide(reviewed, config.decision);
  if (outcome == decision::Outcome::reject) {
    result.status = PipelineStatus::rejected;
    result.message = "rejected: " + std::to_string(reviewed.m_observed()) +
                     " of " + std::to_string(reviewed.n) +
                     " sampled edits correct, threshold " +
                     std::to_string(decision::effective_threshold(
                         reviewed, config.decision));
    return result;
  }

  // Accept: the per-part deltas must reproduce the proposal exactly.
  for (const auto& dp : deltas) {
    data::DataState applied = data::apply_edits(dp.base_state, dp.edits);
    const auto& expect = proposal_parts.at(dp.label);
    if (data::fingerprint(applied) != data::fingerprint(expect)) {
      fail(ErrorCode::internal,
           "delta for part " + dp.label + " does not reproduce the proposal");
    }
  }
  // adopt the proposal: schema, then parts in canonical serialization
  data::write_file((fs::path(base_dir) / "schema.json").string(),
                   proposal_schema.serialize());
  for (const auto& part : proposal_schema.parts) {
    if (part.format == data::Format::token_sequence) {
      for (const auto& rel : part.files) {
        fs::create_directories((fs::path(base_dir) / rel).parent_path());
        data::save_state(proposal_parts.at(rel),
                         (fs::path(base_dir) / rel).string());
      }
    } else {
      data::save_state(proposal_parts.at(part.name),
                       (fs::path(base_dir) / part.path).string());
    }
  }

  ReleaseRecord record;
  record.version = bump_version(current_version(base_dir), change_class);
  record.parent_fingerprint = base_fp;
  record.fingerprint = proposal_fp;
  record.change_class = change_class;
  record.sample_n = reviewed.n;
  record.m_observed = reviewed.m_observed();
  SanityRegistry registry;
  fs::path assertions = fs::path(base_dir) / "assertions.json";
  if (fs::exists(assertions)) registry = SanityRegistry::load(assertions.string());
  record.tests_passed = registry.pins.size() + registry.counts.size();
  record.timestamp = utc_timestamp();

  std::ofstream log((fs::path(base_dir) / "CHANGELOG").string(),
                    std::ios::app | std::ios::binary);
  if (!log) fail(ErrorCode::io_error, "cannot append to the changelog");
  log << record.serialize() << "\n";
  log.close();

  result.status = PipelineStatus::released;
  result.release = record;
  result.message = "released " + record.version.str();
  return result;
}

}  // namespace curate::pipeline
