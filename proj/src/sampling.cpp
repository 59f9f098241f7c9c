// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#include "curate/sampling.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "curate/rng.hpp"

namespace curate::sampling {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::unreviewed: return "unreviewed";
    case Verdict::correct: return "correct";
    case Verdict::incorrect: return "incorrect";
  }
  return "?";
}

std::size_t SampleReport::m_observed() const {
  std::size_t m = 0;
  for (const auto& e : entries) {
    if (e.verdict == Verdict::correct) ++m;
  }
  return m;
}

std::size_t SampleReport::unreviewed_count() const {
  std::size_t c = 0;
  for (const auto& e : entries) {
    if (e.verdict == Verdict::unreviewed) ++c;
  }
  return c;
}

SampleReport srs_sample(const data::EditSet& delta, std::size_t n,
                        std::uint64_t seed) {
  if (delta.empty()) {
    fail(ErrorCode::empty_proposal, "cannot sample from an empty delta");
  }
  if (n == 0) fail(ErrorCode::invalid_argument, "sample size must be positive");
  SampleReport report;
  report.requested_n = n;
  report.seed = seed;
  Rng rng(seed);
  if (n >= delta.size()) {
    report.n = delta.size();
    report.exhaustive = true;
    for (const auto& rec : delta.edits) {
      report.entries.push_back({rec.id, rec.stratum, Verdict::unreviewed});
    }
    return report;
  }
  report.n = n;
  for (std::size_t i : rng.sample_indices(delta.size(), n)) {
    const auto& rec = delta.edits[i];
    report.entries.push_back({rec.id, rec.stratum, Verdict::unreviewed});
  }
  return report;
}

SamplePlan stratified_allocate(
    const std::vector<std::pair<std::string, std::size_t>>& stratum_sizes,
    std::size_t n, std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::invalid_argument, "sample size must be positive");
  std::size_t total = 0;
  for (const auto& [name, size] : stratum_sizes) total += size;
  if (total == 0) {
    fail(ErrorCode::empty_proposal, "all strata are empty");
  }
  SamplePlan plan;
  plan.seed = seed;
  plan.total_n = std::min(n, total);
  plan.strata.reserve(stratum_sizes.size());
  for (const auto& [name, size] : stratum_sizes) {
    plan.strata.push_back({name, size, 0});
  }

  // Largest remainder over the strata that still have headroom; repeats
  // when caps truncate an allocation.
  Rng rng(derive_seed(seed, 0x5741));
  std::size_t remaining = plan.total_n;
  while (remaining > 0) {
    std::size_t open_total = 0;
    for (const auto& s : plan.strata) open_total += s.size - s.allocation;
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < plan.strata.size(); ++i) {
      if (plan.strata[i].allocation < plan.strata[i].size) open.push_back(i);
    }
    std::vector<double> remainder(plan.strata.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t i : open) {
      auto& s = plan.strata[i];
      double quota = static_cast<double>(remaining) *
                     static_cast<double>(s.size - s.allocation) /
                     static_cast<double>(open_total);
      std::size_t base = static_cast<std::size_t>(quota);
      base = std::min(base, s.size - s.allocation);
      s.allocation += base;
      assigned += base;
      remainder[i] = quota - static_cast<double>(base);
    }
    std::size_t leftover = remaining - assigned;
    if (leftover > 0) {
      // seeded shuffle breaks remainder ties deterministically
      std::vector<std::size_t> order;
      for (std::size_t i : open) {
        if (plan.strata[i].allocation < plan.strata[i].size) order.push_back(i);
      }
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return remainder[a] > remainder[b];
                       });
      for (std::size_t i : order) {
        if (leftover == 0) break;
        plan.strata[i].allocation += 1;
        --leftover;
      }
    }
    std::size_t allocated = 0;
    for (const auto& s : plan.strata) allocated += s.allocation;
    remaining = plan.total_n - allocated;
  }
  return plan;
}

SampleReport stratified_sample(const data::EditSet& delta, std::size_t n,
                               std::uint64_t seed) {
  if (delta.empty()) {
    fail(ErrorCode::empty_proposal, "cannot sample from an empty delta");
  }
  // group edit indices by stratum, preserving first-seen stratum order
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < delta.edits.size(); ++i) {
    const auto& stratum = delta.edits[i].stratum;
    auto it = group_of.find(stratum);
    if (it == group_of.end()) {
      group_of.emplace(stratum, groups.size());
      groups.push_back({stratum, {i}});
    } else {
      groups[it->second].second.push_back(i);
    }
  }
  std::vector<std::pair<std::string, std::size_t>> sizes;
  sizes.reserve(groups.size());
  for (const auto& [name, members] : groups) {
    sizes.emplace_back(name, members.size());
  }
  SamplePlan plan = stratified_allocate(sizes, n, seed);

  SampleReport report;
  report.requested_n = n;
  report.seed = seed;
  report.n = plan.total_n;
  report.exhaustive = plan.total_n >= delta.size();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g].second;
    std::size_t take = plan.strata[g].allocation;
    Rng rng(derive_seed(seed, 0x5354 + g));
    for (std::size_t idx : rng.sample_indices(members.size(), take)) {
      const auto& rec = delta.edits[members[idx]];
      report.entries.push_back({rec.id, rec.stratum, Verdict::unreviewed});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {
using nlohmann::json;
}

std::string serialize_report(const SampleReport& report) {
  json j;
  j["requested_n"] = report.requested_n;
  j["n"] = report.n;
  j["exhaustive"] = report.exhaustive;
  j["seed"] = report.seed;
  j["m_observed"] = report.m_observed();
  json entries = json::array();
  for (const auto& e : report.entries) {
    json je;
    je["edit_id"] = e.edit_id;
    if (!e.stratum.empty()) je["stratum"] = e.stratum;
    je["verdict"] = verdict_name(e.verdict);
    entries.push_back(std::move(je));
  }
  j["sample"] = std::move(entries);
  return j.dump(2) + "\n";
}

SampleReport deserialize_report(std::string_view text) {
  SampleReport report;
  try {
    json j = json::parse(text);
    report.requested_n = j.at("requested_n").get<std::size_t>();
    report.n = j.at("n").get<std::size_t>();
    report.exhaustive = j.at("exhaustive").get<bool>();
    report.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& je : j.at("sample")) {
      SampleEntry e;
      e.edit_id = je.at("edit_id").get<std::string>();
      if (je.contains("stratum")) e.stratum = je.at("stratum").get<std::string>();
      std::string v = je.at("verdict").get<std::string>();
      e.verdict = v == "correct"     ? Verdict::correct
                  : v == "incorrect" ? Verdict::incorrect
                                     : Verdict::unreviewed;
      report.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad sample report: ") + e.what());
  }
  return report;
}

SampleReport load_report(const std::string& path) {
  return deserialize_report(data::read_file(path));
}

void save_report(const SampleReport& report, const std::string& path) {
  data::write_file(path, serialize_report(report));
}

std::string serialize_plan(const SamplePlan& plan) {
  json j;
  j["total_n"] = plan.total_n;
  j["seed"] = plan.seed;
  json strata = json::array();
  for (const auto& s : plan.strata) {
    json js;
    js["stratum"] = s.stratum;
    js["size"] = s.size;
    js["allocation"] = s.allocation;
    strata.push_back(std::move(js));
  }
  j["strata"] = std::move(strata);
  return j.dump(2) + "\n";
}

SamplePlan deserialize_plan(std::string_view text) {
  SamplePlan plan;
  try {
    json j = json::parse(text);
    plan.total_n = j.at("total_n").get<std::size_t>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& js : j.at("strata")) {
      StratumAllocation s;
      s.stratum = js.at("stratum").get<std::string>();
      s.size = js.at("size").get<std::size_t>();
      s.allocation = js.at("allocation").get<std::size_t>();
      plan.strata.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad sample plan: ") + e.what());
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Review documents

namespace {

constexpr const char* kEditMarker = "<!-- edit ";
constexpr const char* kCorrectBox = "Correct";
constexpr const char* kIncorrectBox = "Incorrect";

}  // namespace

std::string emit_review_document(const SampleReport& report,
                                 const std::vector<ReviewContext>& context,
                                 const ReviewHeader& header) {
  if (report.entries.empty()) {
    fail(ErrorCode::empty_proposal, "nothing sampled, no review to emit");
  }
  if (report.unreviewed_count() != report.entries.size()) {
    fail(ErrorCode::invalid_argument,
         "review emission expects a fresh (unreviewed) sample");
  }
  std::unordered_map<std::string, const ReviewContext*> by_id;
  for (const auto& c : context) by_id[c.edit_id] = &c;

  std::ostringstream out;
  out << "# Edit review\n";
  out << "base: " << header.base_fingerprint << "\n";
  out << "proposal: " << header.target_fingerprint << "\n";
  out << "n: " << report.n << "\n";
  out << "\nCheck exactly one box per edit.\n";
  for (const auto& e : report.entries) {
    auto it = by_id.find(e.edit_id);
    if (it == by_id.end()) {
      fail(ErrorCode::internal, "no review context for edit " + e.edit_id);
    }
    const ReviewContext& c = *it->second;
    out << "\n## " << c.path << "\n";
    out << "Line " << c.line << "\n";
    out << kEditMarker << e.edit_id << " -->\n";
    out << "```diff\n";
    for (const auto& line : c.hunk) out << line << "\n";
    out << "```\n";
    out << "- [ ] " << kCorrectBox << "\n";
    out << "- [ ] " << kIncorrectBox << "\n";
  }
  return out.str();
}

namespace {

// "- [x] Correct" / "- [ ] Incorrect"; x is case-insensitive.
std::optional<std::pair<bool, bool>> parse_checkbox(std::string_view line) {
  std::size_t i = line.find_first_not_of(" \t");
  if (i == std::string_view::npos) return std::nullopt;
  line = line.substr(i);
  if (line.substr(0, 3) != "- [") return std::nullopt;
  if (line.size() < 5 || line[4] != ']') return std::nullopt;
  char mark = line[3];
  bool checked = mark == 'x' || mark == 'X';
  if (!checked && mark != ' ') return std::nullopt;
  std::string_view rest = line.substr(5);
  std::size_t j = rest.find_first_not_of(" \t");
  if (j == std::string_view::npos) return std::nullopt;
  rest = rest.substr(j);
  while (!rest.empty() && (rest.back() == '\r' || rest.back() == ' ')) {
    rest.remove_suffix(1);
  }
  if (rest == kCorrectBox) return std::make_pair(true, checked);
  if (rest == kIncorrectBox) return std::make_pair(false, checked);
  return std::nullopt;
}

}  // namespace

std::optional<ReviewHeader> peek_review_header(std::string_view document) {
  ReviewHeader h;
  std::istringstream in{std::string(document)};
  std::string line;
  bool base = false, target = false;
  while (std::getline(in, line) && (!base || !target)) {
    if (line.rfind("base: ", 0) == 0) {
      h.base_fingerprint = line.substr(6);
      base = true;
    } else if (line.rfind("proposal: ", 0) == 0) {
      h.target_fingerprint = line.substr(10);
      target = true;
    }
  }
  if (!base || !target) return std::nullopt;
  return h;
}

SampleReport parse_review_document(std::string_view document,
                                   const SampleReport& skeleton) {
  struct Boxes {
    bool correct_checked = false;
    bool incorrect_checked = false;
    int boxes_seen = 0;
  };
  std::map<std::string, Boxes> found;
  std::istringstream in{std::string(document)};
  std::string line;
  std::string current_id;
  while (std::getline(in, line)) {
    std::size_t pos = line.find(kEditMarker);
    if (pos != std::string::npos) {
      std::size_t start = pos + std::string_view(kEditMarker).size();
      std::size_t end = line.find(' ', start);
      if (end == std::string::npos) end = line.size();
      current_id = line.substr(start, end - start);
      found[current_id];  // section may end up with zero boxes
      continue;
    }
    if (current_id.empty()) continue;
    if (auto box = parse_checkbox(line)) {
      auto& b = found[current_id];
      b.boxes_seen++;
      if (box->first) {
        b.correct_checked = b.correct_checked || box->second;
      } else {
        b.incorrect_checked = b.incorrect_checked || box->second;
      }
    }
  }

  std::unordered_map<std::string, std::size_t> expected;
  for (std::size_t i = 0; i < skeleton.entries.size(); ++i) {
    expected[skeleton.entries[i].edit_id] = i;
  }
  for (const auto& [id, boxes] : found) {
    if (!expected.count(id)) {
      fail(ErrorCode::stale_review,
           "review mentions unknown edit " + id);
    }
    (void)boxes;
  }

  SampleReport report = skeleton;
  for (auto& e : report.entries) {
    auto it = found.find(e.edit_id);
    if (it == found.end()) {
      fail(ErrorCode::review_incomplete,
           "review is missing edit " + e.edit_id);
    }
    const Boxes& b = it->second;
    if (b.correct_checked == b.incorrect_checked) {
      fail(ErrorCode::review_incomplete,
           std::string("edit ") + e.edit_id +
               (b.correct_checked ? " has both boxes checked"
                                  : " has no box checked"));
    }
    e.verdict = b.correct_checked ? Verdict::correct : Verdict::incorrect;
  }
  return report;
}

}  // namespace curate::sampling
