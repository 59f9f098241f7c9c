// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
//
// Command-line front end. Everything goes through the C API in curate.h;
// this translation unit holds argument parsing and exit-code mapping only.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curate.h"

namespace {

// 0 accept/success, 2 reject, 3 validation failure, 4 incomplete review,
// 1 anything else.
int exit_code(curate_status status) {
  switch (status) {
    case CURATE_OK: return 0;
    case CURATE_REJECTED:
    case CURATE_EMPTY_PROPOSAL: return 2;
    case CURATE_VALIDATION_FAILED: return 3;
    case CURATE_REVIEW_INCOMPLETE: return 4;
    default: return 1;
  }
}

int finish(curate_status status) {
  if (status != CURATE_OK) {
    std::fprintf(stderr, "curate: %s", curate_status_name(status));
    const char* detail = curate_last_error();
    if (detail && *detail) std::fprintf(stderr, ": %s", detail);
    std::fprintf(stderr, "\n");
  }
  return exit_code(status);
}

curate_format parse_format_flag(const std::string& name) {
  if (name == "table") return CURATE_FORMAT_TABLE;
  if (name == "indexed") return CURATE_FORMAT_INDEXED;
  return CURATE_FORMAT_SEQ;
}

struct StateHandle {
  curate_state* ptr = nullptr;
  ~StateHandle() { curate_state_free(ptr); }
};
struct EditsetHandle {
  curate_editset* ptr = nullptr;
  ~EditsetHandle() { curate_editset_free(ptr); }
};
struct ReportHandle {
  curate_report* ptr = nullptr;
  ~ReportHandle() { curate_report_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curate: iterative data curation toolkit"};
  app.require_subcommand(1);

  std::string format = "seq";
  std::uint64_t seed = 0;
  std::string config_path;
  app.add_option("--format", format, "data format: table|indexed|seq")
      ->check(CLI::IsMember({"table", "indexed", "seq"}));
  app.add_option("--seed", seed, "seed for all randomized steps");
  app.add_option("--config", config_path, "configuration file");

  // diff
  auto* diff = app.add_subcommand("diff", "edit set between two states");
  std::string diff_base, diff_target, diff_out;
  diff->add_option("base", diff_base)->required();
  diff->add_option("target", diff_target)->required();
  diff->add_option("-o,--out", diff_out, "write the edit set here");

  // sample
  auto* sample = app.add_subcommand("sample", "draw a review sample");
  std::string sample_editset, sample_out;
  std::uint32_t sample_n = 50;
  bool sample_stratified = false;
  sample->add_option("editset", sample_editset)->required();
  sample->add_option("-n", sample_n, "sample size");
  sample->add_flag("--stratified", sample_stratified,
                   "allocate proportionally across strata");
  sample->add_option("-o,--out", sample_out, "write the sample report here")
      ->required();

  // review emit | ingest
  auto* review = app.add_subcommand("review", "emit or ingest review documents");
  review->require_subcommand(1);
  auto* emit = review->add_subcommand("emit", "write a review document");
  std::string emit_editset, emit_report, emit_base, emit_target, emit_label,
      emit_out;
  emit->add_option("--editset", emit_editset)->required();
  emit->add_option("--report", emit_report)->required();
  emit->add_option("--base", emit_base)->required();
  emit->add_option("--target", emit_target)->required();
  emit->add_option("--label", emit_label, "file label shown to reviewers");
  emit->add_option("-o,--out", emit_out)->required();
  auto* ingest = review->add_subcommand("ingest", "read verdicts back");
  std::string ingest_review, ingest_report, ingest_out;
  ingest->add_option("--review", ingest_review)->required();
  ingest->add_option("--report", ingest_report, "sample skeleton")->required();
  ingest->add_option("-o,--out", ingest_out)->required();

  // decide
  auto* decide = app.add_subcommand("decide", "apply the accept/reject rule");
  std::string decide_report;
  std::int32_t decide_n = 50, decide_m = 25;
  double decide_eps = 0.0;
  decide->add_option("report", decide_report)->required();
  decide->add_option("-n", decide_n, "sample size of the rule");
  decide->add_option("-m", decide_m, "acceptance threshold");
  decide->add_option("--epsilon", decide_eps, "oracle noise rate");

  // threshold
  auto* threshold = app.add_subcommand(
      "threshold", "minimum convergence thresholds as CSV");
  double thr_a = 1.0;
  std::int32_t thr_n_min = 10, thr_n_max = 1000;
  std::size_t thr_points = 16;
  std::string thr_out;
  threshold->add_option("-a", thr_a, "prior density floor on [0, 1/2)");
  threshold->add_option("--n-min", thr_n_min);
  threshold->add_option("--n-max", thr_n_max);
  threshold->add_option("--points", thr_points, "log-spaced n values");
  threshold->add_option("-o,--out", thr_out)->required();

  // rate
  auto* rate = app.add_subcommand("rate", "improvement-rate curve as CSV");
  std::int32_t rate_n = 10;
  double rate_alpha = 1.0, rate_beta = 1.0, rate_lambda = 0.5;
  std::string rate_cond = "atleast";
  std::string rate_out;
  rate->add_option("-n", rate_n, "sample size");
  rate->add_option("--alpha", rate_alpha, "Beta prior alpha for r");
  rate->add_option("--beta", rate_beta, "Beta prior beta for r");
  rate->add_option("--lambda-mean", rate_lambda, "E[lambda]");
  rate->add_option("--conditioning", rate_cond, "equal|atleast")
      ->check(CLI::IsMember({"equal", "atleast"}));
  rate->add_option("-o,--out", rate_out)->required();

  // simulate <kind>
  auto* simulate = app.add_subcommand("simulate", "run a simulation study");
  simulate->require_subcommand(1);
  std::string sim_out_dir = "sim-out";
  std::string sim_kind;
  for (const char* kind : {"bpre", "text", "tests", "noisy"}) {
    auto* sub = simulate->add_subcommand(kind);
    sub->add_option("--out-dir", sim_out_dir, "output directory");
    sub->callback([&sim_kind, kind] { sim_kind = kind; });
  }

  // validate
  auto* validate = app.add_subcommand("validate", "check files against a schema");
  std::string validate_dir, validate_schema;
  validate->add_option("dir", validate_dir)->required();
  validate->add_option("--schema", validate_schema,
                       "schema file (default: dir/schema.json)");

  // release
  auto* release = app.add_subcommand(
      "release", "run the curation pipeline over a proposal");
  std::string rel_base, rel_proposal, rel_review = "review.md";
  release->add_option("--base", rel_base, "base dataset directory")->required();
  release->add_option("--proposal", rel_proposal, "proposal directory")
      ->required();
  release->add_option("--review", rel_review, "review document path");

  CLI11_PARSE(app, argc, argv);

  if (diff->parsed()) {
    StateHandle base, target;
    curate_format f = parse_format_flag(format);
    if (auto s = curate_state_load(f, diff_base.c_str(), &base.ptr))
      return finish(s);
    if (auto s = curate_state_load(f, diff_target.c_str(), &target.ptr))
      return finish(s);
    EditsetHandle delta;
    if (auto s = curate_diff(base.ptr, target.ptr, &delta.ptr))
      return finish(s);
    std::uint64_t size = 0;
    curate_editset_size(delta.ptr, &size);
    std::printf("%" PRIu64 " edits\n", size);
    if (!diff_out.empty()) {
      if (auto s = curate_editset_save(delta.ptr, diff_out.c_str()))
        return finish(s);
    }
    return finish(CURATE_OK);
  }

  if (sample->parsed()) {
    EditsetHandle delta;
    if (auto s = curate_editset_load(sample_editset.c_str(), &delta.ptr))
      return finish(s);
    ReportHandle report;
    curate_status s =
        sample_stratified
            ? curate_stratified_sample(delta.ptr, sample_n, seed, &report.ptr)
            : curate_srs_sample(delta.ptr, sample_n, seed, &report.ptr);
    if (s) return finish(s);
    std::uint64_t n = 0;
    curate_report_counts(report.ptr, &n, nullptr, nullptr);
    std::printf("sampled %" PRIu64 " edits\n", n);
    return finish(curate_report_save(report.ptr, sample_out.c_str()));
  }

  if (emit->parsed()) {
    curate_format f = parse_format_flag(format);
    EditsetHandle delta;
    ReportHandle report;
    StateHandle base, target;
    if (auto s = curate_editset_load(emit_editset.c_str(), &delta.ptr))
      return finish(s);
    if (auto s = curate_report_load(emit_report.c_str(), &report.ptr))
      return finish(s);
    if (auto s = curate_state_load(f, emit_base.c_str(), &base.ptr))
      return finish(s);
    if (auto s = curate_state_load(f, emit_target.c_str(), &target.ptr))
      return finish(s);
    const char* label = emit_label.empty() ? emit_base.c_str() : emit_label.c_str();
    return finish(curate_review_emit(delta.ptr, report.ptr, base.ptr,
                                     target.ptr, label, emit_out.c_str()));
  }

  if (ingest->parsed()) {
    ReportHandle skeleton, filled;
    if (auto s = curate_report_load(ingest_report.c_str(), &skeleton.ptr))
      return finish(s);
    if (auto s = curate_review_ingest(ingest_review.c_str(), skeleton.ptr,
                                      &filled.ptr)) {
      return finish(s);
    }
    std::uint64_t n = 0, m = 0;
    curate_report_counts(filled.ptr, &n, &m, nullptr);
    std::printf("reviewed %" PRIu64 " edits, %" PRIu64 " correct\n", n, m);
    return finish(curate_report_save(filled.ptr, ingest_out.c_str()));
  }

  if (decide->parsed()) {
    ReportHandle report;
    if (auto s = curate_report_load(decide_report.c_str(), &report.ptr))
      return finish(s);
    int accept = 0;
    if (auto s = curate_decide(report.ptr, decide_n, decide_m, decide_eps,
                               &accept)) {
      return finish(s);
    }
    std::printf("%s\n", accept ? "accept" : "reject");
    return accept ? 0 : 2;
  }

  if (threshold->parsed()) {
    std::vector<std::int32_t> ns;
    double lo = std::log(static_cast<double>(thr_n_min));
    double hi = std::log(static_cast<double>(thr_n_max));
    for (std::size_t i = 0; i < thr_points; ++i) {
      double f = thr_points == 1 ? 0.0
                                 : static_cast<double>(i) /
                                       static_cast<double>(thr_points - 1);
      auto n = static_cast<std::int32_t>(std::lround(std::exp(lo + f * (hi - lo))));
      if (ns.empty() || ns.back() != n) ns.push_back(n);
    }
    return finish(
        curate_threshold_table_csv(thr_a, ns.data(), ns.size(), thr_out.c_str()));
  }

  if (rate->parsed()) {
    return finish(curate_rate_curve_csv(rate_n, rate_alpha, rate_beta,
                                        rate_lambda,
                                        rate_cond == "equal" ? 0 : 1,
                                        rate_out.c_str()));
  }

  if (simulate->parsed()) {
    if (config_path.empty()) {
      std::fprintf(stderr, "curate: simulate needs --config <file>\n");
      return 1;
    }
    return finish(curate_simulate(config_path.c_str(), sim_kind.c_str(),
                                  sim_out_dir.c_str()));
  }

  if (validate->parsed()) {
    curate_status s = curate_validate(
        validate_dir.c_str(),
        validate_schema.empty() ? nullptr : validate_schema.c_str());
    if (s == CURATE_OK) std::printf("ok\n");
    return finish(s);
  }

  if (release->parsed()) {
    if (config_path.empty()) {
      std::fprintf(stderr, "curate: release needs --config <file>\n");
      return 1;
    }
    curate_status s =
        curate_pipeline_run(rel_base.c_str(), rel_proposal.c_str(),
                            config_path.c_str(), rel_review.c_str());
    const char* detail = curate_last_error();
    if (detail && *detail) std::printf("%s\n", detail);
    return exit_code(s);
  }

  return 0;
}
