// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#include "curate.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "curate/decision.hpp"
#include "curate/edits.hpp"
#include "curate/pipeline.hpp"
#include "curate/sampling.hpp"
#include "curate/simulation.hpp"

struct curate_state {
  curate::data::DataState value;
};

struct curate_editset {
  curate::data::EditSet value;
};

struct curate_report {
  curate::sampling::SampleReport value;
};

namespace {

thread_local std::string g_last_error;

curate_status to_status(curate::ErrorCode code) {
  return static_cast<curate_status>(static_cast<int>(code));
}

template <typename Fn>
curate_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const curate::CurateError& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CURATE_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return CURATE_ERROR;
  }
}

curate_status require(bool ok, const char* what) {
  if (!ok) {
    g_last_error = what;
    return CURATE_INVALID_ARGUMENT;
  }
  return CURATE_OK;
}

curate::data::Format to_format(curate_format f) {
  switch (f) {
    case CURATE_FORMAT_TABLE: return curate::data::Format::fixed_table;
    case CURATE_FORMAT_INDEXED: return curate::data::Format::indexed_table;
    case CURATE_FORMAT_SEQ: return curate::data::Format::token_sequence;
  }
  curate::fail(curate::ErrorCode::invalid_argument, "bad format enum");
}

}  // namespace

extern "C" {

const char* curate_version(void) { return "0.1.0"; }

const char* curate_status_name(curate_status status) {
  switch (status) {
    case CURATE_OK: return "ok";
    case CURATE_ERROR: return "error";
    case CURATE_REJECTED: return "rejected";
    case CURATE_VALIDATION_FAILED: return "validation-failed";
    case CURATE_REVIEW_INCOMPLETE: return "review-incomplete";
    case CURATE_INVALID_ARGUMENT: return "invalid-argument";
    case CURATE_DOMAIN_ERROR: return "domain-error";
    case CURATE_DIMENSION_MISMATCH: return "dimension-mismatch";
    case CURATE_FORMAT_MISMATCH: return "format-mismatch";
    case CURATE_STALE_DELTA: return "stale-delta";
    case CURATE_EDIT_CONFLICT: return "edit-conflict";
    case CURATE_EMPTY_PROPOSAL: return "empty-proposal";
    case CURATE_STALE_REVIEW: return "stale-review";
    case CURATE_NUMERIC_ERROR: return "numeric-error";
    case CURATE_IO_ERROR: return "io-error";
  }
  return "?";
}

const char* curate_last_error(void) { return g_last_error.c_str(); }

curate_status curate_state_load(curate_format format, const char* path,
                                curate_state** out) {
  if (auto s = require(path && out, "path and out must be non-null")) return s;
  return guarded([&] {
    *out = new curate_state{curate::data::load_state(to_format(format), path)};
    return CURATE_OK;
  });
}

curate_status curate_state_save(const curate_state* state, const char* path) {
  if (auto s = require(state && path, "state and path must be non-null")) return s;
  return guarded([&] {
    curate::data::save_state(state->value, path);
    return CURATE_OK;
  });
}

void curate_state_free(curate_state* state) { delete state; }

curate_status curate_state_fingerprint(const curate_state* state, char* buffer,
                                       size_t size) {
  if (auto s = require(state && buffer && size >= 17,
                       "need a state and a buffer of at least 17 bytes")) {
    return s;
  }
  return guarded([&] {
    std::string fp = curate::data::fingerprint(state->value);
    std::snprintf(buffer, size, "%s", fp.c_str());
    return CURATE_OK;
  });
}

curate_status curate_diff(const curate_state* base, const curate_state* target,
                          curate_editset** out) {
  if (auto s = require(base && target && out, "arguments must be non-null")) return s;
  return guarded([&] {
    *out = new curate_editset{
        curate::data::enumerate_edits(base->value, target->value)};
    return CURATE_OK;
  });
}

curate_status curate_apply(const curate_state* base, const curate_editset* delta,
                           curate_state** out) {
  if (auto s = require(base && delta && out, "arguments must be non-null")) return s;
  return guarded([&] {
    *out = new curate_state{curate::data::apply_edits(base->value, delta->value)};
    return CURATE_OK;
  });
}

curate_status curate_editset_size(const curate_editset* delta, uint64_t* out) {
  if (auto s = require(delta && out, "arguments must be non-null")) return s;
  *out = delta->value.size();
  return CURATE_OK;
}

curate_status curate_editset_save(const curate_editset* delta, const char* path) {
  if (auto s = require(delta && path, "arguments must be non-null")) return s;
  return guarded([&] {
    curate::data::save_edit_set(delta->value, path);
    return CURATE_OK;
  });
}

curate_status curate_editset_load(const char* path, curate_editset** out) {
  if (auto s = require(path && out, "arguments must be non-null")) return s;
  return guarded([&] {
    *out = new curate_editset{curate::data::load_edit_set(path)};
    return CURATE_OK;
  });
}

void curate_editset_free(curate_editset* delta) { delete delta; }

curate_status curate_distance(const curate_state* a, const curate_state* b,
                              uint64_t* out) {
  if (auto s = require(a && b && out, "arguments must be non-null")) return s;
  return guarded([&] {
    *out = curate::data::distance(a->value, b->value);
    return CURATE_OK;
  });
}

curate_status curate_srs_sample(const curate_editset* delta, uint32_t n,
                                uint64_t seed, curate_report** out) {
  if (auto s = require(delta && out, "arguments must be non-null")) return s;
  return guarded([&] {
    *out = new curate_report{curate::sampling::srs_sample(delta->value, n, seed)};
    return CURATE_OK;
  });
}

curate_status curate_stratified_sample(const curate_editset* delta, uint32_t n,
                                       uint64_t seed, curate_report** out) {
  if (auto s = require(delta && out, "arguments must be non-null")) return s;
  return guarded([&] {
    *out = new curate_report{
        curate::sampling::stratified_sample(delta->value, n, seed)};
    return CURATE_OK;
  });
}

curate_status curate_report_counts(const curate_report* report, uint64_t* n,
                                   uint64_t* m_observed, uint64_t* unreviewed) {
  if (auto s = require(report != nullptr, "report must be non-null")) return s;
  if (n) *n = report->value.n;
  if (m_observed) *m_observed = report->value.m_observed();
  if (unreviewed) *unreviewed = report->value.unreviewed_count();
  return CURATE_OK;
}

curate_status curate_report_save(const curate_report* report, const char* path) {
  if (auto s = require(report && path, "arguments must be non-null")) return s;
  return guarded([&] {
    curate::sampling::save_report(report->value, path);
    return CURATE_OK;
  });
}

curate_status curate_report_load(const char* path, curate_report** out) {
  if (auto s = require(path && out, "arguments must be non-null")) return s;
  return guarded([&] {
    *out = new curate_report{curate::sampling::load_report(path)};
    return CURATE_OK;
  });
}

void curate_report_free(curate_report* report) { delete report; }

curate_status curate_review_emit(const curate_editset* delta,
                                 const curate_report* report,
                                 const curate_state* base,
                                 const curate_state* target,
                                 const char* source_label,
                                 const char* out_path) {
  if (auto s = require(delta && report && base && target && out_path,
                       "arguments must be non-null")) {
    return s;
  }
  return guarded([&] {
    std::string label = source_label ? source_label : "data";
    std::unordered_map<std::string, const curate::data::Edit*> by_id;
    for (const auto& rec : delta->value.edits) by_id[rec.id] = &rec.edit;
    std::vector<curate::sampling::ReviewContext> context;
    for (const auto& entry : report->value.entries) {
      auto it = by_id.find(entry.edit_id);
      if (it == by_id.end()) {
        curate::fail(curate::ErrorCode::stale_review,
                     "report references edit " + entry.edit_id +
                         " that is not in the delta");
      }
      curate::data::EditHunk hunk =
          curate::data::render_hunk(base->value, *it->second);
      context.push_back({entry.edit_id, label, hunk.line, hunk.lines});
    }
    curate::sampling::ReviewHeader header{
        curate::data::fingerprint(base->value),
        curate::data::fingerprint(target->value)};
    curate::data::write_file(
        out_path,
        curate::sampling::emit_review_document(report->value, context, header));
    return CURATE_OK;
  });
}

curate_status curate_review_ingest(const char* review_path,
                                   const curate_report* skeleton,
                                   curate_report** out) {
  if (auto s = require(review_path && skeleton && out,
                       "arguments must be non-null")) {
    return s;
  }
  return guarded([&] {
    std::string text = curate::data::read_file(review_path);
    *out = new curate_report{
        curate::sampling::parse_review_document(text, skeleton->value)};
    return CURATE_OK;
  });
}

curate_status curate_decide(const curate_report* report, int32_t n, int32_t m,
                            double epsilon, int* accept) {
  if (auto s = require(report && accept, "arguments must be non-null")) return s;
  return guarded([&] {
    curate::decision::DecisionConfig cfg{n, m, epsilon};
    *accept = curate::decision::decide(report->value, cfg) ==
                      curate::decision::Outcome::accept
                  ? 1
                  : 0;
    return CURATE_OK;
  });
}

curate_status curate_r_max(int32_t n, int32_t m, double* out) {
  if (auto s = require(out != nullptr, "out must be non-null")) return s;
  return guarded([&] {
    *out = curate::decision::r_max(n, m);
    return CURATE_OK;
  });
}

curate_status curate_c_function(int32_t n, int32_t m, double* out) {
  if (auto s = require(out != nullptr, "out must be non-null")) return s;
  return guarded([&] {
    *out = curate::decision::c_function(n, m);
    return CURATE_OK;
  });
}

curate_status curate_convergence_condition(double a, int32_t n, int32_t m,
                                           int* out) {
  if (auto s = require(out != nullptr, "out must be non-null")) return s;
  return guarded([&] {
    *out = curate::decision::convergence_condition(a, n, m) ? 1 : 0;
    return CURATE_OK;
  });
}

curate_status curate_min_threshold(double a, int32_t n, int32_t* out) {
  if (auto s = require(out != nullptr, "out must be non-null")) return s;
  return guarded([&] {
    auto m = curate::decision::min_threshold(a, n);
    *out = m ? *m : -1;
    return CURATE_OK;
  });
}

curate_status curate_noisy_adjust(int32_t n, int32_t m, double epsilon,
                                  int32_t* n_out, int32_t* m_out) {
  if (auto s = require(n_out && m_out, "outputs must be non-null")) return s;
  return guarded([&] {
    auto rule = curate::decision::noisy_adjust(n, m, epsilon);
    *n_out = rule.n;
    *m_out = rule.m;
    return CURATE_OK;
  });
}

curate_status curate_posterior_mean_beta(int32_t n, int32_t m, double alpha,
                                         double beta, double epsilon,
                                         double* out) {
  if (auto s = require(out != nullptr, "out must be non-null")) return s;
  return guarded([&] {
    curate::decision::PriorSpec prior;
    prior.prior = curate::decision::BetaPrior{alpha, beta};
    *out = curate::decision::posterior_mean_r(n, m, prior, epsilon);
    return CURATE_OK;
  });
}

curate_status curate_threshold_table_csv(double a, const int32_t* ns,
                                         size_t count, const char* out_path) {
  if (auto s = require(ns && out_path && count > 0,
                       "need n values and an output path")) {
    return s;
  }
  return guarded([&] {
    std::vector<int> values(ns, ns + count);
    std::ostringstream ss;
    curate::decision::write_threshold_table(ss, a, values);
    curate::data::write_file(out_path, ss.str());
    return CURATE_OK;
  });
}

curate_status curate_rate_curve_csv(int32_t n, double alpha, double beta,
                                    double lambda_mean, int conditioning,
                                    const char* out_path) {
  if (auto s = require(out_path != nullptr, "out_path must be non-null")) return s;
  return guarded([&] {
    curate::decision::PriorSpec prior;
    prior.prior = curate::decision::BetaPrior{alpha, beta};
    prior.lambda_mean = lambda_mean;
    std::ostringstream ss;
    curate::decision::write_rate_curve(
        ss, n, prior,
        conditioning == 0 ? curate::decision::Conditioning::equal
                          : curate::decision::Conditioning::at_least);
    curate::data::write_file(out_path, ss.str());
    return CURATE_OK;
  });
}

curate_status curate_simulate(const char* config_path,
                              const char* expected_kind, const char* out_dir) {
  if (auto s = require(config_path && out_dir, "arguments must be non-null")) {
    return s;
  }
  return guarded([&] {
    curate::sim::SimJob job = curate::sim::load_sim_config(config_path);
    if (expected_kind && *expected_kind && job.kind != expected_kind) {
      curate::fail(curate::ErrorCode::invalid_argument,
                   "config describes a '" + job.kind + "' simulation, not '" +
                       std::string(expected_kind) + "'");
    }
    curate::sim::run_sim_job(job, out_dir);
    return CURATE_OK;
  });
}

curate_status curate_validate(const char* dir, const char* schema_path) {
  if (auto s = require(dir != nullptr, "dir must be non-null")) return s;
  return guarded([&]() -> curate_status {
    std::string schema_file =
        schema_path ? schema_path : (std::string(dir) + "/schema.json");
    auto schema = curate::pipeline::FormatSchema::load(schema_file);
    auto violations = curate::pipeline::validate_format(dir, schema);
    if (violations.empty()) return CURATE_OK;
    std::ostringstream ss;
    for (const auto& v : violations) {
      if (!v.part.empty()) ss << v.part << ": ";
      ss << v.message << "\n";
    }
    g_last_error = ss.str();
    return CURATE_VALIDATION_FAILED;
  });
}

curate_status curate_pipeline_run(const char* base_dir,
                                  const char* proposal_dir,
                                  const char* config_path,
                                  const char* review_path) {
  if (auto s = require(base_dir && proposal_dir && config_path && review_path,
                       "arguments must be non-null")) {
    return s;
  }
  return guarded([&]() -> curate_status {
    auto config = curate::pipeline::PipelineConfig::load(config_path);
    auto result = curate::pipeline::run_pipeline(base_dir, proposal_dir,
                                                 config, review_path);
    std::ostringstream ss;
    ss << result.message;
    for (const auto& v : result.violations) {
      ss << "\n";
      if (!v.part.empty()) ss << v.part << ": ";
      ss << v.message;
    }
    g_last_error = ss.str();
    switch (result.status) {
      case curate::pipeline::PipelineStatus::released: return CURATE_OK;
      case curate::pipeline::PipelineStatus::rejected: return CURATE_REJECTED;
      case curate::pipeline::PipelineStatus::validation_failed:
        return CURATE_VALIDATION_FAILED;
      case curate::pipeline::PipelineStatus::awaiting_review:
        return CURATE_REVIEW_INCOMPLETE;
    }
    return CURATE_ERROR;
  });
}

}  // extern "C"
