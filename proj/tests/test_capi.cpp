#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "curate.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  explicit TempDir(const char* tag) {
    dir = fs::temp_directory_path() / (std::string("curate_capi_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string file(const char* name) const { return (dir / name).string(); }
};

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(curate_version()) > 0);
  CHECK(std::string(curate_status_name(CURATE_OK)) == "ok");
  CHECK(std::string(curate_status_name(CURATE_STALE_DELTA)) == "stale-delta");
}

TEST_CASE("state load, fingerprint, diff, apply round trip") {
  TempDir tmp("roundtrip");
  write(tmp.file("base.txt"), "alpha beta gamma\n");
  write(tmp.file("target.txt"), "alpha gamma delta\n");

  curate_state* base = nullptr;
  curate_state* target = nullptr;
  REQUIRE(curate_state_load(CURATE_FORMAT_SEQ, tmp.file("base.txt").c_str(),
                            &base) == CURATE_OK);
  REQUIRE(curate_state_load(CURATE_FORMAT_SEQ, tmp.file("target.txt").c_str(),
                            &target) == CURATE_OK);

  char fp_base[32], fp_target[32];
  CHECK(curate_state_fingerprint(base, fp_base, sizeof fp_base) == CURATE_OK);
  CHECK(curate_state_fingerprint(target, fp_target, sizeof fp_target) == CURATE_OK);
  CHECK(std::strlen(fp_base) == 16);
  CHECK(std::string(fp_base) != fp_target);

  curate_editset* delta = nullptr;
  REQUIRE(curate_diff(base, target, &delta) == CURATE_OK);
  uint64_t size = 0;
  CHECK(curate_editset_size(delta, &size) == CURATE_OK);
  CHECK(size == 2);  // delete beta, insert delta

  uint64_t dist = 0;
  CHECK(curate_distance(base, target, &dist) == CURATE_OK);
  CHECK(dist == size);

  curate_state* applied = nullptr;
  REQUIRE(curate_apply(base, delta, &applied) == CURATE_OK);
  char fp_applied[32];
  CHECK(curate_state_fingerprint(applied, fp_applied, sizeof fp_applied) == CURATE_OK);
  CHECK(std::string(fp_applied) == fp_target);

  // applying against the wrong base is a stale delta
  curate_state* wrong = nullptr;
  REQUIRE(curate_apply(target, delta, &wrong) == CURATE_STALE_DELTA);
  CHECK(std::strlen(curate_last_error()) > 0);

  CHECK(curate_editset_save(delta, tmp.file("delta.json").c_str()) == CURATE_OK);
  curate_editset* loaded = nullptr;
  REQUIRE(curate_editset_load(tmp.file("delta.json").c_str(), &loaded) == CURATE_OK);
  uint64_t size2 = 0;
  curate_editset_size(loaded, &size2);
  CHECK(size2 == size);

  curate_editset_free(loaded);
  curate_state_free(applied);
  curate_editset_free(delta);
  curate_state_free(target);
  curate_state_free(base);
}

TEST_CASE("errors come back as codes with messages") {
  curate_state* state = nullptr;
  CHECK(curate_state_load(CURATE_FORMAT_TABLE, "/no/such/file.csv", &state) ==
        CURATE_IO_ERROR);
  CHECK(std::strlen(curate_last_error()) > 0);
  CHECK(curate_state_load(CURATE_FORMAT_TABLE, nullptr, &state) ==
        CURATE_INVALID_ARGUMENT);

  double out = 0.0;
  CHECK(curate_r_max(10, 4, &out) == CURATE_DOMAIN_ERROR);
  CHECK(curate_c_function(10, 5, &out) == CURATE_DOMAIN_ERROR);
}

TEST_CASE("decision math through the C API") {
  double r = 0.0;
  REQUIRE(curate_r_max(10, 10, &r) == CURATE_OK);
  CHECK(r == doctest::Approx(6.0 / 11.0));

  int32_t n_out = 0, m_out = 0;
  REQUIRE(curate_noisy_adjust(20, 10, 0.2, &n_out, &m_out) == CURATE_OK);
  CHECK(n_out == 23);
  CHECK(m_out == 13);

  int cond = 0;
  REQUIRE(curate_convergence_condition(1.0, 50, 30, &cond) == CURATE_OK);
  CHECK(cond == 1);

  int32_t m_min = 0;
  REQUIRE(curate_min_threshold(0.5, 100, &m_min) == CURATE_OK);
  CHECK(m_min > 50);

  double mean = 0.0;
  REQUIRE(curate_posterior_mean_beta(10, 10, 1.0, 1.0, 0.0, &mean) == CURATE_OK);
  CHECK(mean == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("sampling, review, and decide through the C API") {
  TempDir tmp("review");
  write(tmp.file("base.txt"), "one two three four five six seven eight\n");
  write(tmp.file("target.txt"), "one two iii four v six vii eight\n");

  curate_state* base = nullptr;
  curate_state* target = nullptr;
  REQUIRE(curate_state_load(CURATE_FORMAT_SEQ, tmp.file("base.txt").c_str(),
                            &base) == CURATE_OK);
  REQUIRE(curate_state_load(CURATE_FORMAT_SEQ, tmp.file("target.txt").c_str(),
                            &target) == CURATE_OK);
  curate_editset* delta = nullptr;
  REQUIRE(curate_diff(base, target, &delta) == CURATE_OK);

  curate_report* sample = nullptr;
  REQUIRE(curate_srs_sample(delta, 4, 99, &sample) == CURATE_OK);
  uint64_t n = 0, m = 0, unreviewed = 0;
  curate_report_counts(sample, &n, &m, &unreviewed);
  CHECK(n == 4);
  CHECK(m == 0);
  CHECK(unreviewed == 4);

  REQUIRE(curate_review_emit(delta, sample, base, target, "base.txt",
                             tmp.file("review.md").c_str()) == CURATE_OK);

  // check every Correct box
  std::ifstream in(tmp.file("review.md"));
  std::string doc((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while ((pos = doc.find("- [ ] Correct", pos)) != std::string::npos) {
    doc[pos + 3] = 'x';
    ++pos;
  }
  write(tmp.file("review.md"), doc);

  curate_report* reviewed = nullptr;
  REQUIRE(curate_review_ingest(tmp.file("review.md").c_str(), sample,
                               &reviewed) == CURATE_OK);
  curate_report_counts(reviewed, &n, &m, &unreviewed);
  CHECK(m == 4);
  CHECK(unreviewed == 0);

  int accept = 0;
  REQUIRE(curate_decide(reviewed, 4, 3, 0.0, &accept) == CURATE_OK);
  CHECK(accept == 1);
  // deciding an unreviewed report is an incomplete review
  int dummy = 0;
  CHECK(curate_decide(sample, 4, 3, 0.0, &dummy) == CURATE_REVIEW_INCOMPLETE);

  CHECK(curate_report_save(reviewed, tmp.file("report.json").c_str()) == CURATE_OK);
  curate_report* loaded = nullptr;
  REQUIRE(curate_report_load(tmp.file("report.json").c_str(), &loaded) == CURATE_OK);
  curate_report_counts(loaded, &n, &m, nullptr);
  CHECK(m == 4);

  curate_report_free(loaded);
  curate_report_free(reviewed);
  curate_report_free(sample);
  curate_editset_free(delta);
  curate_state_free(target);
  curate_state_free(base);
}

TEST_CASE("threshold and rate CSVs through the C API") {
  TempDir tmp("csv");
  int32_t ns[] = {10, 20, 50};
  REQUIRE(curate_threshold_table_csv(0.5, ns, 3, tmp.file("thr.csv").c_str()) ==
          CURATE_OK);
  std::ifstream thr(tmp.file("thr.csv"));
  std::string header;
  std::getline(thr, header);
  CHECK(header == "n,m_min,C,r_max,condition_bound");

  REQUIRE(curate_rate_curve_csv(10, 2.0, 1.0, 0.5, 1,
                                tmp.file("rate.csv").c_str()) == CURATE_OK);
  std::ifstream rate(tmp.file("rate.csv"));
  std::getline(rate, header);
  CHECK(header == "n,m,m_over_n,mu,improvement_rate,accept_prob,step_rate");
}

TEST_CASE("pipeline phases through the C API") {
  TempDir tmp("pipeline");
  fs::path toy = fs::path(__FILE__).parent_path() / "data" / "toy_dataset";
  fs::copy(toy / "base", tmp.dir / "base", fs::copy_options::recursive);
  std::string base = (tmp.dir / "base").string();
  std::string proposal = (toy / "proposal_good").string();
  std::string config = (toy / "config.json").string();
  std::string review = tmp.file("review.md");

  CHECK(curate_pipeline_run(base.c_str(), proposal.c_str(), config.c_str(),
                            review.c_str()) == CURATE_REVIEW_INCOMPLETE);
  REQUIRE(fs::exists(review));
  std::ifstream in(review);
  std::string doc((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while ((pos = doc.find("- [ ] Correct", pos)) != std::string::npos) {
    doc[pos + 3] = 'x';
    ++pos;
  }
  write(review, doc);
  CHECK(curate_pipeline_run(base.c_str(), proposal.c_str(), config.c_str(),
                            review.c_str()) == CURATE_OK);
  CHECK(std::string(curate_last_error()).find("released 0.1.1") !=
        std::string::npos);
  // base now equals the proposal, so a rerun rejects the empty delta
  CHECK(curate_pipeline_run(base.c_str(), proposal.c_str(), config.c_str(),
                            review.c_str()) == CURATE_REJECTED);
}

TEST_CASE("simulation and validation through the C API") {
  TempDir tmp("sim");
  write(tmp.file("cfg.json"),
        R"({"kind":"bpre","seed":4,"initial_errors":50,
            "prior_r":{"alpha":1.0,"beta":2.0},
            "decision":{"n":10,"m":6},"max_steps":20,"runs":3})");
  REQUIRE(curate_simulate(tmp.file("cfg.json").c_str(), "bpre",
                          (tmp.dir / "out").string().c_str()) == CURATE_OK);
  CHECK(fs::exists(tmp.dir / "out" / "trajectories.csv"));
  CHECK(fs::exists(tmp.dir / "out" / "summary.csv"));
  // asking for a different kind than the config declares is an error
  CHECK(curate_simulate(tmp.file("cfg.json").c_str(), "text",
                        (tmp.dir / "out2").string().c_str()) ==
        CURATE_INVALID_ARGUMENT);

  // validation failure carries the violation list in the error text
  fs::path toy = fs::path(__FILE__).parent_path() / "data" / "toy_dataset";
  CHECK(curate_validate((toy / "base").string().c_str(), nullptr) == CURATE_OK);
  CHECK(curate_validate(
            (toy / "proposal_bad_format").string().c_str(),
            (toy / "base" / "schema.json").string().c_str()) ==
        CURATE_VALIDATION_FAILED);
  CHECK(std::string(curate_last_error()).find("party") != std::string::npos);
}
