#include <doctest.h>

#include <stdexcept>

#include <fstream>
#include <sstream>

#include "wfq/export.hpp"
#include "wfq/generator.hpp"

using namespace wfq;

namespace {

std::string lp_text(const WorkflowInstance& inst, const ObjectiveConfig& obj = {}) {
  std::ostringstream os;
  write_lp(os, inst, obj);
  return os.str();
}

int count_lines_starting(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0 ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("one-job LP") {
  const auto inst = make_instance(std::vector<int>{1}, std::vector<Edge>{}, {1});
  const std::string lp = lp_text(inst);
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(count_lines_starting(lp, " once_") == 1);
  CHECK(count_lines_starting(lp, " cap_") == 1);
  CHECK(count_lines_starting(lp, " prec_") == 0);
  CHECK(lp.find(" once_0: x_0_0 = 1\n") != std::string::npos);
  CHECK(lp.find(" cap_0: x_0_0 <= 1\n") != std::string::npos);
  CHECK(lp.find("Binaries\n x_0_0\nEnd\n") != std::string::npos);
}

TEST_CASE("canonical LP structure") {
  const auto inst = canonical_instance();
  const std::string lp = lp_text(inst);
  CHECK(count_lines_starting(lp, " once_") == 6);
  CHECK(count_lines_starting(lp, " prec_") == 6);
  CHECK(count_lines_starting(lp, " cap_") == 7);
  // Job 2 (needs 6) has no variable in slot 2 (offers 4) or slot 5 (offers 3).
  CHECK(lp.find("x_2_2") == std::string::npos);
  CHECK(lp.find("x_2_5") == std::string::npos);
  CHECK(lp.find(" prec_2_3: ") != std::string::npos);
  CHECK(lp.find(" cap_2: 4 x_0_2 + 3 x_1_2 + 2 x_3_2 + x_4_2 <= 4\n") != std::string::npos);
  CHECK(lp.rfind("End\n") == lp.size() - 4);
}

TEST_CASE("LP export is byte-identical for identical input") {
  GeneratorConfig cfg;
  cfg.n_jobs = 20;
  cfg.seed = 5;
  const auto inst = generate_instance(cfg);
  CHECK(lp_text(inst) == lp_text(generate_instance(cfg)));

  const auto path = std::filesystem::temp_directory_path() / "wfq_tests_export.lp";
  export_lp(inst, {}, path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == lp_text(inst));
}

TEST_CASE("long rows are wrapped") {
  GeneratorConfig cfg;
  cfg.n_jobs = 30;
  cfg.seed = 8;
  const std::string lp = lp_text(generate_instance(cfg));
  std::istringstream in(lp);
  std::string line;
  std::size_t longest = 0;
  while (std::getline(in, line)) longest = std::max(longest, line.size());
  CHECK(longest <= 255);
}

TEST_CASE("expected runtime shifts the objective") {
  const auto inst = canonical_instance();
  ObjectiveConfig obj;
  obj.expected_runtime = 5;
  const std::string lp = lp_text(inst, obj);
  CHECK(lp.find(" obj: x_0_6 + x_1_6 + x_2_6 + x_3_6 + x_4_6 + x_5_6\n") != std::string::npos);
}
