#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hybrid/graph.hpp"
#include "hybrid/model.hpp"

namespace hyb {

// Integer parameter given as an expression in n: "16", "n/4", "sqrt(n)",
// "2*sqrt(n)", "n^0.75", "log(n)". Evaluates to max(1, round(value)).
class SizeExpr {
 public:
  SizeExpr() = default;
  explicit SizeExpr(std::string text);  // throws ConfigError on bad syntax
  std::uint64_t eval(std::size_t n) const;
  const std::string& text() const { return text_; }

 private:
  std::string text_ = "1";
};

struct ExperimentSpec {
  std::string graph = "path:64";     // generator text, "{n}" replaced by each size
  std::vector<std::size_t> sizes;    // empty: graph text used as is
  std::string algo = "k_disseminate";
  std::vector<SizeExpr> k{SizeExpr("1")};  // one sweep point per entry
  SizeExpr l{"1"};
  double eps = 0.25;
  std::uint32_t alpha = 2;
  int scenario = 3;                  // routing scenario, kl_sp case for kl_sp (1|2)
  std::string placement = "uniform"; // token placement for dissemination
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t budget = 0;          // 0: unlimited
  IdMode mode = IdMode::Hybrid;
  std::string out;                   // CSV path, empty: caller handles output
  std::string transcript;            // optional JSON lines path

  // Throws ConfigError with the offending field.
  void validate() const;
  static ExperimentSpec from_json(const std::string& text);  // errors carry line/field
  static ExperimentSpec load(const std::string& path);
};

const std::vector<std::string>& algorithm_ids();

struct ExperimentRow {
  std::string graph;
  std::size_t n = 0, m = 0;
  std::uint32_t diameter = 0;
  std::string algo;
  std::uint64_t seed = 0;
  std::uint64_t k = 0, l = 0;
  double eps = 0;
  std::uint32_t alpha = 0;
  std::uint32_t nq_k = 0, nq_l = 0;
  std::uint64_t rounds = 0, global_msgs = 0, global_bits = 0;
  std::size_t violations = 0;
  bool correct = false;
  std::optional<double> max_stretch;
  std::string error;
  std::string transcript_json;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::size_t errors = 0;     // rows whose run threw
  std::size_t incorrect = 0;  // rows that ran but failed the oracle check

  static std::string csv_header();
  static std::string csv_row(const ExperimentRow& r);
  void write_csv(std::ostream& os) const;
};

// One row per (size, k, seed). Failures are recorded per row and the sweep
// continues. Writes the CSV (and transcripts) when the spec names paths.
ExperimentResult run_experiment(const ExperimentSpec& spec);
// Single point, used by the sweep and by the tests.
ExperimentRow run_point(const ExperimentSpec& spec, const Graph& g, const std::string& graph_text,
                        const SizeExpr& k, std::uint64_t seed);

}  // namespace hyb
