#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hyb {

enum class Predictor { NQ, SqrtK };
Predictor parse_predictor(const std::string& s);  // "nq" / "NQ_k", "sqrt_k"
std::string to_string(Predictor p);

struct FitPoint {
  double n = 0;
  double k = 0;
  double nq = 0;
  double rounds = 0;
};

// Least squares in log space: log rounds = log C + a log P + e log log2 n.
// The free fit estimates (C, a, e); the proportional fit pins a = 1. The log n
// term is dropped when n does not vary. Residuals are RMS in natural log.
struct FitReport {
  Predictor predictor = Predictor::NQ;
  std::size_t points = 0;
  bool log_term = true;
  double constant = 0, exponent = 0, log_exponent = 0, residual = 0;
  double prop_constant = 0, prop_log_exponent = 0, prop_residual = 0;
  std::vector<double> residuals;  // per point, proportional fit

  void write_json(std::ostream& os) const;
};

// Throws ConfigError with fewer than 5 usable points.
FitReport fit_scaling(const std::vector<FitPoint>& pts, Predictor p);
// Reads the n, k, nq_k and rounds columns of an experiment CSV; rows with an
// error or zero rounds are skipped.
std::vector<FitPoint> read_fit_points(std::istream& csv);
FitReport fit_scaling(std::istream& csv, Predictor p);

}  // namespace hyb
