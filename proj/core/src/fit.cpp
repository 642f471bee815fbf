#include "hybrid/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "hybrid/common.hpp"
#include "json.hpp"

namespace hyb {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') out.back() += '"', ++i;
      else if (c == '"') quoted = false;
      else out.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

double predictor_value(const FitPoint& p, Predictor pr) { return pr == Predictor::NQ ? p.nq : std::sqrt(p.k); }

// Solves min |A x - b| and returns the residual vector.
Eigen::VectorXd solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  x = A.completeOrthogonalDecomposition().solve(b);
  return b - A * x;
}

double rms(const Eigen::VectorXd& r) { return r.size() ? std::sqrt(r.squaredNorm() / r.size()) : 0.0; }

}  // namespace

Predictor parse_predictor(const std::string& s) {
  if (s == "nq" || s == "NQ" || s == "NQ_k" || s == "nq_k") return Predictor::NQ;
  if (s == "sqrt_k" || s == "sqrtk") return Predictor::SqrtK;
  throw ConfigError("unknown predictor '" + s + "' (expected NQ_k or sqrt_k)");
}

std::string to_string(Predictor p) { return p == Predictor::NQ ? "NQ_k" : "sqrt_k"; }

FitReport fit_scaling(const std::vector<FitPoint>& pts_in, Predictor pr) {
  std::vector<FitPoint> pts;
  for (const auto& p : pts_in)
    if (p.rounds > 0 && p.n >= 2 && predictor_value(p, pr) > 0) pts.push_back(p);
  if (pts.size() < 5)
    throw ConfigError("fit needs at least 5 data points, got " + std::to_string(pts.size()));
  FitReport r;
  r.predictor = pr;
  r.points = pts.size();
  const Eigen::Index m = static_cast<Eigen::Index>(pts.size());
  Eigen::VectorXd y(m), lp(m), ll(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    y[i] = std::log(pts[i].rounds);
    lp[i] = std::log(predictor_value(pts[i], pr));
    ll[i] = std::log(std::log2(pts[i].n));
  }
  r.log_term = ll.maxCoeff() - ll.minCoeff() > 1e-12;
  const Eigen::Index cols = r.log_term ? 3 : 2;

  Eigen::MatrixXd A(m, cols);
  A.col(0).setOnes();
  A.col(1) = lp;
  if (r.log_term) A.col(2) = ll;
  Eigen::VectorXd x;
  r.residual = rms(solve(A, y, x));
  r.constant = std::exp(x[0]);
  r.exponent = x[1];
  r.log_exponent = r.log_term ? x[2] : 0.0;

  Eigen::MatrixXd B(m, cols - 1);
  B.col(0).setOnes();
  if (r.log_term) B.col(1) = ll;
  Eigen::VectorXd z;
  Eigen::VectorXd res = solve(B, y - lp, z);
  r.prop_residual = rms(res);
  r.prop_constant = std::exp(z[0]);
  r.prop_log_exponent = r.log_term ? z[1] : 0.0;
  r.residuals.assign(res.data(), res.data() + res.size());
  return r;
}

std::vector<FitPoint> read_fit_points(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line)) throw ConfigError("empty CSV");
  auto head = split_csv(line);
  auto col = [&](const std::string& name) {
    auto it = std::find(head.begin(), head.end(), name);
    if (it == head.end()) throw ConfigError("CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - head.begin());
  };
  const std::size_t cn = col("n"), ck = col("k"), cq = col("nq_k"), cr = col("rounds");
  auto ce = std::find(head.begin(), head.end(), "error");
  std::vector<FitPoint> pts;
  std::size_t lineno = 1;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != head.size()) throw ConfigError("CSV line " + std::to_string(lineno) + ": wrong field count");
    if (ce != head.end() && !f[static_cast<std::size_t>(ce - head.begin())].empty()) continue;
    try {
      FitPoint p{std::stod(f[cn]), std::stod(f[ck]), std::stod(f[cq]), std::stod(f[cr])};
      if (p.rounds > 0) pts.push_back(p);
    } catch (const std::exception&) {
      throw ConfigError("CSV line " + std::to_string(lineno) + ": non-numeric field");
    }
  }
  return pts;
}

FitReport fit_scaling(std::istream& csv, Predictor p) { return fit_scaling(read_fit_points(csv), p); }

void FitReport::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  j["predictor"] = to_string(predictor);
  j["points"] = points;
  j["log_term"] = log_term;
  j["constant"] = constant;
  j["exponent"] = exponent;
  j["log_exponent"] = log_exponent;
  j["residual"] = residual;
  j["proportional"] = {{"constant", prop_constant}, {"log_exponent", prop_log_exponent}, {"residual", prop_residual}};
  j["residuals"] = residuals;
  os << j.dump(2) << '\n';
}

}  // namespace hyb
