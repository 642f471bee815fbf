#include <algorithm>
#include <sstream>

#include "hybrid/model.hpp"
#include "json.hpp"

namespace hyb {

std::uint32_t Transcript::peak_sends() const {
  return max_sends.empty() ? 0 : *std::max_element(max_sends.begin(), max_sends.end());
}

std::uint32_t Transcript::peak_recvs() const {
  return max_recvs.empty() ? 0 : *std::max_element(max_recvs.begin(), max_recvs.end());
}

std::string Transcript::to_json() const {
  nlohmann::json j;
  j["rounds"] = rounds;
  j["global_msgs"] = global_msgs;
  j["global_bits"] = global_bits;
  j["local_msgs"] = local_msgs;
  j["local_bits"] = local_bits;
  j["dropped"] = dropped;
  j["all_halted"] = all_halted;
  j["budget_exhausted"] = budget_exhausted;
  j["peak_sends"] = peak_sends();
  j["peak_recvs"] = peak_recvs();
  auto& rs = j["per_round"] = nlohmann::json::array();
  for (const auto& r : per_round)
    rs.push_back({{"first", r.first}, {"span", r.span}, {"global_msgs", r.global_msgs},
                  {"global_bits", r.global_bits}, {"local_msgs", r.local_msgs},
                  {"local_bits", r.local_bits}});
  auto& vs = j["violations"] = nlohmann::json::array();
  for (const auto& v : violations)
    vs.push_back({{"round", v.round}, {"node", v.node}, {"kind", v.kind}, {"detail", v.detail}});
  auto& ps = j["phases"] = nlohmann::json::array();
  for (const auto& p : phases)
    ps.push_back({{"name", p.name}, {"rounds", p.rounds}, {"global_msgs", p.global_msgs}});
  if (!outputs.empty()) j["outputs"] = outputs;
  return j.dump(2);
}

std::string Transcript::csv_header() {
  return "rounds,global_msgs,global_bits,local_msgs,dropped,violations,peak_sends,peak_recvs,all_halted,"
         "budget_exhausted";
}

std::string Transcript::csv_row() const {
  std::ostringstream os;
  os << rounds << ',' << global_msgs << ',' << global_bits << ',' << local_msgs << ',' << dropped << ','
     << violations.size() << ',' << peak_sends() << ',' << peak_recvs() << ',' << (all_halted ? 1 : 0)
     << ',' << (budget_exhausted ? 1 : 0);
  return os.str();
}

}  // namespace hyb
