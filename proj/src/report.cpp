#include "gadv/harness.hpp"

#include <cstdio>
#include <fstream>

namespace gadv {

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::ordered_json report_to_json(const CampaignReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["start_mode"] = r.start_mode;
  j["n_starts"] = r.n_starts;
  j["n_evaluated"] = r.n_evaluated;
  j["n_pairs"] = r.n_pairs;
  j["n_success"] = r.n_success;
  j["attack_rate"] = r.attack_rate;
  j["max_loss"] = r.max_loss;
  j["avg_loss"] = r.avg_loss;
  j["avg_final_loss"] = r.avg_final_loss;
  j["config"] = r.config;
  auto& rounds = j["rounds"] = nlohmann::ordered_json::array();
  for (const auto& rs : r.rounds)
    rounds.push_back({{"round", rs.round},
                      {"n_pairs", rs.n_pairs},
                      {"n_success", rs.n_success},
                      {"max_loss", rs.max_loss},
                      {"avg_loss", rs.avg_loss},
                      {"cummax_loss", rs.cummax_loss}});
  auto& finals = j["final_pairs"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.finals.size(); ++i) {
    const auto& p = r.finals[i];
    finals.push_back({{"start", r.final_start_index[i]},
                      {"round", p.round_index},
                      {"class1", p.class1},
                      {"class2", p.class2},
                      {"loss", p.loss},
                      {"x1", to_std(p.x1)},
                      {"x2", to_std(p.x2)}});
  }
  return j;
}

nlohmann::ordered_json comparison_to_json(const PairedComparison& p) {
  nlohmann::ordered_json j;
  j["method_a"] = p.method_a;
  j["method_b"] = p.method_b;
  j["n_starts"] = p.n_starts;
  j["wins_a"] = p.wins_a;
  j["final_loss_a"] = p.final_loss_a;
  j["final_loss_b"] = p.final_loss_b;
  return j;
}

std::string report_to_csv(const CampaignReport& r) {
  std::string out = "round,n_pairs,n_success,max_loss,avg_loss,cummax_loss\n";
  for (const auto& rs : r.rounds) {
    out += std::to_string(rs.round) + ',' + std::to_string(rs.n_pairs) + ',' +
           std::to_string(rs.n_success) + ',' + fmt(rs.max_loss) + ',' + fmt(rs.avg_loss) +
           ',' + fmt(rs.cummax_loss) + '\n';
  }
  return out;
}

void export_report(const CampaignReport& r, const std::string& path, ReportFormat format) {
  std::ofstream os(path);
  require(bool(os), "io", "cannot open " + path + " for writing");
  if (format == ReportFormat::json)
    os << report_to_json(r).dump(2) << '\n';
  else
    os << report_to_csv(r);
  require(bool(os), "io", "write failed for " + path);
}

}  // namespace gadv
