#pragma once

#include "gadv/data.hpp"
#include "gadv/global_attack.hpp"
#include "gadv/gevmcmc.hpp"
#include "gadv/net.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gadv {

enum class Method { l_fgsm, l_ifgsm, l_pgd, g_fgsm, g_ifgsm, g_pgd, gevmcmc };
enum class StartMode { test_images, random_images };

Method parse_method(const std::string& s);
std::string to_string(Method m);
StartMode parse_start_mode(const std::string& s);
std::string to_string(StartMode m);
bool is_local(Method m);

inline constexpr Method kLocalMethods[] = {Method::l_fgsm, Method::l_ifgsm, Method::l_pgd};
inline constexpr Method kGlobalMethods[] = {Method::g_fgsm, Method::g_ifgsm, Method::g_pgd,
                                            Method::gevmcmc};

/// One attack run over n_starts starting points. Unset optional fields take
/// epsilon-scaled defaults (step eps/10, lambda_m 1.2 eps, lambda_0 0.3 eps).
struct Campaign {
  std::string model_path;
  std::string data_path;
  Method method = Method::g_pgd;
  StartMode start_mode = StartMode::test_images;
  int n_starts = 100;
  double epsilon = 0.1;
  int rounds = 100;
  int sub_steps = 30;
  std::optional<double> step_size;
  std::optional<double> lambda_m;
  std::optional<double> lambda_0;
  double p_b = 0.95;
  int block_size = 59;
  int warmup = 10;
  int top_k = 50;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 7;
  double test_fraction = 0.2;
  // Worker threads; 0 picks hardware concurrency. Never affects results.
  unsigned threads = 0;

  void validate() const;
  double resolved_step_size() const { return step_size.value_or(epsilon / 10); }
  McmcConfig mcmc_config(std::uint64_t rng_seed) const;
};

nlohmann::ordered_json campaign_to_json(const Campaign& c);
Campaign campaign_from_json(const nlohmann::json& j);
Campaign load_campaign(const std::string& path);

struct RoundStats {
  int round = 0;
  int n_pairs = 0;
  int n_success = 0;
  double max_loss = 0.0;
  double avg_loss = 0.0;
  double cummax_loss = 0.0;
};

struct CampaignReport {
  std::string method;
  std::string start_mode;
  int n_starts = 0;
  // Local methods: starts the model got right before the attack.
  int n_evaluated = 0;
  int n_pairs = 0;
  int n_success = 0;
  double attack_rate = 0.0;
  double max_loss = 0.0;
  double avg_loss = 0.0;        // over every generated pair
  double avg_final_loss = 0.0;  // over the per-start final pairs
  std::vector<RoundStats> rounds;
  std::vector<ExamplePair> finals;  // one per evaluated start
  std::vector<int> final_start_index;
  nlohmann::ordered_json config;
  double wall_seconds = 0.0;  // not exported
};

/// Start points for a campaign: either held-out non-meaningless test rows or
/// uniform random points, chosen deterministically from the campaign seed.
struct Start {
  Vector x;
  int label = 0;
};
std::vector<Start> campaign_starts(const Campaign& c, const Net& net, const Dataset& data);

CampaignReport run_campaign(const Campaign& c);
CampaignReport run_campaign(const Campaign& c, const Net& net, const Dataset& data);

struct PairedComparison {
  std::string method_a, method_b;
  std::vector<double> final_loss_a, final_loss_b;
  int wins_a = 0;  // starts where a's final loss is strictly higher
  int n_starts = 0;
};

PairedComparison compare_reports(const CampaignReport& a, const CampaignReport& b);
PairedComparison compare_methods(const Campaign& a, const Campaign& b);
PairedComparison compare_methods(const Campaign& a, const Campaign& b, const Net& net,
                                 const Dataset& data);

enum class ReportFormat { json, delimited };

nlohmann::ordered_json report_to_json(const CampaignReport& r);
nlohmann::ordered_json comparison_to_json(const PairedComparison& p);
/// JSON carries the whole report; delimited carries the per-round series
/// (round, n_pairs, n_success, max_loss, avg_loss, cummax_loss).
void export_report(const CampaignReport& r, const std::string& path, ReportFormat format);
std::string report_to_csv(const CampaignReport& r);

}  // namespace gadv
