#include "gadv/harness.hpp"

#include "gadv/local_attack.hpp"
#include "gadv/model_io.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <thread>

namespace gadv {

namespace {

constexpr std::uint64_t kPartnerSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStartSalt = 0xd1b54a32d192ed03ULL;

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker; results are written by index.
template <typename Body>
void parallel_for(int n, unsigned threads, Body body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, unsigned(std::max(n, 1)));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = int(t); i < n; i += int(threads)) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct StartResult {
  std::vector<ExamplePair> pairs;  // global: one per round; local: one
  bool evaluated = true;
};

StartResult run_local(const Campaign& c, const Net& net, const Start& s, int index) {
  StartResult r;
  if (predict_class(net, s.x) != s.label) {
    r.evaluated = false;
    return r;
  }
  LocalAttackConfig cfg;
  cfg.method = c.method == Method::l_fgsm    ? LocalMethod::fgsm
               : c.method == Method::l_ifgsm ? LocalMethod::ifgsm
                                             : LocalMethod::pgd;
  cfg.epsilon = c.epsilon;
  cfg.steps = c.sub_steps;
  cfg.step_size = c.resolved_step_size();
  cfg.rng_seed = c.seed + std::uint64_t(index);
  Vector adv = local_attack(net, s.x, s.label, cfg);
  ExamplePair p;
  p.class1 = s.label;
  p.class2 = predict_class(net, adv);
  p.loss = label_loss(net, adv, s.label);
  p.x1 = s.x;
  p.x2 = std::move(adv);
  p.round_index = 1;
  r.pairs.push_back(std::move(p));
  return r;
}

StartResult run_global(const Campaign& c, const Net& net, const Start& s, int index) {
  const std::uint64_t seed = c.seed + std::uint64_t(index);
  Rng partner_rng(seed ^ kPartnerSalt);
  const Vector x2 = noisy_partner(s.x, c.epsilon, partner_rng);
  AttackTrace trace;
  if (c.method == Method::gevmcmc) {
    trace = run_gevmcmc(net, s.x, x2, c.mcmc_config(seed));
  } else {
    GlobalAltConfig cfg;
    cfg.method = c.method == Method::g_fgsm    ? GlobalMethod::g_fgsm
                 : c.method == Method::g_ifgsm ? GlobalMethod::g_ifgsm
                                               : GlobalMethod::g_pgd;
    cfg.epsilon = c.epsilon;
    cfg.rounds = c.rounds;
    cfg.sub_steps = c.sub_steps;
    cfg.step_size = c.resolved_step_size();
    cfg.rng_seed = seed;
    trace = g_attack(net, s.x, x2, cfg);
  }
  return {std::move(trace.pairs), true};
}

}  // namespace

Method parse_method(const std::string& s) {
  static const std::pair<const char*, Method> names[] = {
      {"l_fgsm", Method::l_fgsm}, {"l_ifgsm", Method::l_ifgsm}, {"l_pgd", Method::l_pgd},
      {"g_fgsm", Method::g_fgsm}, {"g_ifgsm", Method::g_ifgsm}, {"g_pgd", Method::g_pgd},
      {"gevmcmc", Method::gevmcmc}};
  for (const auto& [name, m] : names)
    if (s == name) return m;
  throw Error("config", "unknown method '" + s + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::l_fgsm: return "l_fgsm";
    case Method::l_ifgsm: return "l_ifgsm";
    case Method::l_pgd: return "l_pgd";
    case Method::g_fgsm: return "g_fgsm";
    case Method::g_ifgsm: return "g_ifgsm";
    case Method::g_pgd: return "g_pgd";
    case Method::gevmcmc: return "gevmcmc";
  }
  return "?";
}

StartMode parse_start_mode(const std::string& s) {
  if (s == "test_images" || s == "test") return StartMode::test_images;
  if (s == "random_images" || s == "random") return StartMode::random_images;
  throw Error("config", "unknown start mode '" + s + "'");
}

std::string to_string(StartMode m) {
  return m == StartMode::test_images ? "test_images" : "random_images";
}

bool is_local(Method m) {
  return m == Method::l_fgsm || m == Method::l_ifgsm || m == Method::l_pgd;
}

void Campaign::validate() const {
  require(n_starts >= 1, "config", "n_starts must be >= 1");
  require(epsilon > 0, "config", "epsilon must be > 0");
  require(rounds >= 1, "config", "rounds must be >= 1");
  require(sub_steps >= 1, "config", "sub_steps must be >= 1");
  require(resolved_step_size() > 0, "config", "step_size must be > 0");
  require(test_fraction > 0 && test_fraction < 1, "config", "test_fraction must be in (0, 1)");
  if (method == Method::gevmcmc) mcmc_config(seed).validate();
}

McmcConfig Campaign::mcmc_config(std::uint64_t rng_seed) const {
  McmcConfig m = McmcConfig::scaled_defaults(epsilon);
  m.rounds = rounds;
  m.warmup_rounds = warmup;
  m.block_size = block_size;
  m.top_k = top_k;
  m.p_b = p_b;
  if (lambda_m) m.lambda_m = *lambda_m;
  if (lambda_0) m.lambda_0 = *lambda_0;
  m.warmup_sub_steps = sub_steps;
  m.warmup_step_size = resolved_step_size();
  m.rng_seed = rng_seed;
  return m;
}

nlohmann::ordered_json campaign_to_json(const Campaign& c) {
  nlohmann::ordered_json j;
  j["model"] = c.model_path;
  j["data"] = c.data_path;
  j["method"] = to_string(c.method);
  j["start_mode"] = to_string(c.start_mode);
  j["starts"] = c.n_starts;
  j["epsilon"] = c.epsilon;
  j["rounds"] = is_local(c.method) ? 1 : c.rounds;
  j["sub_steps"] = c.sub_steps;
  j["step_size"] = c.resolved_step_size();
  if (c.method == Method::gevmcmc) {
    const McmcConfig m = c.mcmc_config(c.seed);
    j["lambda_m"] = m.lambda_m;
    j["lambda_0"] = m.lambda_0;
    j["p_b"] = m.p_b;
    j["block_size"] = m.block_size;
    j["warmup"] = m.warmup_rounds;
    j["top_k"] = m.top_k;
  }
  j["seed"] = c.seed;
  j["split_seed"] = c.split_seed;
  j["test_fraction"] = c.test_fraction;
  if (is_local(c.method))
    j["scoring"] = "label flips among starts classified correctly before the attack";
  else
    j["scoring"] = "pairs with differing predicted classes among all generated pairs";
  return j;
}

Campaign campaign_from_json(const nlohmann::json& j) {
  try {
    Campaign c;
    c.model_path = j.value("model", "");
    c.data_path = j.value("data", "");
    c.method = parse_method(j.at("method").get<std::string>());
    c.start_mode = parse_start_mode(j.value("start_mode", "test_images"));
    c.n_starts = j.value("starts", c.n_starts);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.rounds = j.value("rounds", c.rounds);
    c.sub_steps = j.value("sub_steps", c.sub_steps);
    if (j.contains("step_size")) c.step_size = j.at("step_size").get<double>();
    if (j.contains("lambda_m")) c.lambda_m = j.at("lambda_m").get<double>();
    if (j.contains("lambda_0")) c.lambda_0 = j.at("lambda_0").get<double>();
    c.p_b = j.value("p_b", c.p_b);
    c.block_size = j.value("block_size", c.block_size);
    c.warmup = j.value("warmup", c.warmup);
    c.top_k = j.value("top_k", c.top_k);
    c.seed = j.value("seed", c.seed);
    c.split_seed = j.value("split_seed", c.split_seed);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config", std::string("bad campaign config: ") + e.what());
  }
}

Campaign load_campaign(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), "io", "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse", path + ": " + e.what());
  }
  return campaign_from_json(j);
}

std::vector<Start> campaign_starts(const Campaign& c, const Net& net, const Dataset& data) {
  require(data.dim() == net.input_dim(), "shape",
          "dataset dimension does not match the model");
  Rng pick(c.seed ^ kStartSalt);
  std::vector<Start> starts;
  starts.reserve(std::size_t(c.n_starts));
  if (c.start_mode == StartMode::test_images) {
    const Split split = train_test_split(data, c.test_fraction, c.split_seed);
    const int meaningless = data.meaningless_class();
    const Dataset pool = filter(split.test, [&](int y) { return y != meaningless; });
    require(pool.size() > 0, "data", "no non-meaningless test rows to start from");
    std::vector<Eigen::Index> order(std::size_t(pool.size()));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::shuffle(order.begin(), order.end(), pick);
    for (int i = 0; i < c.n_starts; ++i) {
      const Eigen::Index row = order[std::size_t(i) % order.size()];
      starts.push_back({pool.input(row), pool.labels[std::size_t(row)]});
    }
  } else {
    const int meaningless = data.meaningless_class();
    for (int i = 0; i < c.n_starts; ++i) {
      Vector x = uniform_vector(net.input_dim(), 0.0, 1.0, pick);
      // Without a meaningless class the model's own prediction is the label.
      const int label = meaningless >= 0 ? meaningless : predict_class(net, x);
      starts.push_back({std::move(x), label});
    }
  }
  return starts;
}

CampaignReport run_campaign(const Campaign& c) {
  const Net net = load_model(c.model_path);
  const Dataset data = load_dataset(c.data_path);
  return run_campaign(c, net, data);
}

CampaignReport run_campaign(const Campaign& c, const Net& net, const Dataset& data) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Start> starts = campaign_starts(c, net, data);
  const bool local = is_local(c.method);

  std::vector<StartResult> results(starts.size());
  parallel_for(int(starts.size()), c.threads, [&](int i) {
    const auto& s = starts[std::size_t(i)];
    results[std::size_t(i)] = local ? run_local(c, net, s, i) : run_global(c, net, s, i);
  });

  CampaignReport r;
  r.method = to_string(c.method);
  r.start_mode = to_string(c.start_mode);
  r.n_starts = c.n_starts;
  r.config = campaign_to_json(c);
  const int n_rounds = local ? 1 : c.rounds;
  r.rounds.resize(std::size_t(n_rounds));
  for (int k = 0; k < n_rounds; ++k) r.rounds[std::size_t(k)].round = k + 1;

  double loss_sum = 0.0, final_sum = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& res = results[i];
    if (!res.evaluated) continue;
    ++r.n_evaluated;
    for (std::size_t k = 0; k < res.pairs.size(); ++k) {
      const auto& p = res.pairs[k];
      auto& rs = r.rounds[k];
      ++rs.n_pairs;
      rs.n_success += p.success();
      rs.max_loss = std::max(rs.max_loss, p.loss);
      rs.avg_loss += p.loss;
      ++r.n_pairs;
      r.n_success += p.success();
      r.max_loss = std::max(r.max_loss, p.loss);
      loss_sum += p.loss;
    }
    r.finals.push_back(res.pairs.back());
    r.final_start_index.push_back(int(i));
    final_sum += res.pairs.back().loss;
  }
  double cummax = 0.0;
  for (auto& rs : r.rounds) {
    if (rs.n_pairs > 0) rs.avg_loss /= double(rs.n_pairs);
    cummax = std::max(cummax, rs.max_loss);
    rs.cummax_loss = cummax;
  }
  if (r.n_pairs > 0) {
    r.attack_rate = double(r.n_success) / double(r.n_pairs);
    r.avg_loss = loss_sum / double(r.n_pairs);
    r.avg_final_loss = final_sum / double(r.finals.size());
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

PairedComparison compare_reports(const CampaignReport& a, const CampaignReport& b) {
  require(a.final_start_index == b.final_start_index && a.n_starts == b.n_starts &&
              a.start_mode == b.start_mode,
          "config", "compared campaigns do not share the same start set");
  PairedComparison p;
  p.method_a = a.method;
  p.method_b = b.method;
  p.n_starts = int(a.finals.size());
  for (std::size_t i = 0; i < a.finals.size(); ++i) {
    p.final_loss_a.push_back(a.finals[i].loss);
    p.final_loss_b.push_back(b.finals[i].loss);
    p.wins_a += a.finals[i].loss > b.finals[i].loss;
  }
  return p;
}

namespace {

void check_same_starts(const Campaign& a, const Campaign& b) {
  require(a.model_path == b.model_path && a.data_path == b.data_path &&
              a.start_mode == b.start_mode && a.n_starts == b.n_starts &&
              a.seed == b.seed && a.split_seed == b.split_seed &&
              a.test_fraction == b.test_fraction && a.epsilon == b.epsilon,
          "config",
          "compared campaigns must share model, data, start mode, starts, seed and epsilon");
}

}  // namespace

PairedComparison compare_methods(const Campaign& a, const Campaign& b) {
  check_same_starts(a, b);
  const Net net = load_model(a.model_path);
  const Dataset data = load_dataset(a.data_path);
  return compare_methods(a, b, net, data);
}

PairedComparison compare_methods(const Campaign& a, const Campaign& b, const Net& net,
                                 const Dataset& data) {
  check_same_starts(a, b);
  require(is_local(a.method) == is_local(b.method), "config",
          "cannot pair a local campaign with a global one");
  return compare_reports(run_campaign(a, net, data), run_campaign(b, net, data));
}

}  // namespace gadv
