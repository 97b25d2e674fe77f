#include "gadv/harness.hpp"
#include "gadv/model_io.hpp"
#include "toy_fixture.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace gadv;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Campaign small_campaign(Method m, StartMode mode = StartMode::test_images) {
  Campaign c;
  c.method = m;
  c.start_mode = mode;
  c.n_starts = 20;
  c.rounds = 15;
  c.warmup = 5;
  c.seed = 3;
  c.split_seed = fixture::kSplitSeed;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gadv_harness_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Campaign, ZeroWeightModel) {
  const auto& t = fixture::toy();
  const Net zero(2, {{Matrix::Zero(3, 2), Vector::Zero(3), Activation::identity}},
                 t.data.class_names);
  for (Method m : kGlobalMethods) {
    const CampaignReport r = run_campaign(small_campaign(m), zero, t.data);
    EXPECT_EQ(r.attack_rate, 0.0) << to_string(m);
    EXPECT_NEAR(r.avg_loss, std::log(3.0), 1e-12) << to_string(m);
    EXPECT_EQ(r.n_pairs, 20 * 15);
  }
}

TEST(Campaign, NaturalModelGpgd) {
  const auto& t = fixture::toy();
  Campaign c;
  c.method = Method::g_pgd;
  c.split_seed = fixture::kSplitSeed;
  const CampaignReport r = run_campaign(c, t.natural, t.data);
  EXPECT_EQ(r.n_pairs, 100 * 100);
  EXPECT_GE(r.attack_rate, 0.9);
}

TEST(Campaign, AdversarialModelLocalPgdFromRandomStarts) {
  const auto& t = fixture::toy();
  Campaign c;
  c.method = Method::l_pgd;
  c.start_mode = StartMode::random_images;
  c.split_seed = fixture::kSplitSeed;
  const CampaignReport r = run_campaign(c, t.adversarial, t.data);
  EXPECT_LE(r.attack_rate, 0.1);
}

TEST(Campaign, ReportSelfConsistency) {
  const auto& t = fixture::toy();
  for (Method m : {Method::l_pgd, Method::g_ifgsm, Method::gevmcmc}) {
    const CampaignReport r = run_campaign(small_campaign(m), t.natural, t.data);
    EXPECT_GE(r.attack_rate, 0.0);
    EXPECT_LE(r.attack_rate, 1.0);
    EXPECT_GE(r.max_loss, r.avg_loss);
    int success = 0, pairs = 0;
    for (const auto& rs : r.rounds) {
      success += rs.n_success;
      pairs += rs.n_pairs;
    }
    EXPECT_EQ(success, r.n_success);
    EXPECT_EQ(pairs, r.n_pairs);
    for (std::size_t k = 1; k < r.rounds.size(); ++k)
      EXPECT_GE(r.rounds[k].cummax_loss, r.rounds[k - 1].cummax_loss);
    EXPECT_EQ(r.rounds.back().cummax_loss, r.max_loss);
  }
}

TEST(Campaign, ThreadCountDoesNotChangeResults) {
  const auto& t = fixture::toy();
  Campaign a = small_campaign(Method::g_pgd);
  a.threads = 1;
  Campaign b = a;
  b.threads = 4;
  EXPECT_EQ(report_to_json(run_campaign(a, t.natural, t.data)).dump(),
            report_to_json(run_campaign(b, t.natural, t.data)).dump());
}

TEST(Campaign, InvalidConfigRejected) {
  const auto& t = fixture::toy();
  Campaign c = small_campaign(Method::gevmcmc);
  c.n_starts = 0;
  EXPECT_THROW(run_campaign(c, t.natural, t.data), Error);
  c = small_campaign(Method::gevmcmc);
  c.warmup = c.rounds + 1;
  EXPECT_THROW(run_campaign(c, t.natural, t.data), Error);
}

TEST(Compare, SameCampaignHasNoWins) {
  const auto& t = fixture::toy();
  const Campaign c = small_campaign(Method::g_pgd);
  const PairedComparison p = compare_methods(c, c, t.natural, t.data);
  EXPECT_EQ(p.wins_a, 0);
  EXPECT_EQ(p.n_starts, 20);
}

TEST(Compare, GpgdVsGfgsmIsReproducible) {
  const auto& t = fixture::toy();
  const Campaign a = small_campaign(Method::g_pgd), b = small_campaign(Method::g_fgsm);
  const PairedComparison p = compare_methods(a, b, t.natural, t.data);
  const PairedComparison q = compare_methods(a, b, t.natural, t.data);
  EXPECT_EQ(p.wins_a, q.wins_a);
  EXPECT_EQ(p.final_loss_a, q.final_loss_a);
  EXPECT_LE(p.wins_a, p.n_starts);
}

TEST(Compare, MismatchedStartsRejected) {
  const auto& t = fixture::toy();
  Campaign a = small_campaign(Method::g_pgd), b = small_campaign(Method::gevmcmc);
  b.seed = a.seed + 1;
  EXPECT_THROW(compare_methods(a, b, t.natural, t.data), Error);
  b.seed = a.seed;
  b.start_mode = StartMode::random_images;
  EXPECT_THROW(compare_methods(a, b, t.natural, t.data), Error);
}

TEST(Export, JsonRoundTripAndCsvShape) {
  const auto& t = fixture::toy();
  const CampaignReport r = run_campaign(small_campaign(Method::gevmcmc), t.natural, t.data);
  const fs::path json_path = scratch("report.json"), csv_path = scratch("report.csv");
  export_report(r, json_path.string(), ReportFormat::json);
  export_report(r, csv_path.string(), ReportFormat::delimited);

  const auto j = nlohmann::json::parse(slurp(json_path));
  EXPECT_EQ(j.at("attack_rate").get<double>(), r.attack_rate);
  EXPECT_EQ(j.at("avg_loss").get<double>(), r.avg_loss);
  EXPECT_EQ(j.at("rounds").size(), 15u);

  std::istringstream csv(slurp(csv_path));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "round,n_pairs,n_success,max_loss,avg_loss,cummax_loss");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(line.find('"'), std::string::npos);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    std::istringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) {
      char* end = nullptr;
      std::strtod(f.c_str(), &end);
      EXPECT_EQ(*end, '\0') << f;
    }
  }
  EXPECT_EQ(rows, 15);
}

TEST(Export, RerunsAreByteIdentical) {
  const auto& t = fixture::toy();
  for (Method m : {Method::l_ifgsm, Method::g_pgd, Method::gevmcmc}) {
    const fs::path a = scratch("a.json"), b = scratch("b.json");
    export_report(run_campaign(small_campaign(m), t.natural, t.data), a.string(),
                  ReportFormat::json);
    export_report(run_campaign(small_campaign(m), t.natural, t.data), b.string(),
                  ReportFormat::json);
    EXPECT_EQ(slurp(a), slurp(b)) << to_string(m);
  }
}

TEST(CampaignFile, JsonRoundTrip) {
  Campaign c = small_campaign(Method::gevmcmc, StartMode::random_images);
  c.model_path = "m.json";
  c.data_path = "d.csv";
  c.lambda_m = 0.2;
  c.p_b = 0.9;
  const Campaign back = campaign_from_json(nlohmann::json::parse(campaign_to_json(c).dump()));
  EXPECT_EQ(campaign_to_json(back).dump(), campaign_to_json(c).dump());
}

#ifdef GADV_CLI_PATH
TEST(Cli, MissingModelGivesOneLineJsonError) {
  const fs::path err = scratch("cli_err.txt");
  const std::string cmd = std::string(GADV_CLI_PATH) +
                          " attack --model /nonexistent/model.json --data /nonexistent/d.csv"
                          " --out /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_NE(WEXITSTATUS(status), 0);
  const std::string text = slurp(err);
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j.at("error"), "io");
  EXPECT_NE(j.at("message").get<std::string>().find("/nonexistent/model.json"),
            std::string::npos);
}

TEST(Cli, EndToEndAttackAndFitGev) {
  const auto& t = fixture::toy();
  const fs::path model = scratch("cli_model.json"), data = scratch("cli_data.csv"),
                 out = scratch("cli_report.json"), samples = scratch("samples.txt"),
                 fit = scratch("fit.json");
  save_model(t.natural, model.string());
  save_dataset(t.data, data.string());
  std::string cmd = std::string(GADV_CLI_PATH) + " attack --model " + model.string() +
                    " --data " + data.string() +
                    " --method g_ifgsm --starts 5 --rounds 4 --out " + out.string() +
                    " 2> /dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(out)).at("rounds").size(), 4u);

  {
    std::ofstream os(samples);
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (int i = 0; i < 2000; ++i) os << 1.0 - 0.5 * std::log(-std::log(u(rng))) << '\n';
  }
  cmd = std::string(GADV_CLI_PATH) + " fit-gev --samples-file " + samples.string() +
        " --out " + fit.string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const auto j = nlohmann::json::parse(slurp(fit));
  EXPECT_NEAR(j.at("mu").get<double>(), 1.0, 0.05);
  EXPECT_NEAR(j.at("sigma").get<double>(), 0.5, 0.05);
}
#endif
