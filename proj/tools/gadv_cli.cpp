// Command line front end: dataset generation, training, attack campaigns,
// paired comparisons and standalone GEV fitting.

#include "gadv/data.hpp"
#include "gadv/gev.hpp"
#include "gadv/harness.hpp"
#include "gadv/model_io.hpp"
#include "gadv/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace gadv;

void fail(const std::string& kind, const std::string& message) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << std::endl;
}

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream os(path);
  require(bool(os), "io", "cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

std::vector<int> parse_widths(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global adversarial example pair search for small classifiers"};
  app.require_subcommand(1);

  // make-data
  auto* make = app.add_subcommand("make-data", "Generate a toy dataset file");
  std::string kind = "two_moons", data_out;
  DataConfig dcfg;
  make->add_option("--kind", kind, "two_moons | blobs | rings");
  make->add_option("--n-per-class", dcfg.n_per_class);
  make->add_option("--noise", dcfg.noise_scale);
  make->add_option("--meaningless-fraction", dcfg.meaningless_fraction);
  make->add_option("--dim", dcfg.dim);
  make->add_option("--seed", dcfg.rng_seed);
  make->add_option("--out", data_out)->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a model on the training split");
  std::string train_data, train_out, init_model, hidden = "32,32";
  TrainConfig tcfg;
  std::uint64_t split_seed = 7, init_seed = 0;
  double test_fraction = 0.2;
  bool adversarial = false;
  AdversarialTraining adv;
  tr->add_option("--data", train_data)->required();
  tr->add_option("--out", train_out)->required();
  tr->add_option("--init-model", init_model, "continue training this model");
  tr->add_option("--hidden", hidden, "hidden widths, comma separated");
  tr->add_option("--epochs", tcfg.epochs);
  tr->add_option("--batch-size", tcfg.batch_size);
  tr->add_option("--lr", tcfg.learning_rate);
  tr->add_option("--seed", tcfg.rng_seed);
  tr->add_option("--init-seed", init_seed);
  tr->add_option("--split-seed", split_seed);
  tr->add_option("--test-fraction", test_fraction);
  tr->add_flag("--adversarial", adversarial, "PGD adversarial training");
  tr->add_option("--pgd-steps", adv.pgd_steps);
  tr->add_option("--adv-step-size", adv.step_size);
  tr->add_option("--adv-epsilon", adv.epsilon);
  tr->add_option("--mix-ratio", adv.mix_ratio);

  // attack
  auto* at = app.add_subcommand("attack", "Run one attack campaign");
  Campaign camp;
  std::string method = "g_pgd", start_mode = "test_images", attack_out, csv_out;
  double step_size = 0, lambda_m = 0, lambda_0 = 0;
  at->add_option("--model", camp.model_path)->required();
  at->add_option("--data", camp.data_path)->required();
  at->add_option("--method", method, "l_fgsm|l_ifgsm|l_pgd|g_fgsm|g_ifgsm|g_pgd|gevmcmc");
  at->add_option("--epsilon", camp.epsilon);
  at->add_option("--rounds", camp.rounds);
  at->add_option("--sub-steps", camp.sub_steps);
  at->add_option("--step-size", step_size, "defaults to epsilon / 10");
  at->add_option("--starts", camp.n_starts);
  at->add_option("--start-mode", start_mode, "test_images | random_images");
  at->add_option("--seed", camp.seed);
  at->add_option("--split-seed", camp.split_seed);
  at->add_option("--lambda-m", lambda_m, "defaults to 1.2 epsilon");
  at->add_option("--lambda-0", lambda_0, "defaults to 0.3 epsilon");
  at->add_option("--p-b", camp.p_b);
  at->add_option("--block-size", camp.block_size);
  at->add_option("--warmup", camp.warmup);
  at->add_option("--top-k", camp.top_k);
  at->add_option("--threads", camp.threads);
  at->add_option("--out", attack_out, "JSON report (stdout when omitted)");
  at->add_option("--csv", csv_out, "per-round series as CSV");

  // compare
  auto* cmp = app.add_subcommand("compare", "Paired final-loss comparison of two campaigns");
  std::string a_config, b_config, cmp_out;
  cmp->add_option("--a-config", a_config)->required();
  cmp->add_option("--b-config", b_config)->required();
  cmp->add_option("--out", cmp_out);

  // fit-gev
  auto* fg = app.add_subcommand("fit-gev", "Maximum-likelihood GEV fit of a sample file");
  std::string samples_file, gev_out;
  fg->add_option("--samples-file", samples_file, "one number per line")->required();
  fg->add_option("--out", gev_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    fail("usage", e.what());
    return 2;
  }

  try {
    if (*make) {
      dcfg.kind = parse_data_kind(kind);
      save_dataset(generate(dcfg), data_out);
    } else if (*tr) {
      const Dataset data = load_dataset(train_data);
      const Split split = train_test_split(data, test_fraction, split_seed);
      Net net = init_model.empty()
                    ? make_mlp(data.dim(), parse_widths(hidden), data.class_names, init_seed)
                    : load_model(init_model);
      if (adversarial) tcfg.adversarial = adv;
      net = train(std::move(net), split.train, tcfg);
      save_model(net, train_out);
      std::cerr << "train_accuracy=" << accuracy(net, split.train)
                << " test_accuracy=" << accuracy(net, split.test) << '\n';
    } else if (*at) {
      camp.method = parse_method(method);
      camp.start_mode = parse_start_mode(start_mode);
      if (step_size > 0) camp.step_size = step_size;
      if (lambda_m > 0) camp.lambda_m = lambda_m;
      if (lambda_0 > 0) camp.lambda_0 = lambda_0;
      const CampaignReport r = run_campaign(camp);
      if (attack_out.empty())
        std::cout << report_to_json(r).dump(2) << '\n';
      else
        export_report(r, attack_out, ReportFormat::json);
      if (!csv_out.empty()) export_report(r, csv_out, ReportFormat::delimited);
      std::cerr << r.method << " attack_rate=" << r.attack_rate << " max_loss=" << r.max_loss
                << " avg_loss=" << r.avg_loss << " wall_seconds=" << r.wall_seconds << '\n';
    } else if (*cmp) {
      const PairedComparison p = compare_methods(load_campaign(a_config), load_campaign(b_config));
      write_json(comparison_to_json(p), cmp_out);
    } else if (*fg) {
      std::ifstream is(samples_file);
      require(bool(is), "io", "cannot open " + samples_file);
      std::vector<double> samples;
      std::string line;
      int row = 0;
      while (std::getline(is, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        require(end != line.c_str(), "parse",
                samples_file + ": line " + std::to_string(row) + " is not a number");
        samples.push_back(v);
      }
      const GevFit fit = gev_fit_mle(samples);
      nlohmann::ordered_json j{{"mu", fit.params.mu},
                               {"sigma", fit.params.sigma},
                               {"xi", fit.params.xi},
                               {"loglik", fit.loglik},
                               {"converged", fit.converged},
                               {"iterations", fit.iterations},
                               {"n_samples", samples.size()}};
      write_json(j, gev_out);
    }
  } catch (const Error& e) {
    fail(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    fail("internal", e.what());
    return 1;
  }
  return 0;
}
