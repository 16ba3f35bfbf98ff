#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "featlab/checks.hpp"
#include "featlab/errors.hpp"
#include "featlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"featlab: layer-wise training of three-layer networks and its diagnostics"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment sweep from a config file");
  std::string config_path;
  int workers = 1;
  run_cmd->add_option("--config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--workers", workers, "Concurrent sweep cells")->check(CLI::PositiveNumber);

  auto* check_cmd = app.add_subcommand("check", "Run invariant suites");
  std::string suite = "all";
  int k_max = -1;
  check_cmd->add_option("--suite", suite, "gegenbauer, kernel, training, analysis or all")
      ->check(CLI::IsMember({"gegenbauer", "kernel", "training", "analysis", "all"}));
  check_cmd->add_option("--kernel-k-max", k_max, "Pin the closed-form kernel truncation");

  auto* lb_cmd = app.add_subcommand("lb-table", "Two-layer lower-bound certificates as CSV");
  std::vector<int> d_list;
  std::vector<double> m_list;
  std::vector<double> B_list;
  double alpha = 1.0;
  lb_cmd->add_option("--d", d_list, "Even dimensions")->delimiter(',');
  lb_cmd->add_option("--m", m_list, "Widths")->delimiter(',');
  lb_cmd->add_option("--B", B_list, "Weight bounds")->delimiter(',');
  lb_cmd->add_option("--alpha", alpha, "Activation growth exponent");

  app.add_subcommand("version", "Print the library version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("version")) {
      std::cout << "featlab " << featlab::version() << "\n";
      return 0;
    }
    if (app.got_subcommand("lb-table")) {
      featlab::write_lb_table(std::cout, featlab::lb_table(d_list, m_list, B_list, alpha));
      return 0;
    }
    if (app.got_subcommand("check")) {
      featlab::CheckOptions options;
      if (k_max >= 0) options.kernel_k_max = k_max;
      const auto results = featlab::run_checks(suite, options);
      featlab::print_report(std::cout, results);
      return featlab::all_passed(results) ? 0 : 1;
    }
    const featlab::ExperimentConfig config = featlab::load_config(config_path);
    featlab::RunOptions options;
    options.workers = workers;
    options.seed_offset = featlab::seed_offset_from_env();
    options.on_record = [](const featlab::ResultRecord& r) {
      std::cerr << "n=" << r.n << " seed=" << r.seed;
      if (r.error.empty()) {
        std::cerr << " test_mse=" << r.test_mse << " feature_corr=" << r.feature_corr << "\n";
      } else {
        std::cerr << " error: " << r.error << "\n";
      }
    };
    const auto records = featlab::run(config, options);
    std::cerr << records.size() << " records written to " << config.output_path << "\n";
    return 0;
  } catch (const featlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
