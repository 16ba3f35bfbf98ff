#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "featlab/errors.hpp"
#include "featlab/experiment.hpp"

using namespace featlab;

namespace {

const char* kSmallConfig = R"(# small single-index run
setting = single_index
d = 4
n_grid = 64, 128
m1 = 32
m2_mode = infinite
sigma2 = relu
link = identity
seeds = 0, 1
holdout_n = 1024
test_n = 1024
)";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Drops the two timing columns so that rows can be compared across runs.
std::string strip_timing(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (i != 9 && i != 10) out << fields[i] << ',';
    out << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("config parsing") {
  ExperimentConfig config = parse_config(kSmallConfig);
  CHECK(config.setting == Setting::single_index);
  CHECK(config.d == 4);
  CHECK(config.n_grid == std::vector<int>{64, 128});
  CHECK_FALSE(config.m2.has_value());
  CHECK(config.seeds == std::vector<std::uint64_t>{0, 1});
  CHECK(parse_config("n_grid = 8\nm2_mode = finite(64)\n").m2 == 64);
  CHECK(parse_config("n_grid = 8\nm2_mode = finite:32\n").m2 == 32);

  CHECK_THROWS_AS(parse_config("n_grid =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_grid = 8\nwidth = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_grid = 8\nd = four\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("setting = cubic\n"), ConfigError);
  ExperimentConfig empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  const ExperimentConfig a = parse_config(kSmallConfig);
  const ExperimentConfig b = parse_config(std::string(kSmallConfig) + "output_path = elsewhere.csv\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  const ExperimentConfig c = parse_config(std::string(kSmallConfig) + "m1 = 33\n");
  CHECK(a.hash() != c.hash());
}

TEST_CASE("csv formatting") {
  ResultRecord r;
  r.config_hash = "abc";
  r.setting = Setting::quadratic;
  r.d = 16;
  r.n = 1024;
  r.seed = 3;
  r.test_mse = 0.1;
  r.feature_corr = 1.0 / 3.0;
  const std::string row = csv_row(r);
  CHECK(row.find("0.10000000000000001") != std::string::npos);
  CHECK(row.find("0.33333333333333331") != std::string::npos);
  CHECK(row.back() == '\n');
  CHECK(csv_header().rfind("config_hash,setting,d,n,seed,", 0) == 0);

  r.error = "bad, thing";
  const std::string failed = csv_row(r);
  CHECK(failed.find("abc,quadratic,16,1024,3,,,,,") == 0);
  CHECK(failed.find("\"bad, thing\"") != std::string::npos);
}

TEST_CASE("seed offset from the environment") {
  unsetenv("FEATLAB_SEED_OFFSET");
  CHECK(seed_offset_from_env() == 0);
  setenv("FEATLAB_SEED_OFFSET", "17", 1);
  CHECK(seed_offset_from_env() == 17);
  setenv("FEATLAB_SEED_OFFSET", "x", 1);
  CHECK_THROWS_AS(seed_offset_from_env(), ConfigError);
  unsetenv("FEATLAB_SEED_OFFSET");
}

TEST_CASE("small run writes sorted, reproducible results") {
  const auto dir = std::filesystem::temp_directory_path() / "featlab_test_run";
  std::filesystem::create_directories(dir);
  ExperimentConfig config = parse_config(kSmallConfig);
  config.output_path = (dir / "a.csv").string();

  int seen = 0;
  RunOptions options;
  options.workers = 2;
  options.on_record = [&](const ResultRecord&) {
    ++seen;
    // Every finished cell is on disk before the callback fires.
    const std::string partial = read_file(config.output_path);
    CHECK(std::count(partial.begin(), partial.end(), '\n') == 1 + seen);
  };
  const std::vector<ResultRecord> records = run(config, options);
  REQUIRE(records.size() == 4);
  CHECK(seen == 4);
  for (std::size_t i = 1; i < records.size(); ++i)
    CHECK(std::make_pair(records[i - 1].n, records[i - 1].seed) < std::make_pair(records[i].n, records[i].seed));
  for (const ResultRecord& r : records) {
    CHECK(r.error.empty());
    CHECK(r.config_hash == config.hash());
  }

  ExperimentConfig again = config;
  again.output_path = (dir / "b.csv").string();
  RunOptions serial;
  run(again, serial);
  CHECK(strip_timing(read_file(config.output_path)) == strip_timing(read_file(again.output_path)));

  const auto sidecar = nlohmann::json::parse(read_file(config.output_path + ".json"));
  CHECK(sidecar["version"] == version());
  CHECK(sidecar["config_hash"] == config.hash());
  CHECK(sidecar["seed_offset"] == 0);

  RunOptions shifted;
  shifted.write_files = false;
  shifted.seed_offset = 1;
  const std::vector<ResultRecord> offset = run(config, shifted);
  CHECK(offset[0].seed == 1);
  CHECK(offset[0].test_mse == records[1].test_mse);
  std::filesystem::remove_all(dir);
}

TEST_CASE("lower-bound table rows") {
  const auto rows = lb_table({1000, 10, 11}, {1.0}, {1.0}, 1.0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].status == "ok");
  CHECK(rows[0].epsilon <= 1.0 / 2048.0);
  CHECK(rows[1].status == "none");
  CHECK(rows[2].status == "error");
  std::ostringstream out;
  write_lb_table(out, rows);
  CHECK(out.str().rfind("d,m,B,alpha,status,k_star,epsilon,m_bound,B_bound,message\n", 0) == 0);
}
