#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "featlab/activation.hpp"
#include "featlab/network.hpp"
#include "featlab/sampling.hpp"
#include "featlab/targets.hpp"

namespace featlab {

std::string version();

enum class Setting { single_index, quadratic, separation };

std::string to_string(Setting setting);
Setting parse_setting(const std::string& text);

struct ExperimentConfig {
  Setting setting = Setting::quadratic;
  int d = 16;
  std::vector<int> n_grid;
  int m1 = 512;
  /// Inner width; unset means infinite width (closed-form kernel).
  std::optional<int> m2;
  std::string sigma2 = "relu";
  std::string link = "cube";
  SymmetricKind a_kind = SymmetricKind::gauss_sym;
  Normalization normalization = Normalization::theory;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  /// Zero means min(2^15, 8 max(n_grid)).
  int holdout_n = 0;
  int test_n = 1 << 15;
  std::vector<double> eta_grid;
  std::vector<double> lambda_grid;
  std::string output_path = "results.csv";
  /// Covariate law; defaults to N(0, I) for single_index and the sqrt(d)-sphere otherwise.
  std::optional<Distribution> distribution;
  std::optional<double> eta_bar;
  Stage2Solver::Kind solver = Stage2Solver::Kind::direct;
  bool random_rotation = true;

  /// Fills defaults that depend on other fields.
  void resolve();
  /// Throws ConfigError on invalid combinations.
  void validate() const;
  /// Canonical "key = value" lines, sorted by key; output_path excluded.
  std::string canonical() const;
  /// FNV-1a hash of canonical(), as 16 hex digits.
  std::string hash() const;
};

/// Parses the "key = value" format ('#' starts a comment, lists are comma separated).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct ResultRecord {
  std::string config_hash;
  Setting setting = Setting::quadratic;
  int d = 0;
  int n = 0;
  std::uint64_t seed = 0;
  double eta_chosen = 0.0;
  double lambda_chosen = 0.0;
  double test_mse = 0.0;
  double feature_corr = 0.0;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  /// Empty unless the cell failed.
  std::string error;
};

std::string csv_header();
std::string csv_row(const ResultRecord& record);

/// Value of FEATLAB_SEED_OFFSET (0 when unset). Throws ConfigError when malformed.
std::uint64_t seed_offset_from_env();

/// Target for one seed; shared by every n of that seed.
TargetSpec make_target(const ExperimentConfig& config, std::uint64_t seed);

struct RunOptions {
  int workers = 1;
  std::uint64_t seed_offset = 0;
  /// Write the CSV and JSON sidecar to config.output_path.
  bool write_files = true;
  /// Called after each finished cell (from the sink, serialized).
  std::function<void(const ResultRecord&)> on_record;
};

/// Runs every (n, seed) cell. A failing cell yields a record with the error message set.
/// Records are appended to the CSV as they complete and the file is rewritten sorted by
/// (n, seed) at the end; the result vector has the same order.
std::vector<ResultRecord> run(const ExperimentConfig& config, const RunOptions& options = {});

/// JSON sidecar with the resolved config, its hash, the seed offset and the library version.
std::string sidecar_json(const ExperimentConfig& config, std::uint64_t seed_offset);

struct LowerBoundRow {
  int d = 0;
  double m = 0.0;
  double B = 0.0;
  double alpha = 0.0;
  /// "ok", "none" or "error".
  std::string status;
  int k_star = 0;
  double epsilon = 0.0;
  double m_bound = 0.0;
  double B_bound = 0.0;
  std::string message;
};

/// One row per (d, m, B) combination; odd d gives an error row.
std::vector<LowerBoundRow> lb_table(const std::vector<int>& d_list, const std::vector<double>& m_list,
                                    const std::vector<double>& B_list, double alpha_sigma);
void write_lb_table(std::ostream& out, const std::vector<LowerBoundRow>& rows);

}  // namespace featlab
