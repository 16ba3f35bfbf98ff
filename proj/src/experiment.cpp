#include "featlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "featlab/analysis.hpp"
#include "featlab/errors.hpp"
#include "featlab/training.hpp"

namespace featlab {

namespace {

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  try {
    T value{};
    if constexpr (std::is_same_v<T, double>) {
      value = std::stod(text, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
      value = std::stoull(text, &used);
    } else {
      value = static_cast<T>(std::stoll(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const std::string& item : split_list(text)) out.push_back(parse_number<T>(key, item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::string to_string(SymmetricKind kind) {
  return kind == SymmetricKind::gauss_sym ? "gauss_sym" : "projection_half";
}

std::string to_string(Distribution distribution) {
  return distribution == Distribution::sphere_sqrt_d ? "sphere" : "gaussian";
}

std::string m2_mode_string(const std::optional<int>& m2) {
  return m2 ? "finite(" + std::to_string(*m2) + ")" : "infinite";
}

std::optional<int> parse_m2_mode(const std::string& text) {
  if (text == "infinite") return std::nullopt;
  for (const std::string prefix : {"finite(", "finite:"}) {
    if (text.rfind(prefix, 0) == 0) {
      std::string body = text.substr(prefix.size());
      if (prefix.back() == '(') {
        if (body.empty() || body.back() != ')') break;
        body.pop_back();
      }
      return parse_number<int>("m2_mode", trim(body));
    }
  }
  throw ConfigError("config key 'm2_mode': expected 'infinite' or 'finite(<m2>)', got '" + text + "'");
}

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += "\"\"";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out + "\"";
}

std::string csv_text(const std::vector<ResultRecord>& records) {
  std::string out = csv_header();
  for (const ResultRecord& record : records) out += csv_row(record);
  return out;
}

}  // namespace

std::string version() { return FEATLAB_VERSION; }

std::string to_string(Setting setting) {
  switch (setting) {
    case Setting::single_index:
      return "single_index";
    case Setting::quadratic:
      return "quadratic";
    case Setting::separation:
      return "separation";
  }
  return "unknown";
}

Setting parse_setting(const std::string& text) {
  if (text == "single_index") return Setting::single_index;
  if (text == "quadratic") return Setting::quadratic;
  if (text == "separation") return Setting::separation;
  throw ConfigError("unknown setting '" + text + "'");
}

void ExperimentConfig::resolve() {
  if (eta_grid.empty()) eta_grid = default_eta_grid();
  if (lambda_grid.empty()) lambda_grid = default_lambda_grid();
  if (holdout_n == 0 && !n_grid.empty()) {
    holdout_n = std::min(1 << 15, 8 * *std::max_element(n_grid.begin(), n_grid.end()));
  }
  if (!distribution) {
    distribution = setting == Setting::single_index ? Distribution::std_gaussian : Distribution::sphere_sqrt_d;
  }
}

void ExperimentConfig::validate() const {
  if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("n_grid entries must be positive");
    if (i && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly ascending");
  }
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (test_n < 1000) throw ConfigError("test_n must be at least 1000");
  if (holdout_n < 1) throw ConfigError("holdout_n must be positive");
  if (d < 2) throw ConfigError("d must be at least 2");
  if (setting == Setting::separation && (d < 4 || d % 2 != 0)) {
    throw ConfigError("separation setting needs an even d >= 4");
  }
  if (setting == Setting::quadratic && a_kind == SymmetricKind::projection_half && d % 2 != 0) {
    throw ConfigError("projection_half needs an even d");
  }
  if (m1 < 1) throw ConfigError("m1 must be positive");
  if (m2 && *m2 < 1) throw ConfigError("m2 must be positive");
  if (eta_bar && !(*eta_bar > 0.0)) throw ConfigError("eta_bar must be positive");
  for (double v : eta_grid) {
    if (!(v > 0.0)) throw ConfigError("eta_grid entries must be positive");
  }
  for (double v : lambda_grid) {
    if (!(v > 0.0)) throw ConfigError("lambda_grid entries must be positive");
  }
  try {
    Activation::parse(sigma2);
    Link::parse(link);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> fields;
  fields["setting"] = to_string(setting);
  fields["d"] = std::to_string(d);
  fields["n_grid"] = join(n_grid);
  fields["m1"] = std::to_string(m1);
  fields["m2_mode"] = m2_mode_string(m2);
  fields["sigma2"] = sigma2;
  fields["link"] = link;
  fields["a_kind"] = to_string(a_kind);
  fields["normalization"] = to_string(normalization);
  fields["seeds"] = join(seeds);
  fields["holdout_n"] = std::to_string(holdout_n);
  fields["test_n"] = std::to_string(test_n);
  fields["eta_grid"] = join(eta_grid);
  fields["lambda_grid"] = join(lambda_grid);
  fields["distribution"] = distribution ? to_string(*distribution) : "default";
  fields["eta_bar"] = eta_bar ? format_double(*eta_bar) : "calibrated";
  fields["solver"] = solver == Stage2Solver::Kind::direct ? "direct" : "gd";
  fields["random_rotation"] = random_rotation ? "true" : "false";
  std::string out;
  for (const auto& [key, value] : fields) out += key + " = " + value + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  config.seeds.clear();
  bool seeds_given = false;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

    if (key == "setting") config.setting = parse_setting(value);
    else if (key == "d") config.d = parse_number<int>(key, value);
    else if (key == "n_grid") config.n_grid = parse_list<int>(key, value);
    else if (key == "m1") config.m1 = parse_number<int>(key, value);
    else if (key == "m2_mode") config.m2 = parse_m2_mode(value);
    else if (key == "sigma2") config.sigma2 = value;
    else if (key == "link") config.link = value;
    else if (key == "a_kind") {
      if (value == "gauss_sym") config.a_kind = SymmetricKind::gauss_sym;
      else if (value == "projection_half") config.a_kind = SymmetricKind::projection_half;
      else throw ConfigError("unknown a_kind '" + value + "'");
    } else if (key == "normalization") {
      try {
        config.normalization = parse_normalization(value);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "seeds") {
      config.seeds = parse_list<std::uint64_t>(key, value);
      seeds_given = true;
    } else if (key == "holdout_n") config.holdout_n = parse_number<int>(key, value);
    else if (key == "test_n") config.test_n = parse_number<int>(key, value);
    else if (key == "eta_grid") config.eta_grid = parse_list<double>(key, value);
    else if (key == "lambda_grid") config.lambda_grid = parse_list<double>(key, value);
    else if (key == "output_path") config.output_path = value;
    else if (key == "distribution") {
      if (value == "sphere") config.distribution = Distribution::sphere_sqrt_d;
      else if (value == "gaussian") config.distribution = Distribution::std_gaussian;
      else throw ConfigError("unknown distribution '" + value + "'");
    } else if (key == "eta_bar") config.eta_bar = parse_number<double>(key, value);
    else if (key == "solver") {
      if (value == "direct") config.solver = Stage2Solver::Kind::direct;
      else if (value == "gd") config.solver = Stage2Solver::Kind::gd;
      else throw ConfigError("unknown solver '" + value + "'");
    } else if (key == "random_rotation") {
      if (value != "true" && value != "false") throw ConfigError("random_rotation must be true or false");
      config.random_rotation = value == "true";
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (!seeds_given) config.seeds = {0, 1, 2, 3, 4};
  config.resolve();
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string csv_header() {
  return "config_hash,setting,d,n,seed,eta_chosen,lambda_chosen,test_mse,feature_corr,stage1_seconds,"
         "stage2_seconds,error\n";
}

std::string csv_row(const ResultRecord& r) {
  std::string out = r.config_hash + "," + to_string(r.setting) + "," + std::to_string(r.d) + "," +
                    std::to_string(r.n) + "," + std::to_string(r.seed) + ",";
  if (r.error.empty()) {
    out += format_double(r.eta_chosen) + "," + format_double(r.lambda_chosen) + "," + format_double(r.test_mse) +
           "," + format_double(r.feature_corr) + ",";
  } else {
    out += ",,,,";
  }
  out += format_double(r.stage1_seconds) + "," + format_double(r.stage2_seconds) + "," + csv_escape(r.error) + "\n";
  return out;
}

std::uint64_t seed_offset_from_env() {
  const char* raw = std::getenv("FEATLAB_SEED_OFFSET");
  if (raw == nullptr || trim(raw).empty()) return 0;
  return parse_number<std::uint64_t>("FEATLAB_SEED_OFFSET", trim(raw));
}

TargetSpec make_target(const ExperimentConfig& config, std::uint64_t seed) {
  const Seed base{seed, streams::target};
  switch (config.setting) {
    case Setting::single_index:
      return make_random_single_index(config.d, Link::parse(config.link), base);
    case Setting::quadratic: {
      const Matrix A = normalize_quadratic(random_symmetric_traceless(config.d, config.a_kind, base),
                                           config.normalization);
      return make_quadratic(A, Link::parse(config.link), true, base.stream(streams::target + 100));
    }
    case Setting::separation:
      return make_separation_target(config.d, base, config.random_rotation);
  }
  throw ConfigError("unknown setting");
}

std::string sidecar_json(const ExperimentConfig& config, std::uint64_t seed_offset) {
  nlohmann::ordered_json config_json;
  config_json["setting"] = to_string(config.setting);
  config_json["d"] = config.d;
  config_json["n_grid"] = config.n_grid;
  config_json["m1"] = config.m1;
  config_json["m2_mode"] = m2_mode_string(config.m2);
  config_json["sigma2"] = config.sigma2;
  config_json["link"] = config.link;
  config_json["a_kind"] = to_string(config.a_kind);
  config_json["normalization"] = to_string(config.normalization);
  config_json["seeds"] = config.seeds;
  config_json["holdout_n"] = config.holdout_n;
  config_json["test_n"] = config.test_n;
  config_json["eta_grid"] = config.eta_grid;
  config_json["lambda_grid"] = config.lambda_grid;
  config_json["output_path"] = config.output_path;
  config_json["distribution"] = config.distribution ? to_string(*config.distribution) : "default";
  config_json["eta_bar"] = config.eta_bar ? nlohmann::ordered_json(*config.eta_bar) : nlohmann::ordered_json("calibrated");
  config_json["solver"] = config.solver == Stage2Solver::Kind::direct ? "direct" : "gd";
  config_json["random_rotation"] = config.random_rotation;

  nlohmann::ordered_json out;
  out["version"] = version();
  out["config_hash"] = config.hash();
  out["seed_offset"] = seed_offset;
  out["config"] = config_json;
  return out.dump(2) + "\n";
}

std::vector<ResultRecord> run(const ExperimentConfig& input, const RunOptions& options) {
  ExperimentConfig config = input;
  config.resolve();
  config.validate();
  const std::string config_hash = config.hash();

  struct SeedTarget {
    std::uint64_t seed = 0;
    std::optional<TargetSpec> target;
    std::string error;
  };
  std::vector<SeedTarget> targets;
  for (std::uint64_t raw : config.seeds) {
    SeedTarget entry;
    entry.seed = raw + options.seed_offset;
    try {
      entry.target = make_target(config, entry.seed);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    targets.push_back(std::move(entry));
  }

  struct Cell {
    int n;
    std::size_t seed_index;
  };
  std::vector<Cell> cells;
  for (int n : config.n_grid) {
    for (std::size_t s = 0; s < targets.size(); ++s) cells.push_back({n, s});
  }

  std::ofstream csv;
  if (options.write_files) {
    const std::filesystem::path path(config.output_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream sidecar(config.output_path + ".json");
    if (!sidecar) throw ConfigError("cannot write '" + config.output_path + ".json'");
    sidecar << sidecar_json(config, options.seed_offset);
    csv.open(config.output_path, std::ios::trunc);
    if (!csv) throw ConfigError("cannot write '" + config.output_path + "'");
    csv << csv_header() << std::flush;
  }

  std::vector<ResultRecord> records(cells.size());
  std::mutex sink;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      const SeedTarget& entry = targets[cell.seed_index];
      ResultRecord record;
      record.config_hash = config_hash;
      record.setting = config.setting;
      record.d = config.d;
      record.n = cell.n;
      record.seed = entry.seed;
      try {
        if (!entry.target) throw ConfigError("target construction failed: " + entry.error);
        CellConfig cell_config;
        cell_config.target = *entry.target;
        cell_config.distribution = *config.distribution;
        cell_config.n = cell.n;
        cell_config.m1 = config.m1;
        cell_config.m2 = config.m2;
        cell_config.sigma2 = Activation::parse(config.sigma2);
        cell_config.holdout_n = config.holdout_n;
        cell_config.test_n = config.test_n;
        cell_config.eta_grid = config.eta_grid;
        cell_config.lambda_grid = config.lambda_grid;
        cell_config.eta_bar_override = config.eta_bar;
        cell_config.solver.kind = config.solver;
        cell_config.seed = Seed{entry.seed, 0};
        const TrainResult result = train_full(cell_config);
        record.eta_chosen = result.eta_chosen;
        record.lambda_chosen = result.lambda_chosen;
        record.test_mse = result.test_mse;
        record.feature_corr = result.feature_corr;
        record.stage1_seconds = result.stage1_seconds;
        record.stage2_seconds = result.stage2_seconds;
      } catch (const std::exception& e) {
        record.error = e.what();
        if (record.error.empty()) record.error = "unknown error";
      }
      std::lock_guard<std::mutex> lock(sink);
      records[i] = record;
      if (csv.is_open()) csv << csv_row(record) << std::flush;
      if (options.on_record) options.on_record(record);
    }
  };

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(cells.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::stable_sort(records.begin(), records.end(), [](const ResultRecord& x, const ResultRecord& y) {
    return std::tie(x.n, x.seed) < std::tie(y.n, y.seed);
  });
  if (options.write_files) {
    csv.close();
    const std::string tmp = config.output_path + ".tmp";
    {
      std::ofstream sorted(tmp, std::ios::trunc);
      sorted << csv_text(records);
      if (!sorted) throw ConfigError("cannot write '" + tmp + "'");
    }
    std::filesystem::rename(tmp, config.output_path);
  }
  return records;
}

std::vector<LowerBoundRow> lb_table(const std::vector<int>& d_list, const std::vector<double>& m_list,
                                    const std::vector<double>& B_list, double alpha_sigma) {
  std::vector<LowerBoundRow> rows;
  for (int d : d_list) {
    for (double m : m_list) {
      for (double B : B_list) {
        LowerBoundRow row;
        row.d = d;
        row.m = m;
        row.B = B;
        row.alpha = alpha_sigma;
        try {
          const auto cert = two_layer_lower_bound(d, m, B, alpha_sigma);
          if (cert) {
            row.status = "ok";
            row.k_star = cert->k_star;
            row.epsilon = cert->epsilon;
            row.m_bound = cert->m_bound;
            row.B_bound = cert->B_bound;
          } else {
            row.status = "none";
          }
        } catch (const std::exception& e) {
          row.status = "error";
          row.message = e.what();
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_lb_table(std::ostream& out, const std::vector<LowerBoundRow>& rows) {
  out << "d,m,B,alpha,status,k_star,epsilon,m_bound,B_bound,message\n";
  for (const LowerBoundRow& row : rows) {
    out << row.d << "," << format_double(row.m) << "," << format_double(row.B) << "," << format_double(row.alpha)
        << "," << row.status << ",";
    if (row.status == "ok") {
      out << row.k_star << "," << format_double(row.epsilon) << "," << format_double(row.m_bound) << ","
          << format_double(row.B_bound);
    } else {
      out << ",,,";
    }
    out << "," << csv_escape(row.message) << "\n";
  }
}

}  // namespace featlab
