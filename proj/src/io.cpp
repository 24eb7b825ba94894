#include "tobitls/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace tobitls {

using nlohmann::json;
using nlohmann::ordered_json;

Scale parse_scale(const std::string& s) {
  if (s == "log") return Scale::Log;
  if (s == "natural") return Scale::Natural;
  throw UsageError("scale must be 'log' or 'natural', got '" + s + "'");
}

std::string scale_name(Scale s) { return s == Scale::Log ? "log" : "natural"; }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t line, const std::string& column) {
  const std::string where = "line " + std::to_string(line) + ", column '" + column + "'";
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
    throw UsageError(where + ": missing value");
  }
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw UsageError(where + ": cannot parse '" + cell + "' as a number");
  }
  if (!std::isfinite(v)) throw UsageError(where + ": non-finite value");
  return v;
}

double to_model_scale(double v, Scale scale, const std::string& what) {
  if (scale == Scale::Log) return v;
  if (!(v > 0.0)) throw UsageError(what + " must be positive on the natural scale, got " + format_number(v));
  return std::log(v);
}

}  // namespace

LoadedData load_dataset_csv(std::istream& in, const CsvLoadOptions& opts) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw UsageError("dataset is empty (no header row)");
  int y_col = -1, c_col = -1;
  std::vector<int> cov_cols;
  std::set<std::string> seen;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].empty()) throw UsageError("line " + std::to_string(lineno) + ": empty column name");
    if (!seen.insert(header[j]).second) throw UsageError("duplicate column '" + header[j] + "'");
    if (header[j] == "y") {
      y_col = static_cast<int>(j);
    } else if (header[j] == "censored") {
      c_col = static_cast<int>(j);
    } else {
      cov_cols.push_back(static_cast<int>(j));
    }
  }
  if (y_col < 0) throw UsageError("missing required column 'y'");
  if (c_col < 0) throw UsageError("missing required column 'censored'");
  if (opts.intercept && seen.count("intercept")) {
    throw UsageError("column 'intercept' clashes with the prepended intercept; use --no-intercept");
  }

  std::vector<double> ys;
  std::vector<bool> cens;
  std::vector<std::vector<double>> covs;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw UsageError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(cells.size()));
    }
    const double cv = parse_cell(cells[static_cast<std::size_t>(c_col)], lineno, "censored");
    if (cv != 0.0 && cv != 1.0) {
      throw UsageError("line " + std::to_string(lineno) + ": censored must be 0 or 1");
    }
    const double yv = parse_cell(cells[static_cast<std::size_t>(y_col)], lineno, "y");
    try {
      ys.push_back(to_model_scale(yv, opts.response_scale, "y"));
    } catch (const UsageError& e) {
      throw UsageError("line " + std::to_string(lineno) + ": " + e.what());
    }
    cens.push_back(cv == 1.0);
    std::vector<double> row;
    for (const int j : cov_cols) row.push_back(parse_cell(cells[static_cast<std::size_t>(j)], lineno, header[static_cast<std::size_t>(j)]));
    covs.push_back(std::move(row));
    lines.push_back(lineno);
  }
  const auto n = static_cast<Eigen::Index>(ys.size());
  if (n == 0) throw UsageError("dataset has no data rows");

  std::vector<std::string> warnings;
  double gamma = 0.0;
  if (opts.gamma) {
    gamma = to_model_scale(*opts.gamma, opts.gamma_scale, "gamma");
  } else {
    const bool any_censored = std::find(cens.begin(), cens.end(), true) != cens.end();
    const double ymin = *std::min_element(ys.begin(), ys.end());
    if (any_censored) {
      gamma = ymin;
      warnings.push_back("no threshold given; using the minimum observed y = " + format_number(gamma) +
                             " (log scale) as gamma");
    } else {
      gamma = ymin - 1.0;
      warnings.push_back("no threshold given and no censored rows; gamma set below the smallest y (" +
                             format_number(gamma) + "), which does not affect the fit");
    }
  }

  int overwritten = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (cens[k]) {
      if (std::abs(ys[k] - gamma) > 1e-9 * (1.0 + std::abs(gamma))) ++overwritten;
      ys[k] = gamma;
    } else if (!(ys[k] > gamma)) {
      throw UsageError("line " + std::to_string(lines[k]) + ": uncensored y = " + format_number(ys[k]) +
                       " is not above the threshold " + format_number(gamma));
    }
  }
  if (overwritten > 0) {
    warnings.push_back(std::to_string(overwritten) + " censored rows had y different from gamma; set to gamma");
  }

  const auto p = static_cast<Eigen::Index>(cov_cols.size()) + (opts.intercept ? 1 : 0);
  if (p == 0) throw UsageError("no covariates and no intercept");
  Eigen::MatrixXd X(n, p);
  std::vector<std::string> names;
  if (opts.intercept) names.push_back("intercept");
  for (const int j : cov_cols) names.push_back(header[static_cast<std::size_t>(j)]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    if (opts.intercept) X(i, c++) = 1.0;
    for (const double v : covs[static_cast<std::size_t>(i)]) X(i, c++) = v;
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  try {
    return {TobitDataset::create(std::move(y), std::move(cens), std::move(X), gamma, std::move(names)),
            std::move(warnings)};
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

LoadedData load_dataset_csv(const std::string& path, const CsvLoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset '" + path + "'");
  return load_dataset_csv(in, opts);
}

void write_dataset_csv(std::ostream& out, const TobitDataset& data) {
  const auto& names = data.covariate_names();
  out << "y,censored";
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    if (names[static_cast<std::size_t>(j)] == "intercept") continue;
    out << ',' << names[static_cast<std::size_t>(j)];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_number(data.y()[i]) << ',' << (data.is_censored(i) ? 1 : 0);
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      if (names[static_cast<std::size_t>(j)] == "intercept") continue;
      out << ',' << format_number(data.X()(i, j));
    }
    out << '\n';
  }
}

ordered_json family_to_json(const GeneratorFamily& family) {
  ordered_json j;
  j["family"] = family.name();
  j["xi"] = std::vector<double>(family.xi().begin(), family.xi().end());
  return j;
}

ordered_json optim_to_json(const OptimOptions& o) {
  ordered_json j;
  j["max_iterations"] = o.max_iterations;
  j["gradient_tolerance"] = o.gradient_tolerance;
  j["step_tolerance"] = o.step_tolerance;
  j["armijo"] = o.armijo;
  j["contraction"] = o.contraction;
  j["log_dispersion"] = o.log_dispersion;
  return j;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw UsageError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string fmt_fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

OptimOptions optim_from_json(const json& j) {
  reject_unknown(j, {"max_iterations", "gradient_tolerance", "step_tolerance", "armijo", "contraction",
                     "log_dispersion"},
                 "optimizer");
  OptimOptions o;
  o.max_iterations = get_or(j, "max_iterations", o.max_iterations);
  o.gradient_tolerance = get_or(j, "gradient_tolerance", o.gradient_tolerance);
  o.step_tolerance = get_or(j, "step_tolerance", o.step_tolerance);
  o.armijo = get_or(j, "armijo", o.armijo);
  o.contraction = get_or(j, "contraction", o.contraction);
  o.log_dispersion = get_or(j, "log_dispersion", o.log_dispersion);
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return o;
}

std::string test_kind_name(TestKind kind) { return kind == TestKind::LR ? "LR" : "GR"; }

ordered_json fit_to_json(const FitResult& fit) {
  ordered_json j;
  j["family"] = family_to_json(fit.theta_hat.family);
  ordered_json est = ordered_json::array();
  const Eigen::VectorXd v = pack(fit.theta_hat);
  for (std::size_t k = 0; k < fit.names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    ordered_json e;
    e["name"] = fit.names[k];
    e["estimate"] = v[i];
    if (std::isfinite(fit.se[i])) {
      e["se"] = fit.se[i];
    } else {
      e["se"] = nullptr;
    }
    e["fixed"] = static_cast<bool>(fit.fixed[k]);
    est.push_back(e);
  }
  j["estimates"] = est;
  if (!fit.theta_hat.phi_free()) j["fixed_phi"] = fit.theta_hat.phi;
  if (!fit.se_error.empty()) j["se_error"] = fit.se_error;
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["free_parameters"] = fit.free_parameters;
  j["n_total"] = fit.n_total;
  j["n_censored"] = fit.n_censored;
  j["censored_proportion"] =
      fit.n_total ? static_cast<double>(fit.n_censored) / static_cast<double>(fit.n_total) : 0.0;
  ordered_json opt;
  opt["converged"] = fit.optim.converged;
  opt["iterations"] = fit.optim.iterations;
  opt["max_abs_gradient"] = fit.optim.final_gradient_norm;
  opt["skipped_updates"] = fit.optim.skipped_updates;
  opt["message"] = fit.optim.message;
  j["optimizer"] = opt;
  return j;
}

ordered_json test_to_json(const TestResult& t) {
  ordered_json j;
  j["kind"] = test_kind_name(t.kind);
  j["statistic"] = t.statistic;
  j["df"] = t.df;
  j["p_value"] = t.p_value;
  j["warning_flags"] = t.warnings;
  j["restricted"] = fit_to_json(t.restricted);
  j["unrestricted"] = fit_to_json(t.unrestricted);
  return j;
}

namespace {

GeneratorFamily family_from_json(const json& j) {
  const auto name = get_or<std::string>(j, "family", "normal");
  const auto xi = get_or<std::vector<double>>(j, "xi", {});
  try {
    return GeneratorFamily::parse(name, xi);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

Eigen::VectorXd vec_from(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> vec_to(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

const std::set<std::string> kCommonKeys{"version", "study", "family", "xi", "n_grid", "rho_grid", "beta_true",
                                        "replications", "seed", "threads", "fixed_design", "optimizer"};

void check_header(const json& j, const std::string& study, std::set<std::string> allowed) {
  allowed.insert(kCommonKeys.begin(), kCommonKeys.end());
  reject_unknown(j, allowed, "config");
  if (get_or<int>(j, "version", 1) != 1) throw UsageError("config: unsupported version (expected 1)");
  if (j.contains("study") && j.at("study").get<std::string>() != study) {
    throw UsageError("config: study is '" + j.at("study").get<std::string>() + "', expected '" + study + "'");
  }
}

}  // namespace

BiasMseConfig bias_config_from_json(const json& j) {
  check_header(j, "bias-mse", {"phi_grid"});
  BiasMseConfig c;
  c.family = family_from_json(j);
  c.n_grid = get_or(j, "n_grid", c.n_grid);
  c.phi_grid = get_or(j, "phi_grid", c.phi_grid);
  c.rho_grid = get_or(j, "rho_grid", c.rho_grid);
  if (j.contains("beta_true")) c.beta_true = vec_from(get_or<std::vector<double>>(j, "beta_true", {}));
  c.replications = get_or(j, "replications", c.replications);
  c.seed = get_or(j, "seed", c.seed);
  c.threads = get_or(j, "threads", c.threads);
  c.fixed_design = get_or(j, "fixed_design", c.fixed_design);
  if (j.contains("optimizer")) c.optim = optim_from_json(j.at("optimizer"));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

PowerConfig power_config_from_json(const json& j) {
  check_header(j, "power", {"phi", "beta4_grid", "nominal_levels"});
  PowerConfig c;
  c.family = family_from_json(j);
  c.n_grid = get_or(j, "n_grid", c.n_grid);
  c.phi = get_or(j, "phi", c.phi);
  c.rho_grid = get_or(j, "rho_grid", c.rho_grid);
  if (j.contains("beta_true")) c.beta_true = vec_from(get_or<std::vector<double>>(j, "beta_true", {}));
  c.beta4_grid = get_or(j, "beta4_grid", c.beta4_grid);
  c.nominal_levels = get_or(j, "nominal_levels", c.nominal_levels);
  c.replications = get_or(j, "replications", c.replications);
  c.seed = get_or(j, "seed", c.seed);
  c.threads = get_or(j, "threads", c.threads);
  c.fixed_design = get_or(j, "fixed_design", c.fixed_design);
  if (j.contains("optimizer")) c.optim = optim_from_json(j.at("optimizer"));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

ordered_json config_to_json(const BiasMseConfig& c) {
  ordered_json j;
  j["version"] = 1;
  j["study"] = "bias-mse";
  j["family"] = c.family.name();
  j["xi"] = std::vector<double>(c.family.xi().begin(), c.family.xi().end());
  j["n_grid"] = c.n_grid;
  j["phi_grid"] = c.phi_grid;
  j["rho_grid"] = c.rho_grid;
  j["beta_true"] = vec_to(c.beta_true);
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["fixed_design"] = c.fixed_design;
  j["optimizer"] = optim_to_json(c.optim);
  return j;
}

ordered_json config_to_json(const PowerConfig& c) {
  ordered_json j;
  j["version"] = 1;
  j["study"] = "power";
  j["family"] = c.family.name();
  j["xi"] = std::vector<double>(c.family.xi().begin(), c.family.xi().end());
  j["n_grid"] = c.n_grid;
  j["phi"] = c.phi;
  j["rho_grid"] = c.rho_grid;
  j["beta_true"] = vec_to(c.beta_true);
  j["beta4_grid"] = c.beta4_grid;
  j["nominal_levels"] = c.nominal_levels;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["fixed_design"] = c.fixed_design;
  j["optimizer"] = optim_to_json(c.optim);
  return j;
}

void write_report_csv(std::ostream& out, const McReport& r) {
  if (r.study == "bias-mse") {
    out << "study,family,n,phi,rho,parameter,true_value,bias,mse,bias_mc_se,mse_mc_se,replications,failures,"
           "redraws\n";
    for (const auto& row : r.bias_rows) {
      out << r.study << ',' << r.family << ',' << row.n << ',' << format_number(row.phi) << ','
          << format_number(row.rho) << ',' << row.parameter << ',' << format_number(row.true_value) << ','
          << format_number(row.bias) << ',' << format_number(row.mse) << ',' << format_number(row.bias_mc_se) << ','
          << format_number(row.mse_mc_se) << ',' << row.replications << ',' << row.failures << ',' << row.redraws
          << '\n';
    }
  } else {
    out << "study,family,n,phi,rho,beta4,level,rejection_lr,rejection_gr,mc_se_lr,mc_se_gr,replications,failures,"
           "redraws\n";
    for (const auto& row : r.power_rows) {
      out << r.study << ',' << r.family << ',' << row.n << ',' << format_number(row.phi) << ','
          << format_number(row.rho) << ',' << format_number(row.beta4) << ',' << format_number(row.level) << ','
          << format_number(row.rejection_lr) << ',' << format_number(row.rejection_gr) << ','
          << format_number(row.mc_se_lr) << ',' << format_number(row.mc_se_gr) << ',' << row.replications << ','
          << row.failures << ',' << row.redraws << '\n';
    }
  }
}

ordered_json report_to_json(const McReport& r) {
  ordered_json j;
  j["study"] = r.study;
  j["family"] = r.family;
  j["seed"] = r.seed;
  j["replications"] = r.replications;
  j["design"] = r.fixed_design ? "fixed" : "redrawn per replication";
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.bias_rows) {
    rows.push_back({{"n", row.n}, {"phi", row.phi}, {"rho", row.rho}, {"parameter", row.parameter},
                    {"true_value", row.true_value}, {"bias", row.bias}, {"mse", row.mse},
                    {"bias_mc_se", row.bias_mc_se}, {"mse_mc_se", row.mse_mc_se},
                    {"replications", row.replications}, {"failures", row.failures}, {"redraws", row.redraws}});
  }
  for (const auto& row : r.power_rows) {
    rows.push_back({{"n", row.n}, {"phi", row.phi}, {"rho", row.rho}, {"beta4", row.beta4}, {"level", row.level},
                    {"rejection_rate_lr", row.rejection_lr}, {"rejection_rate_gr", row.rejection_gr},
                    {"mc_se_lr", row.mc_se_lr}, {"mc_se_gr", row.mc_se_gr}, {"replications", row.replications},
                    {"failures", row.failures}, {"redraws", row.redraws}});
  }
  j["rows"] = rows;
  return j;
}

void write_report_table(std::ostream& out, const McReport& r) {
  if (r.study == "bias-mse") {
    // Rows (n, phi); per rho a block of "bias (mse)" per parameter.
    std::vector<double> rhos;
    std::vector<std::string> params;
    for (const auto& row : r.bias_rows) {
      if (std::find(rhos.begin(), rhos.end(), row.rho) == rhos.end()) rhos.push_back(row.rho);
      if (std::find(params.begin(), params.end(), row.parameter) == params.end()) params.push_back(row.parameter);
    }
    std::map<std::tuple<Eigen::Index, double, double, std::string>, const BiasMseRow*> at;
    std::vector<std::pair<Eigen::Index, double>> keys;
    for (const auto& row : r.bias_rows) {
      at[{row.n, row.phi, row.rho, row.parameter}] = &row;
      const std::pair<Eigen::Index, double> key{row.n, row.phi};
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    out << "Empirical bias and MSE (in parentheses), " << r.family << ", " << r.replications << " replications\n";
    out << std::setw(6) << "n" << std::setw(6) << "phi";
    for (const double rho : rhos) {
      for (const auto& p : params) out << std::setw(20) << (p + " rho=" + fmt_fixed(rho, 2));
    }
    out << '\n';
    for (const auto& [n, phi] : keys) {
      out << std::setw(6) << n << std::setw(6) << format_number(phi);
      for (const double rho : rhos) {
        for (const auto& p : params) {
          const auto it = at.find({n, phi, rho, p});
          const std::string cell = it == at.end() ? "-"
                                                  : fmt_fixed(it->second->bias, 4) + " (" +
                                                        fmt_fixed(it->second->mse, 4) + ")";
          out << std::setw(20) << cell;
        }
      }
      out << '\n';
    }
  } else {
    std::vector<double> rhos, levels;
    for (const auto& row : r.power_rows) {
      if (std::find(rhos.begin(), rhos.end(), row.rho) == rhos.end()) rhos.push_back(row.rho);
      if (std::find(levels.begin(), levels.end(), row.level) == levels.end()) levels.push_back(row.level);
    }
    for (const double level : levels) {
      out << "Power study (%), " << r.family << ", nominal level " << fmt_fixed(100.0 * level, 0) << "%, "
          << r.replications << " replications\n";
      out << std::setw(6) << "n" << std::setw(8) << "beta4";
      for (const double rho : rhos) {
        out << std::setw(14) << ("LR rho=" + fmt_fixed(rho, 2)) << std::setw(14) << ("GR rho=" + fmt_fixed(rho, 2));
      }
      out << '\n';
      std::vector<std::pair<Eigen::Index, double>> keys;
      std::map<std::tuple<Eigen::Index, double, double>, const PowerRow*> at;
      for (const auto& row : r.power_rows) {
        if (row.level != level) continue;
        at[{row.n, row.beta4, row.rho}] = &row;
        const std::pair<Eigen::Index, double> key{row.n, row.beta4};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
      }
      for (const auto& [n, b4] : keys) {
        out << std::setw(6) << n << std::setw(8) << fmt_fixed(b4, 2);
        for (const double rho : rhos) {
          const auto it = at.find({n, b4, rho});
          if (it == at.end()) {
            out << std::setw(14) << "-" << std::setw(14) << "-";
          } else {
            out << std::setw(14) << fmt_fixed(100.0 * it->second->rejection_lr, 2) << std::setw(14)
                << fmt_fixed(100.0 * it->second->rejection_gr, 2);
          }
        }
        out << '\n';
      }
      out << '\n';
    }
  }
}

void write_residuals_csv(std::ostream& out, const ResidualReport& report) {
  const Eigen::Index n = report.residuals.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return report.residuals[a] < report.residuals[b]; });
  out << "index,residual,censored,theoretical_q,lower,median,upper\n";
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = order[static_cast<std::size_t>(k)];
    const double pos = static_cast<double>(k + 1) / static_cast<double>(n + 1);
    out << i << ',' << format_number(report.residuals[i]) << ','
        << (report.censored_flags[static_cast<std::size_t>(i)] ? 1 : 0) << ',' << format_number(-std::log1p(-pos))
        << ",,,\n";
  }
}

void write_envelope_csv(std::ostream& out, const EnvelopeBand& band) {
  out << "index,residual,censored,theoretical_q,lower,median,upper\n";
  for (Eigen::Index k = 0; k < band.observed.size(); ++k) {
    out << band.order[static_cast<std::size_t>(k)] << ',' << format_number(band.observed[k]) << ','
        << (band.observed_censored[static_cast<std::size_t>(k)] ? 1 : 0) << ','
        << format_number(band.theoretical_quantiles[k]) << ',' << format_number(band.lower[k]) << ','
        << format_number(band.median[k]) << ',' << format_number(band.upper[k]) << '\n';
  }
}

}  // namespace tobitls
