#include "covloss/run_config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "covloss/student_t.hpp"

namespace covloss {

using nlohmann::json;

std::vector<double> AxisRange::values() const {
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  if (!(stop >= start)) throw ConfigError("grid stop must not be below start");
  const auto count = static_cast<std::size_t>(std::llround((stop - start) / step)) + 1;
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k) {
    v[k] = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12;
  }
  return v;
}

namespace {

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

// Field given either in table units (scaled) or in decimal units (as written
// by to_json).
double table_or_decimal(const json& obj, const char* table_key, double scale, const char* decimal_key,
                        const std::string& where) {
  if (obj.is_object() && obj.contains(decimal_key)) return require<double>(obj, decimal_key, where);
  return require<double>(obj, table_key, where) * scale;
}

double parse_nu(const json& obj, double fallback) {
  if (!obj.is_object() || !obj.contains("nu")) return fallback;
  const auto& v = obj.at("nu");
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "gaussian") return dist::kGaussianNu;
    throw ConfigError("nu must be a number, \"inf\" or \"gaussian\"");
  }
  if (!v.is_number()) throw ConfigError("nu must be a number, \"inf\" or \"gaussian\"");
  return v.get<double>();
}

json nu_to_json(double nu) { return dist::is_gaussian(nu) ? json("inf") : json(nu); }

AxisRange parse_axis(const json& obj, const char* key, AxisRange fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const auto& a = obj.at(key);
  return {get_or(a, "start", fallback.start), get_or(a, "stop", fallback.stop), get_or(a, "step", fallback.step)};
}

json axis_to_json(const AxisRange& a) { return {{"start", a.start}, {"stop", a.stop}, {"step", a.step}}; }

void check_axis(const AxisRange& a, const char* name, bool closed_at_zero) {
  const auto v = a.values();
  const bool lower_ok = closed_at_zero ? v.front() >= 0.0 : v.front() > 0.0;
  if (!lower_ok || !(v.back() < 1.0)) throw ConfigError(std::string(name) + " grid must lie within [0,1)");
}

}  // namespace

void CcpRunConfig::validate() const {
  check_axis(rho_cr_grid, "rho_cr", true);
  check_axis(rho_wwr_grid, "rho_wwr", true);
  if (members.size() < 2) throw ConfigError("need at least two members");
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].id != i) throw ConfigError("member ids must be 0..n in order");
    if (!(members[i].sigma > 0.0)) throw ConfigError("member " + std::to_string(i) + ": vol must be positive");
    if (!(members[i].lambda >= 0.0)) throw ConfigError("member " + std::to_string(i) + ": lambda must be >= 0");
  }
  try {
    margin.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(ec_alpha > 0.5 && ec_alpha < 1.0)) throw ConfigError("ec_quantile must lie in (1/2, 1)");
  if (!(n_batches >= 2 && n_paths >= n_batches)) throw ConfigError("need paths >= batches >= 2");
  if (n_paths / n_batches > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("batches too large");
  if (report_members.empty()) throw ConfigError("no report members");
  for (std::size_t r : report_members) {
    if (r >= members.size()) throw ConfigError("report member " + std::to_string(r) + " does not exist");
  }
  if (!(k_sigma >= 0.0)) throw ConfigError("k_sigma must be nonnegative");
  if (!(model.nu > 2.0)) throw ConfigError("nu must exceed 2");
  if (!(model.delta_s > 0.0 && model.delta_s < model.delta_l && model.delta_l < model.horizon)) {
    throw ConfigError("need 0 < mpor < liquidation period < horizon");
  }
}

void CdoRunConfig::validate() const {
  check_axis(rho_grid, "rho", true);
  if (obligors.empty()) throw ConfigError("no obligors");
  try {
    for (const auto& o : obligors) o.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  auto fractions_ok = [](const AxisRange& a) {
    const auto v = a.values();
    return v.front() > 0.0 && v.back() < 1.0;
  };
  if (!fractions_ok(equity_detachments)) throw ConfigError("equity detachments must lie in (0,1)");
  if (!fractions_ok(senior_attachments)) throw ConfigError("senior attachments must lie in (0,1)");
  for (const auto& [a, b] : mezzanine) {
    if (!(a > 0.0 && a < b && b < 1.0)) throw ConfigError("mezzanine bounds need 0 < A < B < 1");
  }
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  if (!(maturity > 0.0) || n_coupons == 0) throw ConfigError("need positive maturity and coupons");
  if (n_paths < 2) throw ConfigError("need at least 2 paths");
  if (!(k_sigma >= 0.0)) throw ConfigError("k_sigma must be nonnegative");
}

CcpRunConfig parse_ccp_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  CcpRunConfig c;
  const json empty = json::object();
  const json& model = doc.contains("model") ? doc.at("model") : empty;
  c.days_per_year = get_or(model, "days_per_year", c.days_per_year);
  c.mpor_days = get_or(model, "mpor_days", c.mpor_days);
  c.liquidation_days = get_or(model, "liquidation_days", c.liquidation_days);
  c.model.horizon = get_or(model, "horizon_years", c.model.horizon);
  c.model.rho_mkt = get_or(model, "rho_mkt", c.model.rho_mkt);
  c.model.rho_cr = get_or(model, "rho_cr", c.model.rho_cr);
  c.model.rho_wwr = get_or(model, "rho_wwr", c.model.rho_wwr);
  c.model.nu = parse_nu(model, c.model.nu);
  c.model.delta_s = day_fraction(c.mpor_days, c.days_per_year);
  c.model.delta_l = day_fraction(c.liquidation_days, c.days_per_year);

  const json& grid = doc.contains("grid") ? doc.at("grid") : empty;
  c.rho_cr_grid = parse_axis(grid, "rho_cr", c.rho_cr_grid);
  c.rho_wwr_grid = parse_axis(grid, "rho_wwr", c.rho_wwr_grid);

  const json& margin = doc.contains("margin") ? doc.at("margin") : empty;
  c.margin.alpha_im = get_or(margin, "im_quantile", c.margin.alpha_im);
  c.margin.alpha_stress = get_or(margin, "sloim_quantile", c.margin.alpha_stress);
  const auto rule = get_or<std::string>(margin, "df_allocation", "sloim");
  if (rule == "sloim") {
    c.df_allocation = DfAllocation::sloim_proportional;
  } else if (rule == "im") {
    c.df_allocation = DfAllocation::im_proportional;
  } else {
    throw ConfigError("margin.df_allocation must be \"sloim\" or \"im\"");
  }

  c.ec_alpha = get_or(doc, "ec_quantile", c.ec_alpha);
  const json& sim = doc.contains("simulation") ? doc.at("simulation") : empty;
  c.n_paths = get_or(sim, "paths", c.n_paths);
  c.n_batches = get_or(sim, "batches", c.n_batches);
  c.seed = get_or(sim, "seed", c.seed);
  const auto mode = get_or<std::string>(sim, "batch_mode", "pooled");
  if (mode == "pooled") {
    c.batch_mode = BatchMode::pooled;
  } else if (mode == "batch_mean") {
    c.batch_mode = BatchMode::batch_mean;
  } else {
    throw ConfigError("simulation.batch_mode must be \"pooled\" or \"batch_mean\"");
  }
  const auto norm = get_or<std::string>(sim, "weight_normalization", "self");
  if (norm == "self") {
    c.normalization = WeightNormalization::self_normalized;
  } else if (norm == "theoretical") {
    c.normalization = WeightNormalization::theoretical;
  } else {
    throw ConfigError("simulation.weight_normalization must be \"self\" or \"theoretical\"");
  }

  c.report_members = get_or(doc, "report_members", c.report_members);
  c.k_sigma = get_or(doc, "k_sigma", c.k_sigma);

  if (!doc.contains("members") || !doc.at("members").is_array()) throw ConfigError("missing member table 'members'");
  std::size_t idx = 0;
  for (const auto& m : doc.at("members")) {
    const std::string where = "members[" + std::to_string(idx) + "]";
    c.members.push_back({get_or<std::size_t>(m, "id", idx), table_or_decimal(m, "lambda_bps", 1e-4, "lambda", where),
                         table_or_decimal(m, "size", 1.0, "nom", where),
                         table_or_decimal(m, "vol_pct", 1e-2, "sigma", where)});
    ++idx;
  }
  c.validate();
  return c;
}

CdoRunConfig parse_cdo_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  CdoRunConfig c;
  c.nu = parse_nu(doc, c.nu);
  c.maturity = get_or(doc, "maturity_years", c.maturity);
  c.n_coupons = get_or(doc, "coupons", c.n_coupons);
  c.spread = get_or(doc, "spread", c.spread);
  c.rho_grid = parse_axis(doc, "rho_grid", c.rho_grid);
  c.equity_detachments = parse_axis(doc, "equity_detachments", c.equity_detachments);
  c.senior_attachments = parse_axis(doc, "senior_attachments", c.senior_attachments);
  if (doc.contains("mezzanine")) {
    for (const auto& ab : doc.at("mezzanine")) {
      if (!ab.is_array() || ab.size() != 2) throw ConfigError("mezzanine entries must be [A, B] pairs");
      c.mezzanine.emplace_back(ab[0].get<double>(), ab[1].get<double>());
    }
  }
  const json empty = json::object();
  const json& sim = doc.contains("simulation") ? doc.at("simulation") : empty;
  c.n_paths = get_or(sim, "paths", c.n_paths);
  c.seed = get_or(sim, "seed", c.seed);
  c.k_sigma = get_or(doc, "k_sigma", c.k_sigma);
  if (!doc.contains("obligors") || !doc.at("obligors").is_array()) throw ConfigError("missing obligor table 'obligors'");
  std::size_t idx = 0;
  for (const auto& o : doc.at("obligors")) {
    const std::string where = "obligors[" + std::to_string(idx++) + "]";
    c.obligors.push_back({require<double>(o, "notional", where),
                          table_or_decimal(o, "recovery_pct", 1e-2, "recovery", where),
                          table_or_decimal(o, "lambda_pct", 1e-2, "lambda", where)});
  }
  c.validate();
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

json to_json(const CcpRunConfig& c) {
  json members = json::array();
  for (const auto& m : c.members) {
    members.push_back({{"id", m.id}, {"lambda", m.lambda}, {"nom", m.nom}, {"sigma", m.sigma}});
  }
  return {
      {"schema", "covloss.ccp/1"},
      {"model",
       {{"horizon_years", c.model.horizon},
        {"rho_mkt", c.model.rho_mkt},
        {"rho_cr", c.model.rho_cr},
        {"rho_wwr", c.model.rho_wwr},
        {"nu", nu_to_json(c.model.nu)},
        {"delta_s", c.model.delta_s},
        {"delta_l", c.model.delta_l}}},
      {"grid", {{"rho_cr", axis_to_json(c.rho_cr_grid)}, {"rho_wwr", axis_to_json(c.rho_wwr_grid)}}},
      {"margin",
       {{"im_quantile", c.margin.alpha_im},
        {"sloim_quantile", c.margin.alpha_stress},
        {"df_allocation", c.df_allocation == DfAllocation::sloim_proportional ? "sloim" : "im"}}},
      {"ec_quantile", c.ec_alpha},
      {"simulation",
       {{"paths", c.n_paths},
        {"batches", c.n_batches},
        {"seed", c.seed},
        {"batch_mode", c.batch_mode == BatchMode::pooled ? "pooled" : "batch_mean"},
        {"weight_normalization",
         c.normalization == WeightNormalization::self_normalized ? "self" : "theoretical"}}},
      {"report_members", c.report_members},
      {"k_sigma", c.k_sigma},
      {"members", members},
  };
}

json to_json(const CdoRunConfig& c) {
  json obligors = json::array();
  for (const auto& o : c.obligors) {
    obligors.push_back({{"notional", o.notional}, {"recovery", o.recovery}, {"lambda", o.lambda}});
  }
  json mezz = json::array();
  for (const auto& [a, b] : c.mezzanine) mezz.push_back({a, b});
  return {
      {"schema", "covloss.cdo/1"},
      {"nu", nu_to_json(c.nu)},
      {"maturity_years", c.maturity},
      {"coupons", c.n_coupons},
      {"spread", c.spread},
      {"rho_grid", axis_to_json(c.rho_grid)},
      {"equity_detachments", axis_to_json(c.equity_detachments)},
      {"senior_attachments", axis_to_json(c.senior_attachments)},
      {"mezzanine", mezz},
      {"simulation", {{"paths", c.n_paths}, {"seed", c.seed}}},
      {"k_sigma", c.k_sigma},
      {"obligors", obligors},
  };
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
  return os.str();
}

std::string config_hash(const json& effective) { return git_blob_hash(effective.dump()); }

}  // namespace covloss
