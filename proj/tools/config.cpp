#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace womble::cli {

using nlohmann::json;

const std::vector<KeySpec>& key_specs() {
  using K = KeyType;
  static const std::vector<KeySpec> specs = {
      // inputs and outputs
      {"data", K::text, nullptr, "visual-field series CSV (patient,visit,day,location,dls_db)"},
      {"graph", K::text, nullptr, "location table CSV (id,row,col,angle,blind_spot)"},
      {"edges", K::text, nullptr, "optional i,j edge list replacing queen adjacency"},
      {"metric", K::text, "garway_heath", "dissimilarity metric: garway_heath | none"},
      {"out", K::text, "out", "output directory"},
      {"labels", K::text, nullptr, "patient,label CSV"},
      {"patient", K::text, nullptr, "restrict to one patient id"},
      {"seed", K::unsigned_integer, nullptr, "master seed (auto-generated and recorded when absent)"},
      {"threads", K::integer, 1, "worker threads across patients or replicates"},
      // model
      {"rho", K::number, 0.99, "Leroux spatial dependence"},
      {"correlation", K::text, "exponential", "temporal correlation: exponential | ar1"},
      {"likelihood", K::text, "tobit", "observation model: tobit | gaussian"},
      {"weights", K::text, "continuous", "adjacency weights: continuous | threshold"},
      {"space_only", K::boolean, false, "fit independent per-visit spatial models"},
      // sampler
      {"n_iter", K::integer, 10000, "total MCMC iterations"},
      {"n_burn", K::integer, 2000, "burn-in iterations (proposal adaptation runs here)"},
      {"n_thin", K::integer, 5, "keep every n-th post-burn-in draw"},
      {"block_theta", K::boolean, false, "joint proposal per parameter column"},
      {"keep_latent", K::boolean, false, "persist latent fields in draw files"},
      {"target_acceptance", K::number, 0.44, "adaptive Metropolis target rate"},
      {"y_scale", K::number, 10.0, "DLS dB per model unit"},
      {"dm_scale", K::number, 100.0, "dissimilarity units per model unit"},
      {"time_scale", K::number, 365.0, "days per model time unit"},
      // hyperpriors
      {"mu_delta", K::number_list, nullptr, "prior mean of delta (default 3,0,...)"},
      {"omega_delta", K::number_list, nullptr, "prior variances of delta (default 1000,1000,upsilon...)"},
      {"upsilon", K::number, 1.0, "prior variance of each log alpha mean"},
      {"xi", K::number, nullptr, "inverse-Wishart degrees of freedom (default q + 3)"},
      {"psi", K::number_list, nullptr, "inverse-Wishart scale diagonal (default 1s)"},
      {"phi_lower", K::number, nullptr, "override lower bound of phi"},
      {"phi_upper", K::number, nullptr, "override upper bound of phi"},
      // predict
      {"fit_dir", K::text, nullptr, "directory written by fit"},
      {"future_days", K::number_list, nullptr, "days after baseline to predict"},
      // diagnose
      {"bootstrap", K::integer, 2000, "bootstrap resamples for AUC comparisons"},
      {"min_spec", K::number, 0.85, "lower specificity bound of the partial AUC"},
      {"followup", K::boolean, false, "recompute metrics on half-year truncations"},
      {"followup_step", K::number, 182.625, "days between truncations"},
      {"followup_max", K::number, 1643.625, "last truncation day"},
      {"window", K::integer, 3, "moving-average window over truncations"},
      // simulate
      {"settings", K::text, "A,B,C,D", "simulation settings"},
      {"visits", K::integer, 7, "visits per simulated series"},
      {"n_theta", K::integer, 20, "parameter draws per setting"},
      {"n_data", K::integer, 5, "datasets per parameter draw"},
      {"full_budget", K::boolean, false, "100 x 10 replicates per setting"},
      {"cohort", K::boolean, false, "emit a labeled cohort instead of running the study"},
      {"cohort_patients", K::integer, 50, "patients in a labeled cohort"},
      {"progressing_fraction", K::number, 0.5, "share of progressing patients"},
  };
  return specs;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

std::string env_name(const std::string& key) {
  std::string e = key;
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return "WOMBLE_" + e;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument(key + ": cannot parse '" + text + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

json checked(const KeySpec& spec, const json& v) {
  const auto bad = [&] { return std::invalid_argument(spec.name + ": wrong type in config file"); };
  if (v.is_null()) return v;
  switch (spec.type) {
    case KeyType::boolean:
      if (!v.is_boolean()) throw bad();
      break;
    case KeyType::integer:
      if (!v.is_number_integer()) throw bad();
      break;
    case KeyType::unsigned_integer:
      if (!v.is_number_unsigned()) throw bad();
      break;
    case KeyType::number:
      if (!v.is_number()) throw bad();
      return v.get<double>();
    case KeyType::text:
      if (!v.is_string()) throw bad();
      break;
    case KeyType::number_list:
      if (!v.is_array()) throw bad();
      for (const auto& x : v) {
        if (!x.is_number()) throw bad();
      }
      return v.get<std::vector<double>>();
  }
  return v;
}

}  // namespace

json parse_value(const KeySpec& spec, const std::string& raw) {
  const std::string text = trim(raw);
  switch (spec.type) {
    case KeyType::boolean:
      if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
      if (text == "0" || text == "false" || text == "no" || text == "off") return false;
      throw std::invalid_argument(spec.name + ": expected a boolean, got '" + text + "'");
    case KeyType::integer: return parse_number<long>(spec.name, text);
    case KeyType::unsigned_integer: return parse_number<std::uint64_t>(spec.name, text);
    case KeyType::number: return parse_number<double>(spec.name, text);
    case KeyType::text: return text;
    case KeyType::number_list: {
      std::vector<double> out;
      std::size_t start = 0;
      while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        out.push_back(parse_number<double>(spec.name, piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return out;
    }
  }
  return nullptr;
}

RunConfig::RunConfig() {
  values_ = json::object();
  for (const auto& s : key_specs()) values_[s.name] = s.fallback.is_number() && s.type == KeyType::number
                                                          ? json(s.fallback.get<double>())
                                                          : s.fallback;
}

const KeySpec& RunConfig::spec(const std::string& key) const {
  for (const auto& s : key_specs()) {
    if (s.name == key) return s;
  }
  throw std::invalid_argument("unknown configuration key '" + key + "'");
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  json file;
  try {
    file = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  if (!file.is_object()) throw std::invalid_argument("config file " + path + " must hold a JSON object");
  for (const auto& [key, value] : file.items()) assign(key, value);
}

void RunConfig::merge_environment() {
  for (const auto& s : key_specs()) {
    if (const char* v = std::getenv(env_name(s.name).c_str())) set(s.name, v);
  }
}

void RunConfig::set(const std::string& key, const std::string& text) { assign(key, parse_value(spec(key), text)); }

void RunConfig::assign(const std::string& key, json value) {
  values_[key] = checked(spec(key), value);
  provided_.insert(key);
}

std::string RunConfig::text(const std::string& key) const {
  const auto& v = values_.at(key);
  return v.is_null() ? std::string() : v.get<std::string>();
}

std::string RunConfig::require_text(const std::string& key) const {
  if (!has(key)) throw std::invalid_argument("missing required option " + flag_name(key));
  return text(key);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

}  // namespace womble::cli
