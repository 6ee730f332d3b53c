#include "satedge/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "satedge/outcome.hpp"
#include "satedge/random.hpp"

namespace satedge {

using nlohmann::json;

namespace {

double db10(double db) { return std::pow(10.0, db / 10.0); }

// ---- document <-> struct -------------------------------------------------

json to_json(const Scenario& s) {
  const auto& r = s.radio;
  const auto& c = s.compute;
  const auto& t = s.topology;
  json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  doc["seed"] = s.seed;
  doc["radio"] = {
      {"g_ue_tx_dbi", r.g_ue_tx_dbi},
      {"g_bs_rx_dbi", r.g_bs_rx_dbi},
      {"g_bs_tx_dbi", r.g_bs_tx_dbi},
      {"g_sat_rx_dbi", r.g_sat_rx_dbi},
      {"p_ue_dbm", r.p_ue_dbm},
      {"p_bs_dbm", r.p_bs_dbm},
      {"f_cf_access_hz", r.f_cf_access_hz},
      {"f_cf_backhaul_hz", r.f_cf_backhaul_hz},
      {"noise_psd_access_dbm_per_hz", r.noise_psd_access_dbm_per_hz},
      {"noise_psd_backhaul_dbm_per_hz", r.noise_psd_backhaul_dbm_per_hz},
      {"b_access_total_hz", r.b_access_total_hz},
      {"b_s_total_hz", r.b_s_total_hz},
  };
  doc["compute"] = {
      {"kappa_cycles_per_bit", c.kappa},
      {"eta_terr", c.eta_terr},
      {"eta_sat", c.eta_sat},
      {"f_terr_hz", c.f_terr_hz},
      {"f_sat_hz", c.f_sat_hz},
      {"e_th_j", c.e_th_j},
      {"t_th_s", c.t_th_s},
  };
  doc["topology"] = {
      {"n_ues", t.n_ues},
      {"n_sats", t.n_sats},
      {"d_ue_bs_m", t.d_ue_bs_m},
      {"d_min_m", t.d_min_m},
      {"d_max_m", t.d_max_m},
      {"sat_altitude_m", t.sat_altitude_m},
      {"gateway_sat_index", t.gateway_sat_index},
      {"isl_rate_bps", t.isl_rate_bps},
      {"isl_hop_delay_s", t.isl_hop_delay_s},
      {"task_bits", t.task_bits},
  };
  return doc;
}

const json& field(const json& section, const std::string& section_name, const std::string& key) {
  auto it = section.find(key);
  if (it == section.end()) throw ConfigError("missing field '" + section_name + "." + key + "'");
  return *it;
}

double get_number(const json& section, const std::string& section_name, const std::string& key) {
  const json& v = field(section, section_name, key);
  if (!v.is_number()) throw ConfigError("field '" + section_name + "." + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& section, const std::string& section_name, const std::string& key) {
  const json& v = field(section, section_name, key);
  if (!v.is_number_integer()) throw ConfigError("field '" + section_name + "." + key + "' must be an integer");
  return v.get<int>();
}

std::vector<double> get_array(const json& section, const std::string& section_name, const std::string& key) {
  const json& v = field(section, section_name, key);
  if (!v.is_array()) throw ConfigError("field '" + section_name + "." + key + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ConfigError("field '" + section_name + "." + key + "[" + std::to_string(i) + "]' must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

const json& get_section(const json& doc, const std::string& name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw ConfigError("missing section '" + name + "'");
  if (!it->is_object()) throw ConfigError("section '" + name + "' must be an object");
  return *it;
}

Scenario from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario document must be an object");
  auto ver = doc.find("schema_version");
  if (ver == doc.end()) throw ConfigError("missing field 'schema_version'");
  if (!ver->is_number_integer() || ver->get<int>() != kScenarioSchemaVersion) {
    throw ConfigError("schema_version mismatch: expected " + std::to_string(kScenarioSchemaVersion) + ", got " +
                      ver->dump());
  }
  Scenario s;
  auto seed = doc.find("seed");
  if (seed == doc.end()) throw ConfigError("missing field 'seed'");
  if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0))
    throw ConfigError("field 'seed' must be a non-negative integer");
  s.seed = seed->get<std::uint64_t>();

  const json& r = get_section(doc, "radio");
  s.radio.g_ue_tx_dbi = get_number(r, "radio", "g_ue_tx_dbi");
  s.radio.g_bs_rx_dbi = get_number(r, "radio", "g_bs_rx_dbi");
  s.radio.g_bs_tx_dbi = get_number(r, "radio", "g_bs_tx_dbi");
  s.radio.g_sat_rx_dbi = get_number(r, "radio", "g_sat_rx_dbi");
  s.radio.p_ue_dbm = get_array(r, "radio", "p_ue_dbm");
  s.radio.p_bs_dbm = get_array(r, "radio", "p_bs_dbm");
  s.radio.f_cf_access_hz = get_number(r, "radio", "f_cf_access_hz");
  s.radio.f_cf_backhaul_hz = get_number(r, "radio", "f_cf_backhaul_hz");
  s.radio.noise_psd_access_dbm_per_hz = get_number(r, "radio", "noise_psd_access_dbm_per_hz");
  s.radio.noise_psd_backhaul_dbm_per_hz = get_number(r, "radio", "noise_psd_backhaul_dbm_per_hz");
  s.radio.b_access_total_hz = get_number(r, "radio", "b_access_total_hz");
  s.radio.b_s_total_hz = get_number(r, "radio", "b_s_total_hz");

  const json& c = get_section(doc, "compute");
  s.compute.kappa = get_array(c, "compute", "kappa_cycles_per_bit");
  s.compute.eta_terr = get_array(c, "compute", "eta_terr");
  s.compute.eta_sat = get_array(c, "compute", "eta_sat");
  s.compute.f_terr_hz = get_number(c, "compute", "f_terr_hz");
  s.compute.f_sat_hz = get_array(c, "compute", "f_sat_hz");
  s.compute.e_th_j = get_array(c, "compute", "e_th_j");
  s.compute.t_th_s = get_number(c, "compute", "t_th_s");

  const json& t = get_section(doc, "topology");
  s.topology.n_ues = get_int(t, "topology", "n_ues");
  s.topology.n_sats = get_int(t, "topology", "n_sats");
  s.topology.d_ue_bs_m = get_array(t, "topology", "d_ue_bs_m");
  s.topology.d_min_m = get_number(t, "topology", "d_min_m");
  s.topology.d_max_m = get_number(t, "topology", "d_max_m");
  s.topology.sat_altitude_m = get_number(t, "topology", "sat_altitude_m");
  s.topology.gateway_sat_index = get_int(t, "topology", "gateway_sat_index");
  s.topology.isl_rate_bps = get_number(t, "topology", "isl_rate_bps");
  s.topology.isl_hop_delay_s = get_number(t, "topology", "isl_hop_delay_s");
  s.topology.task_bits = get_array(t, "topology", "task_bits");

  if (s.topology.n_ues < 1) throw ConfigError("field 'topology.n_ues' must be at least 1");
  if (s.topology.n_sats < 1) throw ConfigError("field 'topology.n_sats' must be at least 1");
  return s;
}

// ---- overrides -----------------------------------------------------------

json parse_literal(const std::string& key, const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    throw ConfigError("override '" + key + "': value '" + text + "' is not a valid literal");
  }
}

void apply_override(json& doc, const std::string& key, const json& value) {
  const auto dot = key.find('.');
  json* target = nullptr;
  std::string leaf;
  if (dot == std::string::npos) {
    if (key != "seed") throw ConfigError("unknown override key '" + key + "'");
    target = &doc;
    leaf = key;
  } else {
    const std::string section = key.substr(0, dot);
    leaf = key.substr(dot + 1);
    auto sit = doc.find(section);
    if (sit == doc.end() || !sit->is_object() || section == "schema_version")
      throw ConfigError("unknown override key '" + key + "'");
    target = &*sit;
  }
  auto it = target->find(leaf);
  if (it == target->end()) throw ConfigError("unknown override key '" + key + "'");
  if (it->is_array() && value.is_number()) {
    for (auto& e : *it) e = value;
  } else if (it->is_array() != value.is_array()) {
    throw ConfigError("override '" + key + "' has the wrong shape");
  } else {
    *it = value;
  }
}

Scenario table_defaults(int n_ues, int n_sats) {
  Scenario s;
  s.topology.n_ues = n_ues;
  s.topology.n_sats = n_sats;
  s.topology.gateway_sat_index = n_sats / 2;
  s.radio.p_ue_dbm.assign(n_ues, 23.0);
  s.radio.p_bs_dbm.assign(n_ues, 40.97);
  s.compute.kappa.assign(n_ues, 300.0);
  s.compute.eta_terr.assign(n_ues, 1e-28);
  s.compute.eta_sat.assign(n_ues, 1e-28);
  s.compute.f_sat_hz.assign(n_sats, 3e9);
  s.compute.e_th_j.assign(n_sats, 0.5);
  s.topology.task_bits.assign(n_ues, 5e5);
  s.topology.d_ue_bs_m.assign(n_ues, 0.0);
  return s;
}

int count_override(const Overrides& overrides, const std::string& key, int fallback) {
  auto it = overrides.find(key);
  if (it == overrides.end()) return fallback;
  const json v = parse_literal(key, it->second);
  if (!v.is_number_integer() || v.get<int>() < 1) throw ConfigError("override '" + key + "' must be a positive integer");
  return v.get<int>();
}

void check_lengths(const Scenario& s, std::vector<std::string>& out) {
  const auto n = static_cast<std::size_t>(std::max(0, s.n_ues()));
  const auto m = static_cast<std::size_t>(std::max(0, s.n_sats()));
  auto need = [&](const std::vector<double>& v, std::size_t len, const char* name) {
    if (v.size() != len) {
      out.push_back(std::string(name) + " has " + std::to_string(v.size()) + " entries, expected " +
                    std::to_string(len));
    }
  };
  need(s.radio.p_ue_dbm, n, "radio.p_ue_dbm");
  need(s.radio.p_bs_dbm, n, "radio.p_bs_dbm");
  need(s.compute.kappa, n, "compute.kappa_cycles_per_bit");
  need(s.compute.eta_terr, n, "compute.eta_terr");
  need(s.compute.eta_sat, n, "compute.eta_sat");
  need(s.compute.f_sat_hz, m, "compute.f_sat_hz");
  need(s.compute.e_th_j, m, "compute.e_th_j");
  need(s.topology.d_ue_bs_m, n, "topology.d_ue_bs_m");
  need(s.topology.task_bits, n, "topology.task_bits");
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

double RadioParams::g_ue_tx() const { return db10(g_ue_tx_dbi); }
double RadioParams::g_bs_rx() const { return db10(g_bs_rx_dbi); }
double RadioParams::g_bs_tx() const { return db10(g_bs_tx_dbi); }
double RadioParams::g_sat_rx() const { return db10(g_sat_rx_dbi); }
double RadioParams::p_ue_w(int n) const { return db10(p_ue_dbm.at(n)) * 1e-3; }
double RadioParams::p_bs_w(int n) const { return db10(p_bs_dbm.at(n)) * 1e-3; }
double RadioParams::noise_psd_access() const { return db10(noise_psd_access_dbm_per_hz) * 1e-3; }
double RadioParams::noise_psd_backhaul() const { return db10(noise_psd_backhaul_dbm_per_hz) * 1e-3; }

Scenario generate_scenario(std::uint64_t seed, const Overrides& overrides) {
  const int n_ues = count_override(overrides, "topology.n_ues", 4);
  const int n_sats = count_override(overrides, "topology.n_sats", 3);
  Scenario base = table_defaults(n_ues, n_sats);
  base.seed = seed;

  json doc = to_json(base);
  for (const auto& [key, text] : overrides) {
    if (key == "topology.n_ues" || key == "topology.n_sats") continue;
    apply_override(doc, key, parse_literal(key, text));
  }
  Scenario s = from_json(doc);

  // Distances are drawn after overrides so a custom sampling interval applies;
  // an explicit d_ue_bs_m override wins.
  if (!overrides.contains("topology.d_ue_bs_m")) {
    std::mt19937_64 rng(seed);
    for (auto& d : s.topology.d_ue_bs_m) d = uniform_real(rng, s.topology.d_min_m, s.topology.d_max_m);
  }
  return s;
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> out;
  const auto& r = s.radio;
  const auto& c = s.compute;
  const auto& t = s.topology;

  if (t.n_ues < 1) out.push_back("topology.n_ues must be at least 1");
  if (t.n_sats < 1) out.push_back("topology.n_sats must be at least 1");
  check_lengths(s, out);
  if (!out.empty()) return out;

  auto positive = [&](double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(name + " must be positive and finite");
  };
  auto finite = [&](double v, const std::string& name) {
    if (!std::isfinite(v)) out.push_back(name + " must be finite");
  };
  auto idx = [](const char* name, std::size_t i) { return std::string(name) + "[" + std::to_string(i) + "]"; };

  finite(r.g_ue_tx_dbi, "radio.g_ue_tx_dbi");
  finite(r.g_bs_rx_dbi, "radio.g_bs_rx_dbi");
  finite(r.g_bs_tx_dbi, "radio.g_bs_tx_dbi");
  finite(r.g_sat_rx_dbi, "radio.g_sat_rx_dbi");
  for (std::size_t i = 0; i < r.p_ue_dbm.size(); ++i) finite(r.p_ue_dbm[i], idx("radio.p_ue_dbm", i));
  for (std::size_t i = 0; i < r.p_bs_dbm.size(); ++i) finite(r.p_bs_dbm[i], idx("radio.p_bs_dbm", i));
  positive(r.f_cf_access_hz, "radio.f_cf_access_hz");
  positive(r.f_cf_backhaul_hz, "radio.f_cf_backhaul_hz");
  finite(r.noise_psd_access_dbm_per_hz, "radio.noise_psd_access_dbm_per_hz");
  finite(r.noise_psd_backhaul_dbm_per_hz, "radio.noise_psd_backhaul_dbm_per_hz");
  positive(r.b_access_total_hz, "radio.b_access_total_hz");
  positive(r.b_s_total_hz, "radio.b_s_total_hz");

  for (std::size_t i = 0; i < c.kappa.size(); ++i) positive(c.kappa[i], idx("compute.kappa_cycles_per_bit", i));
  for (std::size_t i = 0; i < c.eta_terr.size(); ++i) positive(c.eta_terr[i], idx("compute.eta_terr", i));
  for (std::size_t i = 0; i < c.eta_sat.size(); ++i) positive(c.eta_sat[i], idx("compute.eta_sat", i));
  positive(c.f_terr_hz, "compute.f_terr_hz");
  for (std::size_t i = 0; i < c.f_sat_hz.size(); ++i) positive(c.f_sat_hz[i], idx("compute.f_sat_hz", i));
  for (std::size_t i = 0; i < c.e_th_j.size(); ++i) positive(c.e_th_j[i], idx("compute.e_th_j", i));
  positive(c.t_th_s, "compute.t_th_s");

  positive(t.sat_altitude_m, "topology.sat_altitude_m");
  positive(t.isl_rate_bps, "topology.isl_rate_bps");
  if (!(t.isl_hop_delay_s >= 0.0)) out.push_back("topology.isl_hop_delay_s must be non-negative");
  if (!(t.d_min_m > 0.0) || !(t.d_max_m >= t.d_min_m)) out.push_back("topology distance interval is empty");
  if (t.gateway_sat_index < 0 || t.gateway_sat_index >= t.n_sats)
    out.push_back("topology.gateway_sat_index out of range");
  for (std::size_t i = 0; i < t.d_ue_bs_m.size(); ++i) {
    const double d = t.d_ue_bs_m[i];
    if (!(d >= t.d_min_m && d <= t.d_max_m)) out.push_back(idx("topology.d_ue_bs_m", i) + " outside sampling interval");
  }
  for (std::size_t i = 0; i < t.task_bits.size(); ++i) positive(t.task_bits[i], idx("topology.task_bits", i));

  // Even with unlimited bandwidth a task must fit the latency budget on
  // at least one server.
  for (int n = 0; n < t.n_ues; ++n) {
    const double cycles = t.task_bits[n] * c.kappa[n];
    double best = cycles / c.f_terr_hz;
    for (int j = 0; j < t.n_sats; ++j) best = std::min(best, cycles / c.f_sat_hz[j]);
    if (!(best <= c.t_th_s)) {
      std::ostringstream msg;
      msg << "latency budget unreachable for UE " << n << ": compute latency " << best << " s exceeds T_th "
          << c.t_th_s << " s";
      out.push_back(msg.str());
    }
  }
  return out;
}

std::string to_document(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

Scenario from_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      e.what());
  }
  try {
    return from_json(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write scenario to " + path.string());
  out << to_document(s);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return from_document(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace satedge
