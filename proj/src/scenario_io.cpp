#include "crca/scenario_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace crca {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ValidationError("unknown key \"" + item.key() + "\" in " + where);
  }
}

Matrix parse_matrix(const json& value, int rows, int cols, const std::string& name) {
  Matrix out(rows, cols);
  if (value.is_number()) {
    out.setConstant(value.get<double>());
    return out;
  }
  if (!value.is_array() || static_cast<int>(value.size()) != rows)
    throw ValidationError(name + " must be a scalar or a " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " matrix");
  for (int i = 0; i < rows; ++i) {
    const json& row = value[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw ValidationError(name + " row " + std::to_string(i + 1) + " must have " +
                            std::to_string(cols) + " entries");
    for (int j = 0; j < cols; ++j) {
      if (!row[j].is_number())
        throw ValidationError(name + " entry (" + std::to_string(i + 1) + "," +
                              std::to_string(j + 1) + ") must be a number");
      out(i, j) = row[j].get<double>();
    }
  }
  return out;
}

std::vector<std::vector<int>> parse_channel_sets(const json& value, int users, int channels,
                                                 const std::string& name) {
  if (!value.is_array() || static_cast<int>(value.size()) != users)
    throw ValidationError(name + " must list one channel set per user");
  std::vector<std::vector<int>> sets(users);
  for (int i = 0; i < users; ++i) {
    const json& row = value[i];
    if (!row.is_array())
      throw ValidationError(name + " entry for user " + std::to_string(i + 1) +
                            " must be an array");
    for (const json& c : row) {
      if (!c.is_number_integer())
        throw ValidationError(name + " channels must be integers");
      const int j = c.get<int>();
      if (j < 1 || j > channels)
        throw ValidationError(name + " channel " + std::to_string(j) +
                              " out of range for user " + std::to_string(i + 1));
      sets[i].push_back(j - 1);
    }
  }
  return sets;
}

json dump_matrix(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json dump_channel_sets(const std::vector<std::vector<int>>& sets) {
  json out = json::array();
  for (const auto& s : sets) {
    json row = json::array();
    for (int j : s) row.push_back(j + 1);
    out.push_back(row);
  }
  return out;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("scenario document must be a JSON object");
  reject_unknown_keys(doc, {"id", "users", "channels", "p", "timing", "sensing", "assignment"},
                      "scenario");
  if (!doc.contains("users") || !doc.contains("channels") || !doc.contains("p"))
    throw ValidationError("scenario requires \"users\", \"channels\" and \"p\"");

  Scenario sc;
  if (doc.contains("id")) {
    if (!doc["id"].is_string()) throw ValidationError("\"id\" must be a string");
    sc.id = doc["id"].get<std::string>();
  }
  if (!doc["users"].is_number_integer() || !doc["channels"].is_number_integer())
    throw ValidationError("\"users\" and \"channels\" must be integers");
  sc.model.num_users = doc["users"].get<int>();
  sc.model.num_channels = doc["channels"].get<int>();
  if (sc.model.num_users < 1 || sc.model.num_channels < 1)
    throw ValidationError("\"users\" and \"channels\" must be positive");
  sc.model.p = parse_matrix(doc["p"], sc.model.num_users, sc.model.num_channels, "\"p\"");

  if (doc.contains("timing")) {
    const json& t = doc["timing"];
    if (!t.is_object()) throw ValidationError("\"timing\" must be an object");
    reject_unknown_keys(t,
                        {"slot_us", "rts_us", "cts_us", "sifs_us", "sen_us", "syn_us",
                         "cycle_us", "epsilon_p", "w_max"},
                        "timing");
    auto num = [&](const char* key, double fallback) {
      if (!t.contains(key)) return fallback;
      if (!t[key].is_number())
        throw ValidationError(std::string("timing.") + key + " must be a number");
      return t[key].get<double>();
    };
    sc.timing.slot_us = num("slot_us", sc.timing.slot_us);
    sc.timing.rts_us = num("rts_us", sc.timing.rts_us);
    sc.timing.cts_us = num("cts_us", sc.timing.cts_us);
    sc.timing.sifs_us = num("sifs_us", sc.timing.sifs_us);
    sc.timing.sen_us = num("sen_us", sc.timing.sen_us);
    sc.timing.syn_us = num("syn_us", sc.timing.syn_us);
    sc.timing.cycle_us = num("cycle_us", sc.timing.cycle_us);
    sc.timing.epsilon_p = num("epsilon_p", sc.timing.epsilon_p);
    if (t.contains("w_max")) {
      if (!t["w_max"].is_number_integer())
        throw ValidationError("timing.w_max must be an integer");
      sc.timing.w_max = t["w_max"].get<int>();
    }
  }

  if (doc.contains("sensing")) {
    const json& s = doc["sensing"];
    if (!s.is_object()) throw ValidationError("\"sensing\" must be an object");
    reject_unknown_keys(s, {"p_d", "p_f"}, "sensing");
    if (!s.contains("p_d") || !s.contains("p_f"))
      throw ValidationError("\"sensing\" requires both \"p_d\" and \"p_f\"");
    SensingModel sensing;
    sensing.p_d = parse_matrix(s["p_d"], sc.model.num_users, sc.model.num_channels,
                               "sensing.p_d");
    sensing.p_f = parse_matrix(s["p_f"], sc.model.num_users, sc.model.num_channels,
                               "sensing.p_f");
    sc.sensing = std::move(sensing);
  }

  if (doc.contains("assignment")) {
    const json& a = doc["assignment"];
    if (!a.is_object()) throw ValidationError("\"assignment\" must be an object");
    reject_unknown_keys(a, {"exclusive", "shared"}, "assignment");
    if (!a.contains("exclusive") || !a.contains("shared"))
      throw ValidationError("\"assignment\" requires both \"exclusive\" and \"shared\"");
    Assignment as;
    as.exclusive = parse_channel_sets(a["exclusive"], sc.model.num_users,
                                      sc.model.num_channels, "assignment.exclusive");
    as.shared = parse_channel_sets(a["shared"], sc.model.num_users, sc.model.num_channels,
                                   "assignment.shared");
    canonicalize(as);
    sc.assignment = std::move(as);
  }

  validate_scenario(sc.model, sc.assignment.value_or(Assignment::empty(sc.model.num_users)),
                    sc.timing, sc.sensing ? &*sc.sensing : nullptr);
  return sc;
}

std::string scenario_to_json(const Scenario& scenario) {
  json doc;
  if (!scenario.id.empty()) doc["id"] = scenario.id;
  doc["users"] = scenario.model.num_users;
  doc["channels"] = scenario.model.num_channels;
  doc["p"] = dump_matrix(scenario.model.p);
  doc["timing"] = {{"slot_us", scenario.timing.slot_us},
                   {"rts_us", scenario.timing.rts_us},
                   {"cts_us", scenario.timing.cts_us},
                   {"sifs_us", scenario.timing.sifs_us},
                   {"sen_us", scenario.timing.sen_us},
                   {"syn_us", scenario.timing.syn_us},
                   {"cycle_us", scenario.timing.cycle_us},
                   {"epsilon_p", scenario.timing.epsilon_p},
                   {"w_max", scenario.timing.w_max}};
  if (scenario.sensing) {
    doc["sensing"] = {{"p_d", dump_matrix(scenario.sensing->p_d)},
                      {"p_f", dump_matrix(scenario.sensing->p_f)}};
  }
  if (scenario.assignment) {
    doc["assignment"] = {{"exclusive", dump_channel_sets(scenario.assignment->exclusive)},
                         {"shared", dump_channel_sets(scenario.assignment->shared)}};
  }
  return doc.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json(buffer.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  atomic_write(path, scenario_to_json(scenario));
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp);
    out << content;
    if (!out.good()) throw ValidationError("failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ValidationError("cannot move " + tmp + " to " + path);
}

std::string assignment_csv(const Assignment& assignment) {
  std::ostringstream out;
  out << "user,channel,kind\n";
  for (int i = 0; i < assignment.num_users(); ++i) {
    for (int j : assignment.exclusive[i])
      out << (i + 1) << ',' << (j + 1) << ",exclusive\n";
    for (int j : assignment.shared[i]) out << (i + 1) << ',' << (j + 1) << ",shared\n";
  }
  return out.str();
}

}  // namespace crca
