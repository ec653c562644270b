#pragma once
// Plant description: a three-stage flowshop batch plant
//
//   state1 --mixing--> state2 --reaction--> state3 --purification--> state4
//
// Units process fixed-duration batches; bounded states buffer material
// between them. Two built-in presets differ only in the storage limits of
// the two intermediate states (100 vs 50).

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowbatch {

enum class ProcessKind { mixing = 0, reaction = 1, purification = 2 };

inline const char* to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::mixing: return "mixing";
    case ProcessKind::reaction: return "reaction";
    case ProcessKind::purification: return "purification";
  }
  return "?";
}

inline ProcessKind process_kind_from_string(const std::string& s) {
  if (s == "mixing") return ProcessKind::mixing;
  if (s == "reaction") return ProcessKind::reaction;
  if (s == "purification") return ProcessKind::purification;
  throw std::invalid_argument("unknown process kind: " + s);
}

struct UnitSpec {
  std::string name;
  double capacity = 0.0;        // material units per batch
  ProcessKind kind{};
  double processing_time = 0.0; // hours
  double price = 0.0;           // currency per unit (0 in both presets)
};

// storage_limit / initial_amount of nullopt means Unlimited.
struct StateSpec {
  std::string name;
  std::optional<double> storage_limit;
  std::optional<double> initial_amount;
  double price = 0.0;
};

struct PlantConfig {
  // Chain order is fixed: units[0]=mixing, units[1]=reaction,
  // units[2]=purification; states[0..3] = state1..state4.
  std::vector<UnitSpec> units;
  std::vector<StateSpec> states;

  const UnitSpec& unit(ProcessKind k) const {
    return units[static_cast<std::size_t>(k)];
  }

  double storage_limit_of(std::size_t state_index) const {
    const auto& lim = states[state_index].storage_limit;
    return lim ? *lim : std::numeric_limits<double>::infinity();
  }

  double initial_amount_of(std::size_t state_index) const {
    const auto& init = states[state_index].initial_amount;
    return init ? *init : std::numeric_limits<double>::infinity();
  }

  void validate() const {
    if (units.size() != 3)
      throw std::invalid_argument("plant must have exactly 3 units");
    if (states.size() != 4)
      throw std::invalid_argument("plant must have exactly 4 states");
    static constexpr std::array<ProcessKind, 3> chain = {
        ProcessKind::mixing, ProcessKind::reaction, ProcessKind::purification};
    for (std::size_t i = 0; i < 3; ++i) {
      if (units[i].kind != chain[i])
        throw std::invalid_argument(
            "units must form the chain mixing, reaction, purification");
      if (!(units[i].capacity > 0.0))
        throw std::invalid_argument("unit capacity must be strictly positive");
      if (!(units[i].processing_time > 0.0))
        throw std::invalid_argument(
            "unit processing time must be strictly positive");
    }
    for (const auto& s : states) {
      if (s.storage_limit && !(*s.storage_limit > 0.0))
        throw std::invalid_argument(
            "state storage limit must be strictly positive or unlimited");
      if (s.initial_amount && *s.initial_amount < 0.0)
        throw std::invalid_argument("state initial amount must be >= 0");
    }
  }

  static PlantConfig primary() { return make_preset(100.0); }
  static PlantConfig variant() { return make_preset(50.0); }

  static PlantConfig preset(const std::string& name) {
    if (name == "primary") return primary();
    if (name == "variant") return variant();
    throw std::invalid_argument("unknown plant preset: " + name);
  }

  // Structured-text (JSON) plant description mirroring the fields above.
  // Absent storage_limit / initial_amount mean Unlimited.
  static PlantConfig from_json(const nlohmann::json& j) {
    PlantConfig cfg;
    for (const auto& ju : j.at("units")) {
      UnitSpec u;
      u.name = ju.at("name").get<std::string>();
      u.capacity = ju.at("capacity").get<double>();
      u.kind = process_kind_from_string(ju.at("kind").get<std::string>());
      u.processing_time = ju.at("processing_time").get<double>();
      u.price = ju.value("price", 0.0);
      cfg.units.push_back(std::move(u));
    }
    for (const auto& js : j.at("states")) {
      StateSpec s;
      s.name = js.at("name").get<std::string>();
      if (js.contains("storage_limit") && !js["storage_limit"].is_null())
        s.storage_limit = js["storage_limit"].get<double>();
      if (js.contains("initial_amount") && !js["initial_amount"].is_null())
        s.initial_amount = js["initial_amount"].get<double>();
      s.price = js.value("price", 0.0);
      cfg.states.push_back(std::move(s));
    }
    cfg.validate();
    return cfg;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["units"] = nlohmann::json::array();
    for (const auto& u : units) {
      j["units"].push_back({{"name", u.name},
                            {"capacity", u.capacity},
                            {"kind", to_string(u.kind)},
                            {"processing_time", u.processing_time},
                            {"price", u.price}});
    }
    j["states"] = nlohmann::json::array();
    for (const auto& s : states) {
      nlohmann::json js{{"name", s.name}, {"price", s.price}};
      if (s.storage_limit) js["storage_limit"] = *s.storage_limit;
      if (s.initial_amount) js["initial_amount"] = *s.initial_amount;
      j["states"].push_back(std::move(js));
    }
    return j;
  }

 private:
  static PlantConfig make_preset(double intermediate_storage) {
    PlantConfig cfg;
    cfg.units = {
        {"mixer", 100.0, ProcessKind::mixing, 4.5, 0.0},
        {"reactor", 75.0, ProcessKind::reaction, 3.0, 0.0},
        {"purificator", 50.0, ProcessKind::purification, 1.5, 0.0},
    };
    cfg.states = {
        {"state1", std::nullopt, std::nullopt, 0.0},  // unlimited feed
        {"state2", intermediate_storage, 0.0, 0.0},
        {"state3", intermediate_storage, 0.0, 0.0},
        {"state4", std::nullopt, 0.0, 0.0},  // unlimited product store
    };
    cfg.validate();
    return cfg;
  }
};

}  // namespace flowbatch
