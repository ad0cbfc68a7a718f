#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace nearopt::cli {

inline constexpr int kSchemaVersion = 1;

// Deterministic payload plus human-only notes. The payload is what CSV and
// JSON renderings serialize; identical config and seed give byte-identical
// output. Wall-clock timings and file lists live in notes, which only the
// markdown view and stderr show.
struct CommandResult {
  nlohmann::ordered_json payload;
  std::vector<std::string> notes;
  int exit_code = 0;
};

inline nlohmann::ordered_json payload_skeleton(const std::string& command,
                                               nlohmann::ordered_json config_echo) {
  nlohmann::ordered_json payload;
  payload["schema_version"] = kSchemaVersion;
  payload["command"] = command;
  payload["config"] = std::move(config_echo);
  payload["results"] = nlohmann::ordered_json::array();
  return payload;
}

// Schema check used by the round-trip tests and by consumers of saved runs.
inline void validate_payload(const nlohmann::json& payload) {
  if (!payload.is_object()) throw std::invalid_argument("payload: not an object");
  if (payload.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::invalid_argument("payload: unsupported schema_version");
  }
  if (!payload.at("command").is_string()) throw std::invalid_argument("payload: missing command");
  if (!payload.at("config").is_object()) throw std::invalid_argument("payload: missing config");
  if (!payload.at("results").is_array()) throw std::invalid_argument("payload: missing results");
}

namespace detail {

inline std::string cell_text(const nlohmann::ordered_json& value, bool rounded) {
  if (value.is_array()) {
    std::string joined;
    for (const auto& item : value) {
      if (!joined.empty()) joined += ";";
      joined += cell_text(item, rounded);
    }
    return joined;
  }
  if (value.is_number_float() && rounded) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6g", value.get<double>());
    return buffer;
  }
  return value.is_string() ? value.get<std::string>() : value.dump();
}

inline std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string escaped = "\"";
  for (char c : cell) {
    if (c == '"') escaped += '"';
    escaped += c;
  }
  escaped += '"';
  return escaped;
}

}  // namespace detail

inline std::string render_json(const CommandResult& result) {
  return result.payload.dump(1) + "\n";
}

inline std::string render_csv(const CommandResult& result) {
  const auto& records = result.payload.at("results");
  std::string out;
  if (records.empty()) return out;
  bool first = true;
  for (const auto& [key, value] : records.front().items()) {
    (void)value;
    if (!first) out += ",";
    out += detail::csv_escape(key);
    first = false;
  }
  out += "\n";
  for (const auto& record : records) {
    first = true;
    for (const auto& [key, value] : record.items()) {
      (void)key;
      if (!first) out += ",";
      out += detail::csv_escape(detail::cell_text(value, false));
      first = false;
    }
    out += "\n";
  }
  return out;
}

inline std::string render_markdown(const CommandResult& result) {
  const auto& records = result.payload.at("results");
  std::string out = "## " + result.payload.at("command").get<std::string>() + "\n\n";
  if (!records.empty()) {
    std::vector<std::string> keys;
    for (const auto& [key, value] : records.front().items()) {
      (void)value;
      keys.push_back(key);
    }
    out += "|";
    for (const auto& key : keys) out += " " + key + " |";
    out += "\n|";
    for (std::size_t i = 0; i < keys.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& record : records) {
      out += "|";
      for (const auto& key : keys) {
        out += " " + detail::cell_text(record.at(key), true) + " |";
      }
      out += "\n";
    }
  }
  if (!result.notes.empty()) {
    out += "\n";
    for (const auto& note : result.notes) out += "- " + note + "\n";
  }
  return out;
}

inline std::string render(const CommandResult& result, const std::string& format) {
  if (format == "json") return render_json(result);
  if (format == "csv") return render_csv(result);
  if (format == "markdown") return render_markdown(result);
  throw std::invalid_argument("unknown --format `" + format + "`");
}

}  // namespace nearopt::cli
