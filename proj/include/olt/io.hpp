#pragma once

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "olt/errors.hpp"
#include "olt/estimate.hpp"
#include "olt/model.hpp"
#include "olt/verify.hpp"

namespace olt {

/// Value formatted with 12 significant digits; the tabular output contract.
inline std::string format_sig12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline Family family_from_string(std::string_view name) {
  if (name == "cumulative") return Family::Cumulative;
  if (name == "sequential") return Family::Sequential;
  if (name == "pcm") return Family::AdjacentPcm;
  throw ValidationError("model spec: family must be one of cumulative, sequential, pcm (got '" +
                        std::string(name) + "')");
}

/// Parsed model specification file: a family, a link, and one threshold
/// vector per item.
struct ModelSpec {
  Family family = Family::AdjacentPcm;
  std::string link = "logistic";
  std::vector<ItemThresholds> items;

  OrdinalModel model_for(std::size_t index) const {
    return OrdinalModel(family, ResponseFunction::logistic(), items.at(index));
  }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

/// Parse a model spec JSON document. Syntax problems raise ParseError with
/// line/column; schema and invariant problems raise ValidationError.
inline ModelSpec parse_model_spec(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = detail::line_column_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("model spec: JSON parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column),
                     line, column);
  }
  if (!doc.is_object()) throw ValidationError("model spec: top level must be an object");
  if (!doc.contains("family") || !doc["family"].is_string()) {
    throw ValidationError("model spec: missing string field 'family'");
  }
  ModelSpec spec;
  spec.family = family_from_string(doc["family"].get<std::string>());
  if (doc.contains("link")) {
    if (!doc["link"].is_string()) throw ValidationError("model spec: 'link' must be a string");
    spec.link = doc["link"].get<std::string>();
  }
  if (spec.link != "logistic") {
    throw ValidationError("model spec: link must be 'logistic' (got '" + spec.link + "')");
  }
  if (!doc.contains("items") || !doc["items"].is_array() || doc["items"].empty()) {
    throw ValidationError("model spec: missing non-empty array 'items'");
  }
  for (const auto& item : doc["items"]) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string() ||
        !item.contains("deltas") || !item["deltas"].is_array() || item["deltas"].empty()) {
      throw ValidationError("model spec: each item needs a string 'id' and a non-empty 'deltas' array");
    }
    std::vector<double> deltas;
    for (const auto& v : item["deltas"]) {
      if (!v.is_number()) throw ValidationError("model spec: deltas must be numbers");
      deltas.push_back(v.get<double>());
    }
    spec.items.emplace_back(item["id"].get<std::string>(), std::move(deltas));
  }
  if (spec.family == Family::Cumulative) {
    for (const auto& item : spec.items) {
      const auto& d = item.deltas();
      for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        if (d[i] > d[i + 1]) {
          throw OrderingViolationError("model spec: item '" + item.item_id() +
                                           "': threshold order violated at (" +
                                           std::to_string(i + 1) + ", " + std::to_string(i + 2) +
                                           "); cumulative deltas must be nondecreasing",
                                       i + 1, i + 2);
        }
      }
    }
  }
  return spec;
}

inline ModelSpec load_model_spec(const std::filesystem::path& path) {
  return parse_model_spec(detail::read_file(path));
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string trimmed(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

}  // namespace detail

/// Parse the response CSV format: header `person_id,<item ids...>`, cells
/// integer categories or NA. Each item's k is inferred as its maximum
/// observed category.
inline Dataset parse_response_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("response csv: empty input", 1, 1);
  auto header = detail::split_csv_line(line);
  if (header.size() < 2 || detail::trimmed(header[0]) != "person_id") {
    throw ParseError("response csv: header must be 'person_id,<item ids...>'", 1, 1);
  }
  Dataset data;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string id = detail::trimmed(header[i]);
    if (id.empty()) throw ParseError("response csv: empty item id in header", 1, i + 1);
    data.items.push_back({id, 1});
  }
  std::vector<int> max_seen(data.items.size(), 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trimmed(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("response csv: line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(header.size()),
                       line_no, 1);
    }
    data.person_ids.push_back(detail::trimmed(fields[0]));
    std::vector<int> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const std::string cell = detail::trimmed(fields[i]);
      if (cell == "NA") {
        row.push_back(Dataset::kMissing);
        continue;
      }
      try {
        std::size_t used = 0;
        const int value = std::stoi(cell, &used);
        if (used != cell.size() || value < 0) throw std::invalid_argument(cell);
        row.push_back(value);
        max_seen[i - 1] = std::max(max_seen[i - 1], value);
      } catch (const std::exception&) {
        throw ParseError("response csv: line " + std::to_string(line_no) + ", field " +
                             std::to_string(i + 1) + ": expected a nonnegative integer or NA",
                         line_no, i + 1);
      }
    }
    data.responses.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < data.items.size(); ++i) data.items[i].k = std::max(max_seen[i], 1);
  data.validate();
  return data;
}

inline Dataset load_response_csv(const std::filesystem::path& path) {
  return parse_response_csv(detail::read_file(path));
}

inline std::string response_csv_to_string(const Dataset& data) {
  std::string out = "person_id";
  for (const auto& item : data.items) out += "," + item.id;
  out += "\n";
  for (int p = 0; p < data.n_persons(); ++p) {
    out += data.person_ids[static_cast<std::size_t>(p)];
    for (int i = 0; i < data.n_items(); ++i) {
      const int y = data.responses[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
      out += ",";
      out += y == Dataset::kMissing ? "NA" : std::to_string(y);
    }
    out += "\n";
  }
  return out;
}

/// Abilities CSV: header `person_id,theta`, one row per person.
inline std::vector<std::pair<std::string, double>> parse_abilities_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("abilities csv: empty input", 1, 1);
  const auto header = detail::split_csv_line(line);
  if (header.size() != 2 || detail::trimmed(header[0]) != "person_id" ||
      detail::trimmed(header[1]) != "theta") {
    throw ParseError("abilities csv: header must be 'person_id,theta'", 1, 1);
  }
  std::vector<std::pair<std::string, double>> abilities;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trimmed(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2) {
      throw ParseError("abilities csv: line " + std::to_string(line_no) + " needs two fields",
                       line_no, 1);
    }
    try {
      std::size_t used = 0;
      const std::string cell = detail::trimmed(fields[1]);
      const double theta = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      abilities.emplace_back(detail::trimmed(fields[0]), theta);
    } catch (const std::exception&) {
      throw ParseError("abilities csv: line " + std::to_string(line_no) + ": expected a number",
                       line_no, 2);
    }
  }
  return abilities;
}

inline std::vector<std::pair<std::string, double>> load_abilities_csv(
    const std::filesystem::path& path) {
  return parse_abilities_csv(detail::read_file(path));
}

inline std::string abilities_csv_to_string(std::span<const std::string> ids,
                                           std::span<const double> thetas) {
  std::string out = "person_id,theta\n";
  for (std::size_t p = 0; p < ids.size(); ++p) {
    out += ids[p] + "," + format_sig12(thetas[p]) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["proposition"] = to_string(report.proposition);
  j["kind"] = report.counterexample_search ? "counterexample-search" : "equality";
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["k_min"] = report.k_range.min;
  j["k_max"] = report.k_range.max;
  j["tolerance"] = report.tolerance;
  j["max_abs_deviation"] = report.max_abs_deviation;
  j["worst_instance"] = report.worst_instance;
  j["passed"] = report.passed;
  return j;
}

inline nlohmann::ordered_json to_json(const FitResult& result, const Dataset& data, Family family,
                                      FitOptions::Mode mode) {
  nlohmann::ordered_json j;
  j["family"] = to_string(family);
  j["mode"] = mode == FitOptions::Mode::FixAbilities ? "fixed-theta" : "joint";
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["log_likelihood"] = result.log_likelihood;
  j["gradient_norm"] = result.gradient_norm;
  j["anchor"] = result.anchored ? nlohmann::ordered_json("mean-ability-zero")
                                : nlohmann::ordered_json(nullptr);
  j["numeric_gradient"] = result.numeric_gradient;
  auto items = nlohmann::ordered_json::array();
  for (int i = 0; i < data.n_items(); ++i) {
    nlohmann::ordered_json item;
    item["id"] = data.items[static_cast<std::size_t>(i)].id;
    item["deltas"] = result.thresholds[static_cast<std::size_t>(i)];
    items.push_back(std::move(item));
  }
  j["items"] = std::move(items);
  if (mode == FitOptions::Mode::JointAlternating) {
    auto abilities = nlohmann::ordered_json::array();
    for (int p = 0; p < data.n_persons(); ++p) {
      nlohmann::ordered_json person;
      person["id"] = data.person_ids[static_cast<std::size_t>(p)];
      person["theta"] = result.abilities[static_cast<std::size_t>(p)];
      abilities.push_back(std::move(person));
    }
    j["abilities"] = std::move(abilities);
  }
  return j;
}

}  // namespace olt
