#pragma once

// Map documents (`*.fl.json`): a JSON object with char-matrix layers.
//
//   {"size": 4, "start": [0, 0], "goal": [3, 3],
//    "layers": {"true":  ["A...", ...],   . Free  H Hole  ~ Slippery  A Start  G Goal
//               "human": ["....", ...],   . BelievedSafe  s BelievedSlippery  ? Unknown
//               "robot": ["....", ...],   same alphabet as human
//               "fog":   ["....", ...]}}  . clear  # fog

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mip/domain.hpp"

namespace mip {

struct MapReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

namespace detail {

inline char cell_char(CellKind k) {
  switch (k) {
    case CellKind::Free: return '.';
    case CellKind::Hole: return 'H';
    case CellKind::Slippery: return '~';
    case CellKind::Start: return 'A';
    case CellKind::Goal: return 'G';
  }
  return '?';
}

inline char view_char(ViewCell v) {
  switch (v) {
    case ViewCell::BelievedSafe: return '.';
    case ViewCell::BelievedSlippery: return 's';
    case ViewCell::Unknown: return '?';
  }
  return '!';
}

inline std::optional<CellKind> parse_cell(char c) {
  switch (c) {
    case '.': return CellKind::Free;
    case 'H': return CellKind::Hole;
    case '~': return CellKind::Slippery;
    case 'A': return CellKind::Start;
    case 'G': return CellKind::Goal;
    default: return std::nullopt;
  }
}

inline std::optional<ViewCell> parse_view(char c) {
  switch (c) {
    case '.': return ViewCell::BelievedSafe;
    case 's': return ViewCell::BelievedSlippery;
    case '?': return ViewCell::Unknown;
    default: return std::nullopt;
  }
}

template <typename T, typename Parse>
std::vector<T> parse_layer(const nlohmann::json& rows, const char* name, int size, Parse parse) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != size)
    throw SyntaxError(std::string("layer '") + name + "' must have " + std::to_string(size) +
                      " rows");
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(size * size));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_string()) throw SyntaxError(std::string("layer '") + name + "' row not a string");
    const auto& line = rows[r].get_ref<const std::string&>();
    if (static_cast<int>(line.size()) != size)
      throw SyntaxError(std::string("layer '") + name + "' row " + std::to_string(r) +
                        " has length " + std::to_string(line.size()));
    for (std::size_t c = 0; c < line.size(); ++c) {
      auto v = parse(line[c]);
      if (!v)
        throw SyntaxError(std::string("layer '") + name + "' bad character '" + line[c] +
                          "' at row " + std::to_string(r) + " col " + std::to_string(c));
      out.push_back(*v);
    }
  }
  return out;
}

inline Cell parse_coord(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw SyntaxError(std::string("'") + key + "' must be [row, col]");
  return {j[0].get<int>(), j[1].get<int>()};
}

// Cells reachable from `from` without entering `blocked`; `cut` removes one
// undirected edge (pair of indices), or none when negative.
inline std::vector<int> bfs_parents(const GridMap& map, Cell from, CellSet blocked,
                                    std::pair<int, int> cut = {-1, -1}) {
  std::vector<int> parent(static_cast<std::size_t>(map.cell_count()), -2);
  std::deque<Cell> queue{from};
  parent[map.index(from)] = -1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    const int ci = map.index(c);
    for (Direction d : kDirections) {
      auto n = map.neighbor(c, d);
      if (!n) continue;
      const int ni = map.index(*n);
      if (parent[ni] != -2 || blocked.contains(ni)) continue;
      if ((ci == cut.first && ni == cut.second) || (ci == cut.second && ni == cut.first)) continue;
      parent[ni] = ci;
      queue.push_back(*n);
    }
  }
  return parent;
}

inline int view_errors(const GridMap& map, Agent agent) {
  int errors = 0;
  for (int i = 0; i < map.cell_count(); ++i) {
    const Cell c = map.cell_at(i);
    const ViewCell v = agent == Agent::Human ? map.human_view(c) : map.robot_view(c);
    const CellKind k = map.kind(c);
    if (k == CellKind::Free && v == ViewCell::BelievedSlippery) ++errors;   // false positive
    if (k == CellKind::Slippery && v == ViewCell::BelievedSafe) ++errors;   // false negative
  }
  return errors;
}

}  // namespace detail

// View-layer errors (false positives + false negatives against the truth).
// The human count uses the fogged view, since fog turns beliefs into Unknown.
inline int view_error_count(const GridMap& map, Agent agent) {
  return detail::view_errors(map, agent);
}

inline MapReport validate_map(const GridMap& map) {
  MapReport report;
  int starts = 0, goals = 0;
  for (int i = 0; i < map.cell_count(); ++i) {
    const Cell c = map.cell_at(i);
    const CellKind k = map.kind(c);
    if (k == CellKind::Start) {
      ++starts;
      if (c != map.start()) report.errors.push_back("start cell " + to_string(c) + " differs from 'start' key");
    }
    if (k == CellKind::Goal) {
      ++goals;
      if (c != map.goal()) report.errors.push_back("goal cell " + to_string(c) + " differs from 'goal' key");
    }
    if (k == CellKind::Start || k == CellKind::Goal || k == CellKind::Hole) {
      if (map.human_layer(c) == ViewCell::BelievedSlippery ||
          map.robot_view(c) == ViewCell::BelievedSlippery)
        report.errors.push_back("view marks non-ground cell " + to_string(c) + " slippery");
    }
  }
  if (starts == 0) report.errors.push_back("missing start");
  if (starts > 1) report.errors.push_back("duplicate start");
  if (goals == 0) report.errors.push_back("missing goal");
  if (goals > 1) report.errors.push_back("duplicate goal");
  if (!map.in_bounds(map.start()) || !map.in_bounds(map.goal())) {
    report.errors.push_back("start or goal out of bounds");
    return report;
  }

  const int human_errors = detail::view_errors(map, Agent::Human);
  const int robot_errors = detail::view_errors(map, Agent::Robot);
  if (human_errors != robot_errors)
    report.errors.push_back("asymmetric view errors: human " + std::to_string(human_errors) +
                            ", robot " + std::to_string(robot_errors));

  const CellSet blocked = map.true_hazards();
  auto parent = detail::bfs_parents(map, map.start(), blocked);
  const int goal_index = map.index(map.goal());
  if (parent[goal_index] == -2) {
    report.errors.push_back("no safe path from start to goal");
    return report;
  }

  // The safe path is unique iff every edge on one path separates start from goal.
  for (int v = goal_index; parent[v] >= 0; v = parent[v]) {
    auto alt = detail::bfs_parents(map, map.start(), blocked, {parent[v], v});
    if (alt[goal_index] != -2) {
      report.warnings.push_back("more than one safe path from start to goal");
      break;
    }
  }
  return report;
}

inline GridMap parse_map(const std::string& text, std::string id = "map") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(std::string("malformed map document: ") + e.what());
  }
  if (!doc.is_object()) throw SyntaxError("map document must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "size" && key != "start" && key != "goal" && key != "layers")
      throw SyntaxError("unknown top-level key '" + key + "'");
  }
  for (const char* key : {"size", "start", "goal", "layers"})
    if (!doc.contains(key)) throw SyntaxError(std::string("missing key '") + key + "'");
  if (!doc["size"].is_number_integer()) throw SyntaxError("'size' must be an integer");
  const int size = doc["size"].get<int>();
  if (size < 2 || size > kMaxGridSize)
    throw ValidationError({"grid size " + std::to_string(size) + " outside supported range 2..8"});
  const Cell start = detail::parse_coord(doc["start"], "start");
  const Cell goal = detail::parse_coord(doc["goal"], "goal");

  const auto& layers = doc["layers"];
  if (!layers.is_object()) throw SyntaxError("'layers' must be an object");
  for (const auto& [key, value] : layers.items()) {
    if (key != "true" && key != "human" && key != "robot" && key != "fog")
      throw SyntaxError("unknown layer '" + key + "'");
  }
  for (const char* key : {"true", "human", "robot", "fog"})
    if (!layers.contains(key)) throw SyntaxError(std::string("missing layer '") + key + "'");

  auto truth = detail::parse_layer<CellKind>(layers["true"], "true", size, detail::parse_cell);
  auto human = detail::parse_layer<ViewCell>(layers["human"], "human", size, detail::parse_view);
  auto robot = detail::parse_layer<ViewCell>(layers["robot"], "robot", size, detail::parse_view);
  auto fog_chars = detail::parse_layer<char>(layers["fog"], "fog", size, [](char c) -> std::optional<char> {
    if (c == '#' || c == '.') return c;
    return std::nullopt;
  });
  std::vector<bool> fog;
  fog.reserve(fog_chars.size());
  for (char c : fog_chars) fog.push_back(c == '#');

  return GridMap(std::move(id), size, start, goal, std::move(truth), std::move(human),
                 std::move(robot), std::move(fog));
}

// Parses and validates; warnings are tolerated.
inline GridMap load_map(const std::string& text, std::string id = "map") {
  GridMap map = parse_map(text, std::move(id));
  MapReport report = validate_map(map);
  if (!report.ok()) throw ValidationError(report.errors);
  return map;
}

inline std::string map_id_from_path(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  const std::string suffix = ".fl.json";
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
    return name.substr(0, name.size() - suffix.size());
  return path.stem().string();
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GridMap load_map_file(const std::filesystem::path& path) {
  return load_map(read_text_file(path), map_id_from_path(path));
}

// All `*.fl.json` files of a directory, sorted by file name.
inline std::vector<GridMap> load_map_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 8 && name.ends_with(".fl.json"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<GridMap> maps;
  for (const auto& f : files) maps.push_back(load_map_file(f));
  return maps;
}

inline std::vector<std::string> layer_rows(const GridMap& map, const char* layer) {
  std::vector<std::string> rows;
  const std::string which = layer;
  for (int r = 0; r < map.size(); ++r) {
    std::string line;
    for (int c = 0; c < map.size(); ++c) {
      const Cell cell{r, c};
      if (which == "true") line += detail::cell_char(map.kind(cell));
      else if (which == "human") line += detail::view_char(map.human_layer(cell));
      else if (which == "robot") line += detail::view_char(map.robot_view(cell));
      else line += map.fogged(cell) ? '#' : '.';
    }
    rows.push_back(std::move(line));
  }
  return rows;
}

inline nlohmann::json map_to_json(const GridMap& map) {
  return {{"size", map.size()},
          {"start", {map.start().row, map.start().col}},
          {"goal", {map.goal().row, map.goal().col}},
          {"layers",
           {{"true", layer_rows(map, "true")},
            {"human", layer_rows(map, "human")},
            {"robot", layer_rows(map, "robot")},
            {"fog", layer_rows(map, "fog")}}}};
}

// Map document text, one layer row per line.
inline std::string map_to_document(const GridMap& map) {
  auto rows = [&](const char* layer) {
    std::string out = "[\n";
    auto lines = layer_rows(map, layer);
    for (std::size_t i = 0; i < lines.size(); ++i)
      out += "      \"" + lines[i] + "\"" + (i + 1 < lines.size() ? ",\n" : "\n");
    return out + "    ]";
  };
  std::string doc = "{\n";
  doc += "  \"size\": " + std::to_string(map.size()) + ",\n";
  doc += "  \"start\": [" + std::to_string(map.start().row) + ", " + std::to_string(map.start().col) + "],\n";
  doc += "  \"goal\": [" + std::to_string(map.goal().row) + ", " + std::to_string(map.goal().col) + "],\n";
  doc += "  \"layers\": {\n";
  doc += "    \"true\": " + rows("true") + ",\n";
  doc += "    \"human\": " + rows("human") + ",\n";
  doc += "    \"robot\": " + rows("robot") + ",\n";
  doc += "    \"fog\": " + rows("fog") + "\n";
  doc += "  }\n}\n";
  return doc;
}

// Test and tooling convenience: builds a map from row strings, taking start
// and goal from the 'A' and 'G' characters of the true layer.
inline GridMap map_from_rows(const std::vector<std::string>& truth,
                             const std::vector<std::string>& human,
                             const std::vector<std::string>& robot,
                             const std::vector<std::string>& fog, std::string id = "map") {
  nlohmann::json doc;
  const int n = static_cast<int>(truth.size());
  Cell start{}, goal{};
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < static_cast<int>(truth[r].size()); ++c) {
      if (truth[r][c] == 'A') start = {r, c};
      if (truth[r][c] == 'G') goal = {r, c};
    }
  doc["size"] = n;
  doc["start"] = {start.row, start.col};
  doc["goal"] = {goal.row, goal.col};
  doc["layers"] = {{"true", truth}, {"human", human}, {"robot", robot}, {"fog", fog}};
  return parse_map(doc.dump(), std::move(id));
}

}  // namespace mip
