// Command-line front end: batch runs, benchmarks, replay, map validation
// and the game service.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mip/harness.hpp"
#include "mip/http_service.hpp"
#include "mip/map_io.hpp"
#include "mip/service.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kPartialFailure = 2;

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<mip::GridMap> load_maps(const fs::path& path) {
  if (fs::is_directory(path)) return mip::load_map_dir(path);
  return {mip::load_map_file(path)};
}

std::vector<mip::AgentSpec> expand_agents(const std::vector<std::string>& ids,
                                          const std::vector<int>& n_sims) {
  std::vector<mip::AgentSpec> out;
  for (const auto& id : ids) {
    if (!mip::is_known_agent(id)) throw mip::UnknownAgent("unknown agent '" + id + "'");
    if (mip::is_search_agent(id) && !n_sims.empty()) {
      for (int n : n_sims) out.push_back({id, n, {}, {}, {}});
    } else {
      out.push_back({id, {}, {}, {}, {}});
    }
  }
  return out;
}

std::vector<mip::HumanProfile> load_humans(const std::string& path) {
  if (path.empty()) return mip::default_population();
  return mip::load_population(nlohmann::json::parse(mip::read_text_file(path)));
}

void print_summary(const mip::BenchmarkResult& result) {
  mip::write_summary_csv(std::cout, result.summary);
  for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
}

int finish(const mip::BenchmarkResult& result, const std::string& out) {
  if (!out.empty()) mip::write_benchmark(result, out);
  print_summary(result);
  return result.failures.empty() ? 0 : kPartialFailure;
}

// Config file: {"maps": [...], "agents": [...], "humans": [...] | "file",
// "seeds": [...], "params": {...}, "out": "dir"}. Paths are relative to
// the config file.
int run_config(const fs::path& config_path, std::string out) {
  const auto j = nlohmann::json::parse(mip::read_text_file(config_path));
  const fs::path base = config_path.parent_path();
  mip::BenchmarkConfig config;
  for (const auto& m : j.at("maps")) {
    auto maps = load_maps(base / m.get<std::string>());
    config.maps.insert(config.maps.end(), maps.begin(), maps.end());
  }
  for (const auto& a : j.at("agents")) config.agents.push_back(mip::agent_spec_from_json(a));
  if (!j.contains("humans")) config.humans = mip::default_population();
  else if (j["humans"].is_string()) config.humans = load_humans((base / j["humans"].get<std::string>()).string());
  else config.humans = mip::load_population(j["humans"]);
  for (const auto& s : j.at("seeds")) config.seeds.push_back(s.get<std::uint64_t>());
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (p.contains("max_steps") || p.contains("alpha") || p.contains("rho") || p.contains("kappa"))
      config.reward = mip::reward_params_from_json(p);
    if (p.contains("detection_budget") && !p["detection_budget"].is_null())
      config.detection_budget = p["detection_budget"].get<int>();
  }
  if (out.empty() && j.contains("out")) out = (base / j["out"].get<std::string>()).string();
  return finish(mip::run_benchmark(config), out);
}

// Records exported by the service omit the map document; those are
// replayed against the map of the same id in `maps_dir`.
int replay(const fs::path& path, const fs::path& maps_dir) {
  const std::string text = mip::read_text_file(path);
  std::vector<mip::EpisodeRecord> records;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(mip::record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error&) {
      // Not line-delimited: treat the whole file as one record.
      records = {mip::record_from_json(nlohmann::json::parse(text))};
      break;
    }
  }
  int bad = 0;
  std::vector<mip::GridMap> maps;
  auto map_for = [&](const std::string& id) -> const mip::GridMap& {
    if (maps.empty()) maps = mip::load_map_dir(maps_dir);
    for (const auto& m : maps)
      if (m.id() == id) return m;
    throw mip::UnknownMap("no map '" + id + "' in " + maps_dir.string());
  };
  for (const auto& r : records) {
    const auto result = r.map_document.is_null() ? mip::replay_record(r, map_for(r.map_id))
                                                  : mip::replay_record(r);
    std::cout << r.map_id << ' ' << r.agent << ' ' << r.human.id << " seed " << r.seed
              << ": score " << result.score << (result.ok ? " ok" : " MISMATCH") << '\n';
    for (const auto& m : result.mismatches) std::cout << "  " << m << '\n';
    if (!result.ok) ++bad;
  }
  return bad == 0 ? 0 : kPartialFailure;
}

int validate(const std::vector<std::string>& files) {
  int bad = 0;
  for (const auto& f : files) {
    try {
      const auto map = mip::parse_map(mip::read_text_file(f), mip::map_id_from_path(f));
      const auto report = mip::validate_map(map);
      std::cout << f << ": " << (report.ok() ? "ok" : "invalid") << " (human errors "
                << mip::view_error_count(map, mip::Agent::Human) << ", robot errors "
                << mip::view_error_count(map, mip::Agent::Robot) << ")\n";
      for (const auto& e : report.errors) std::cout << "  error: " << e << '\n';
      for (const auto& w : report.warnings) std::cout << "  warning: " << w << '\n';
      if (!report.ok()) ++bad;
    } catch (const mip::ValidationError& e) {
      std::cout << f << ": invalid\n";
      for (const auto& v : e.violations()) std::cout << "  error: " << v << '\n';
      ++bad;
    } catch (const mip::Error& e) {
      std::cout << f << ": " << e.what() << '\n';
      ++bad;
    }
  }
  return bad == 0 ? 0 : kPartialFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-initiative Frozen Lake: planners, simulated users, benchmarks"};
  app.require_subcommand(1);

  std::string config_file, run_out;
  auto* run = app.add_subcommand("run", "Run an experiment config file");
  run->add_option("--config", config_file, "Experiment config (JSON)")->required();
  run->add_option("--out", run_out, "Output directory (overrides the config)");

  std::string maps_path = "maps", agents = "bayes-pomcp,pomcp", n_sims = "100", seeds = "0,1,2",
              bench_out, humans_file;
  int budget = -1, threads = 0;
  auto* bench = app.add_subcommand("bench", "Benchmark agents over maps, humans and seeds");
  bench->add_option("--maps", maps_path, "Map directory or file");
  bench->add_option("--agents", agents, "Comma-separated agent ids");
  bench->add_option("--n-sims", n_sims, "Comma-separated simulation budgets for search agents");
  bench->add_option("--seeds", seeds, "Comma-separated seeds");
  bench->add_option("--humans", humans_file, "Population file (default: built-in four profiles)");
  bench->add_option("--detection-budget", budget, "Detection budget (default unlimited)");
  bench->add_option("--threads", threads, "Worker threads (default MIP_THREADS or all cores)");
  bench->add_option("--out", bench_out, "Output directory for records.jsonl and summary.csv");

  std::string record_file;
  auto* rep = app.add_subcommand("replay", "Replay episode records and verify their scores");
  std::string replay_maps = "maps";
  rep->add_option("--record", record_file, "Record file (JSON or JSON lines)")->required();
  rep->add_option("--maps", replay_maps, "Map directory for records without an embedded map");

  std::vector<std::string> map_files;
  auto* val = app.add_subcommand("validate-map", "Check map documents against the design rules");
  val->add_option("files", map_files, "Map files")->required();

  std::string serve_maps = "maps", log_dir = "sessions", host = "0.0.0.0";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve game sessions over HTTP");
  serve->add_option("--maps", serve_maps, "Map directory");
  serve->add_option("--port", port, "Port");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--log-dir", log_dir, "Directory for append-only session logs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_config(config_file, run_out);
    if (*bench) {
      mip::BenchmarkConfig config;
      config.maps = load_maps(maps_path);
      std::vector<int> budgets;
      for (const auto& n : split(n_sims)) budgets.push_back(std::stoi(n));
      config.agents = expand_agents(split(agents), budgets);
      config.humans = load_humans(humans_file);
      for (const auto& s : split(seeds)) config.seeds.push_back(std::stoull(s));
      if (budget >= 0) config.detection_budget = budget;
      config.threads = threads;
      return finish(mip::run_benchmark(config), bench_out);
    }
    if (*rep) return replay(record_file, replay_maps);
    if (*val) return validate(map_files);
    if (*serve) {
      mip::SessionManager sessions(mip::load_map_dir(serve_maps), fs::path(log_dir));
      httplib::Server server;
      mip::install_routes(server, sessions);
      std::cout << "listening on " << host << ':' << port << std::endl;
      return server.listen(host, port) ? 0 : 1;
    }
  } catch (const mip::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
