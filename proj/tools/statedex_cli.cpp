#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "statedex/api.hpp"
#include "statedex/error.hpp"
#include "statedex/ingest.hpp"
#include "statedex/png_writer.hpp"
#include "statedex/query.hpp"
#include "statedex/query_json.hpp"
#include "statedex/snapshot.hpp"
#include "statedex/summarize.hpp"
#include "statedex/synth.hpp"
#include "statedex/winprob.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace statedex;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

// Files given directly are kept; directories contribute their *.json
// entries in name order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in))
        if (entry.is_regular_file() && entry.path().extension() == ".json") found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(in);
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot write " + path.string());
  out << text;
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

std::pair<std::uint32_t, std::uint32_t> parse_resolution(const std::string& text) {
  auto x = text.find_first_of("xX");
  try {
    std::size_t used = 0;
    if (x == std::string::npos) {
      const auto n = std::stoul(text, &used);
      if (used == text.size() && n >= 1 && n <= 4096) return {std::uint32_t(n), std::uint32_t(n)};
    } else {
      const auto nx = std::stoul(text.substr(0, x), &used);
      std::size_t used_y = 0;
      const auto ny = std::stoul(text.substr(x + 1), &used_y);
      if (used == x && used_y == text.size() - x - 1 && nx >= 1 && ny >= 1 && nx <= 4096 && ny <= 4096)
        return {std::uint32_t(nx), std::uint32_t(ny)};
    }
  } catch (const std::exception&) {
  }
  throw Error("invalid_resolution", "resolution must be N or NXxNY with values in [1, 4096]");
}

struct Summary {
  std::size_t files = 0;
  std::size_t failed_files = 0;
  std::size_t rejected_rounds = 0;
};

void print_store_summary(const StateStore& store, const Summary& s, const std::string& format) {
  if (format == "json") {
    std::cout << json{{"files", s.files},
                      {"failed_files", s.failed_files},
                      {"rejected_rounds", s.rejected_rounds},
                      {"matches", store.match_count()},
                      {"rounds", store.round_count()},
                      {"states", store.state_count()},
                      {"tokens", store.token_count()}}
                     .dump(2)
              << "\n";
    return;
  }
  std::cout << "files: " << s.files << "\n"
            << "failed_files: " << s.failed_files << "\n"
            << "rejected_rounds: " << s.rejected_rounds << "\n"
            << "matches: " << store.match_count() << "\n"
            << "rounds: " << store.round_count() << "\n"
            << "states: " << store.state_count() << "\n"
            << "tokens: " << store.token_count() << "\n";
}

int cmd_ingest(const std::vector<std::string>& inputs, const std::string& mesh_dir, const std::string& out,
               const std::string& format) {
  StoreBuilder builder(load_mesh_dir(mesh_dir));
  Summary summary;
  bool errors = false;
  for (const auto& path : expand_inputs(inputs)) {
    ++summary.files;
    try {
      ParseResult parsed = parse_match_file(path);
      for (const auto& d : parsed.diagnostics) std::cerr << path.string() << ": " << d << "\n";
      summary.rejected_rounds += std::size_t(parsed.rejected_rounds);
      errors |= parsed.partial();
      for (const auto& d : builder.add_match(parsed.match)) {
        std::cerr << path.string() << ": " << d << "\n";
        errors = true;
      }
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      ++summary.failed_files;
      errors = true;
    }
  }
  const StateStore store = std::move(builder).finish();
  save_snapshot(store, out);
  print_store_summary(store, summary, format);
  return errors ? 1 : 0;
}

int cmd_synth(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
              const std::string& mesh_dir, const std::string& snapshot_out, const std::string& format) {
  SynthConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error("io_error", "cannot open " + config_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(config_path + ": " + e.what());
    }
    config = SynthConfig::from_json(doc);
  }
  const MeshCatalog meshes = load_mesh_dir(mesh_dir);
  const SynthGenerator gen(config, seed, meshes);
  if (!out_dir.empty()) fs::create_directories(out_dir);
  StoreBuilder builder(meshes);
  bool errors = false;
  for (int i = 0; i < config.matches; ++i) {
    const MatchRecord match = gen.generate(i);
    if (!out_dir.empty()) write_text(fs::path(out_dir) / (match.match_id + ".json"), render_match(match).dump() + "\n");
    for (const auto& d : builder.add_match(match)) {
      std::cerr << match.match_id << ": " << d << "\n";
      errors = true;
    }
  }
  const StateStore store = std::move(builder).finish();
  if (!snapshot_out.empty()) save_snapshot(store, snapshot_out);
  Summary summary;
  summary.files = out_dir.empty() ? 0 : std::size_t(config.matches);
  print_store_summary(store, summary, format);
  return errors ? 1 : 0;
}

int cmd_query(const std::string& snapshot, const std::string& sketch, const std::string& format, int limit) {
  const StateStore store = load_snapshot(snapshot);
  const QuerySpec spec = load_sketch_file(sketch);
  const auto hits = run_query(store, spec);
  const std::size_t shown = limit > 0 ? std::min(hits.size(), std::size_t(limit)) : hits.size();

  if (format == "json") {
    json results = json::array();
    for (std::size_t k = 0; k < shown; ++k) {
      const auto& h = hits[k];
      const auto ref = store.ref(h.state);
      const auto& round = store.round_of(h.state);
      results.push_back({{"rank", k + 1},
                         {"match_id", ref.match_id},
                         {"round_number", ref.round_number},
                         {"t", ref.t},
                         {"token", store.token_string(h.state)},
                         {"hamming", h.hamming ? json(*h.hamming) : json(nullptr)},
                         {"distance", h.distance ? json(*h.distance) : json(nullptr)},
                         {"winner", to_string(round.winner)},
                         {"end_reason", to_string(round.end_reason)}});
    }
    std::cout << json{{"total", hits.size()}, {"results", results}}.dump(2) << "\n";
    return 0;
  }
  std::cout << "total\t" << hits.size() << "\n";
  std::cout << "rank\tmatch_id\tround_number\tt\ttoken\thamming\tdistance\twinner\tend_reason\n";
  for (std::size_t k = 0; k < shown; ++k) {
    const auto& h = hits[k];
    const auto ref = store.ref(h.state);
    const auto& round = store.round_of(h.state);
    std::cout << k + 1 << "\t" << ref.match_id << "\t" << ref.round_number << "\t" << json(ref.t).dump() << "\t"
              << store.token_string(h.state) << "\t" << (h.hamming ? std::to_string(*h.hamming) : "-") << "\t"
              << (h.distance ? json(*h.distance).dump() : "-") << "\t" << to_string(round.winner) << "\t"
              << to_string(round.end_reason) << "\n";
  }
  return 0;
}

std::vector<LabeledExample> store_examples(const StateStore& store) {
  std::vector<LabeledExample> examples;
  examples.reserve(store.state_count());
  for (std::uint32_t r = 0; r < store.round_count(); ++r) {
    const RoundRecord round = store.round_record(r);
    auto labeled = label_rounds({&round, 1});
    examples.insert(examples.end(), labeled.begin(), labeled.end());
  }
  return examples;
}

int cmd_train(const std::string& snapshot, std::uint64_t seed, const std::string& out, int max_iterations) {
  const StateStore store = load_snapshot(snapshot);
  TrainOptions options;
  options.max_iterations = max_iterations;
  const WinProbModel model = train(store_examples(store), seed, options);
  model.save(out);
  std::cerr << "iterations: " << model.training_meta.iterations
            << (model.training_meta.converged ? " (converged)" : " (not converged)") << "\n";
  if (!model.training_meta.converged) std::cerr << "warning: iteration budget exhausted\n";
  return 0;
}

std::vector<StateIndex> query_refs(const StateStore& store, const QuerySpec& spec) {
  const auto hits = run_query(store, spec);
  std::vector<StateIndex> refs;
  refs.reserve(hits.size());
  for (const auto& h : hits) refs.push_back(h.state);
  return refs;
}

int cmd_heatmap(const std::string& snapshot, const std::string& sketch, const std::string& side_text,
                const std::string& resolution, const std::string& out, const std::string& png) {
  auto side = parse_side(side_text);
  if (!side) throw Error("invalid_side", "side must be T or CT");
  const auto [nx, ny] = parse_resolution(resolution);
  const StateStore store = load_snapshot(snapshot);
  const QuerySpec spec = load_sketch_file(sketch);
  const HeatmapGrid grid = heatmap(store, spec.map, query_refs(store, spec), *side, nx, ny);
  const std::string doc = grid.to_json().dump() + "\n";
  if (out.empty() || out == "-")
    std::cout << doc;
  else
    write_text(out, doc);
  if (!png.empty()) write_heatmap_png(grid, png);
  return 0;
}

int cmd_outcomes(const std::string& snapshot, const std::string& sketch) {
  const StateStore store = load_snapshot(snapshot);
  const QuerySpec spec = load_sketch_file(sketch);
  std::cout << outcome_table(store, query_refs(store, spec)).to_json().dump(2) << "\n";
  return 0;
}

int cmd_info(const std::string& snapshot) {
  const StateStore store = load_snapshot(snapshot);
  json maps = json::array();
  for (const auto& m : store.data().meshes) maps.push_back(m.map_name());
  std::cout << json{{"matches", store.match_count()}, {"rounds", store.data().rounds.size()},
                    {"states", store.state_count()}, {"tokens", store.token_count()}, {"maps", maps}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_serve(std::string snapshot, std::string listen, std::string model_path, std::uint64_t seed) {
  snapshot = snapshot.empty() ? env_or("STATEDEX_SNAPSHOT", "") : snapshot;
  listen = listen.empty() ? env_or("STATEDEX_LISTEN", "127.0.0.1:8080") : listen;
  model_path = model_path.empty() ? env_or("STATEDEX_MODEL", "") : model_path;
  if (snapshot.empty()) throw Error("usage", "serve needs --snapshot or STATEDEX_SNAPSHOT");
  const ListenAddress address = parse_listen(listen);

  auto store = std::make_shared<const StateStore>(load_snapshot(snapshot));
  std::shared_ptr<const WinProbModel> model;
  if (!model_path.empty()) {
    model = std::make_shared<const WinProbModel>(WinProbModel::load(model_path));
  } else if (store->round_count() > 0) {
    std::cerr << "training win-probability model (seed " << seed << ")\n";
    try {
      model = std::make_shared<const WinProbModel>(train(store_examples(*store), seed));
    } catch (const Error& e) {
      std::cerr << "warning: no win-probability model: " << e.what() << "\n";
    }
  }
  ApiService service(store, model);
  HttpServer server(service);
  const int port = server.bind(address);
  std::cerr << "listening on " << address.host << ":" << port << std::endl;
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statedex: game-state retrieval over esports replays"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  std::string mesh_dir = "data/meshes";
  std::string snapshot, sketch, out, format = "table", summary_format = "text";

  std::vector<std::string> inputs;
  auto* ingest = app.add_subcommand("ingest", "Parse replay files and write an index snapshot");
  ingest->add_option("inputs", inputs, "Replay files or directories of *.json replays")->required();
  ingest->add_option("--mesh-dir", mesh_dir, "Directory of navigation mesh files")->capture_default_str();
  ingest->add_option("--out", out, "Snapshot file to write")->required();
  ingest->add_option("--format", summary_format, "Summary format")->check(CLI::IsMember({"text", "json"}));

  std::string config_path, synth_snapshot;
  std::uint64_t seed = 1;
  auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic replay corpus");
  synth->add_option("--config", config_path, "Synthetic corpus config (JSON)");
  synth->add_option("--seed", seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", out, "Directory for generated replay files");
  synth->add_option("--snapshot", synth_snapshot, "Also index the corpus into this snapshot");
  synth->add_option("--mesh-dir", mesh_dir, "Directory of navigation mesh files")->capture_default_str();
  synth->add_option("--format", summary_format, "Summary format")->check(CLI::IsMember({"text", "json"}));

  int limit = 0;
  auto* query = app.add_subcommand("query", "Run a sketch file against a snapshot");
  query->add_option("--snapshot", snapshot, "Snapshot file")->required();
  query->add_option("--sketch", sketch, "Sketch file (JSON query document)")->required();
  query->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "json"}))->capture_default_str();
  query->add_option("--limit", limit, "Show at most this many results (0 = all)");

  int max_iterations = TrainOptions{}.max_iterations;
  auto* train_wp = app.add_subcommand("train-wp", "Train the win-probability model on a snapshot");
  train_wp->add_option("--snapshot", snapshot, "Snapshot file")->required();
  train_wp->add_option("--seed", seed, "Training seed")->capture_default_str();
  train_wp->add_option("--out", out, "Model file to write")->required();
  train_wp->add_option("--max-iterations", max_iterations, "Newton iteration budget")->capture_default_str();

  std::string side = "T", resolution = "64", png;
  auto* heat = app.add_subcommand("heatmap", "Export a positional heatmap for a sketch's results");
  heat->add_option("--snapshot", snapshot, "Snapshot file")->required();
  heat->add_option("--sketch", sketch, "Sketch file")->required();
  heat->add_option("--side", side, "Side whose positions are binned")->check(CLI::IsMember({"T", "CT"}))->capture_default_str();
  heat->add_option("--resolution", resolution, "Grid size, N or NXxNY")->capture_default_str();
  heat->add_option("--out", out, "Grid document path (default: stdout)");
  heat->add_option("--png", png, "Also render the grid as a PNG");

  auto* outcomes = app.add_subcommand("outcomes", "Tabulate round outcomes for a sketch's results");
  outcomes->add_option("--snapshot", snapshot, "Snapshot file")->required();
  outcomes->add_option("--sketch", sketch, "Sketch file")->required();

  auto* info = app.add_subcommand("info", "Print snapshot counts");
  info->add_option("--snapshot", snapshot, "Snapshot file")->required();

  std::string listen, model_path;
  auto* serve = app.add_subcommand("serve", "Serve the /v1/ HTTP API");
  serve->add_option("--snapshot", snapshot, "Snapshot file [env STATEDEX_SNAPSHOT]");
  serve->add_option("--listen", listen, "host:port [env STATEDEX_LISTEN, default 127.0.0.1:8080]");
  serve->add_option("--model", model_path, "Win-probability model; trained at startup if absent [env STATEDEX_MODEL]");
  serve->add_option("--seed", seed, "Seed for the startup model")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(inputs, mesh_dir, out, summary_format);
    if (*synth) return cmd_synth(config_path, seed, out, mesh_dir, synth_snapshot, summary_format);
    if (*query) return cmd_query(snapshot, sketch, format, limit);
    if (*train_wp) return cmd_train(snapshot, seed, out, max_iterations);
    if (*heat) return cmd_heatmap(snapshot, sketch, side, resolution, out, png);
    if (*outcomes) return cmd_outcomes(snapshot, sketch);
    if (*info) return cmd_info(snapshot);
    if (*serve) return cmd_serve(snapshot, listen, model_path, seed);
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
