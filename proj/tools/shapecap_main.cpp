// Command-line front end: dataset generation, world preview, bias audit,
// prediction scoring, caption parsing and config checking.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "shapecap/shapecap.hpp"

namespace fs = std::filesystem;
using namespace shapecap;

namespace {

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(hw == 0 ? 1 : (hw > 8 ? 8 : hw));
}

DatasetConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return DatasetConfig{};
  return load_config_file(path);
}

fs::path resolve_out_dir(const std::string& out) {
  if (!out.empty()) return out;
  if (const char* env = std::getenv("SHAPECAP_OUT")) return env;
  throw ConfigError("no output directory: pass --out or set SHAPECAP_OUT");
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// Tile images left to right, top to bottom, with a thin separator.
Image compose_grid(const std::vector<Image>& tiles, int columns) {
  const int gap = 2;
  const int rows =
      (static_cast<int>(tiles.size()) + columns - 1) / columns;
  const int tw = tiles.front().width;
  const int th = tiles.front().height;
  Image grid;
  grid.width = columns * tw + (columns - 1) * gap;
  grid.height = rows * th + (rows - 1) * gap;
  grid.pixels.assign(static_cast<std::size_t>(grid.width) *
                         static_cast<std::size_t>(grid.height) * 3,
                     40);  // dim separator background
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const int cx = (static_cast<int>(i) % columns) * (tw + gap);
    const int cy = (static_cast<int>(i) / columns) * (th + gap);
    for (int y = 0; y < th; ++y) {
      auto* dst = grid.pixels.data() +
                  3 * (static_cast<std::size_t>(cy + y) *
                           static_cast<std::size_t>(grid.width) +
                       static_cast<std::size_t>(cx));
      const std::uint8_t* src = tiles[i].at(0, y);
      std::copy(src, src + static_cast<std::size_t>(tw) * 3, dst);
    }
  }
  return grid;
}

int run_generate(const std::string& config_path, const std::string& out,
                 std::optional<std::uint64_t> seed, int jobs, bool png) {
  DatasetConfig config = load_config_or_default(config_path);
  if (seed) config.master_seed = *seed;
  const fs::path out_dir = resolve_out_dir(out);
  GenerateOptions options;
  options.jobs = jobs;
  const DatasetSummary summary = generate_dataset(config, out_dir, options);
  for (const auto& [split, n] : summary.instances)
    std::cout << to_string(split) << ": " << n << " instances, "
              << summary.true_labels.at(split) << " true\n";
  if (png) {
    for (const auto& [split, n] : summary.instances) {
      (void)n;
      for (const Instance& inst :
           load_split_file(out_dir / (std::string(to_string(split)) +
                                      ".jsonl"))) {
        const Image img = rasterize(inst.world, config.image.width,
                                    config.image.height,
                                    config.image.supersample);
        fs::path png_path = out_dir / inst.image_ref;
        png_path.replace_extension(".png");
        write_bytes(png_path, encode_png(img));
      }
    }
  }
  std::cout << "wrote " << out_dir.string() << "\n";
  return 0;
}

int run_preview(const std::string& config_path, int n, const std::string& out,
                std::optional<std::uint64_t> seed, bool png) {
  DatasetConfig config = load_config_or_default(config_path);
  if (seed) config.master_seed = *seed;
  if (auto errs = config.validation_errors(); !errs.empty())
    throw ConfigError("invalid config: " + errs.front());

  const auto setup = detail::split_setup(config, Split::train);
  std::vector<Image> tiles;
  for (int i = 0; i < n; ++i) {
    const Instance inst =
        generate_instance(config, setup, Split::train, i);
    tiles.push_back(rasterize(inst.world, config.image.width,
                              config.image.height, config.image.supersample));
    std::cout << i << ": [" << (inst.label ? "true" : "false") << "] ("
              << to_string(inst.kind) << ") " << inst.caption << "\n";
  }
  int columns = 1;
  while (columns * columns < n) ++columns;
  const Image grid = compose_grid(tiles, columns);
  const fs::path path = out.empty() ? fs::path("preview.ppm") : fs::path(out);
  if (png || path.extension() == ".png")
    write_bytes(path, encode_png(grid));
  else
    write_bytes(path, encode_ppm(grid));
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int run_audit(const std::string& dir, int folds, const std::string& json_out) {
  const AuditReport report = audit_report(fs::path(dir), folds);
  std::cout << format_audit_report(report);
  const fs::path json_path =
      json_out.empty() ? fs::path(dir) / "audit.json" : fs::path(json_out);
  std::ofstream out(json_path);
  out << audit_report_to_json(report).dump(2) << "\n";
  std::cout << "wrote " << json_path.string() << "\n";
  if (report.holdout && !report.holdout->ok()) return 1;
  return 0;
}

int run_score(const std::string& dir, const std::string& predictions_path,
              const std::string& split_name, const std::string& json_out) {
  std::vector<Instance> records;
  if (split_name.empty()) {
    records = load_dataset(dir);
  } else {
    const auto split = split_from_string(split_name);
    if (!split) throw ConfigError("unknown split '" + split_name + "'");
    records = load_split_file(fs::path(dir) / (split_name + ".jsonl"));
  }
  const auto predictions = parse_predictions_file(predictions_path);
  const ScoreReport report = score_predictions(records, predictions);
  std::cout << format_score_report(report);
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << score_report_to_json(report).dump(2) << "\n";
    std::cout << "wrote " << json_out << "\n";
  }
  return 0;
}

int run_parse(const std::string& caption) {
  const CaptionAst ast = parse_caption(caption);
  std::cout << ast_to_json(ast).dump(2) << "\n";
  return 0;
}

int run_check_config(const std::string& config_path) {
  const DatasetConfig config = load_config_file(config_path);
  if (const auto errs = config.validation_errors(); !errs.empty()) {
    for (const auto& e : errs) std::cerr << "config error: " << e << "\n";
    return 1;
  }
  std::cout << config_to_json(config).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "shapecap: abstract shape scenes with caption agreement labels"};
  app.require_subcommand(1);

  std::string config_path, out, dir, predictions, caption, split_name,
      json_out;
  std::optional<std::uint64_t> seed;
  int jobs = default_jobs();
  int folds = 5;
  int preview_n = 9;
  bool png = false;

  auto* generate = app.add_subcommand("generate", "generate a dataset");
  generate->add_option("--config", config_path, "config file (JSON)");
  generate->add_option("--out", out, "output directory (or $SHAPECAP_OUT)");
  generate->add_option("--seed", seed, "override the config's master seed");
  generate->add_option("--jobs", jobs, "worker threads (output-invariant)");
  generate->add_flag("--png", png, "also write PNG images");

  auto* preview = app.add_subcommand(
      "preview", "render a contact sheet of sampled worlds with captions");
  preview->add_option("--config", config_path, "config file (JSON)");
  preview->add_option("-n", preview_n, "number of worlds");
  preview->add_option("--out", out, "output image path (.ppm or .png)");
  preview->add_option("--seed", seed, "override the config's master seed");
  preview->add_flag("--png", png, "write PNG instead of PPM");

  auto* audit = app.add_subcommand("audit", "bias audit of a dataset");
  audit->add_option("dir", dir, "dataset directory")->required();
  audit->add_option("--folds", folds, "cross-validation folds");
  audit->add_option("--json", json_out, "where to write the JSON report");

  auto* score =
      app.add_subcommand("score", "score a predictions file against gold");
  score->add_option("dir", dir, "dataset directory")->required();
  score->add_option("predictions", predictions, "file of '{id} {0|1}' lines")
      ->required();
  score->add_option("--split", split_name, "restrict to one split");
  score->add_option("--json", json_out, "also write a JSON report");

  auto* parse = app.add_subcommand("parse", "parse a caption to its AST");
  parse->add_option("caption", caption, "caption text")->required();

  auto* check = app.add_subcommand("check-config",
                                   "validate and echo a resolved config");
  check->add_option("--config", config_path, "config file (JSON)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed())
      return run_generate(config_path, out, seed, jobs, png);
    if (preview->parsed())
      return run_preview(config_path, preview_n, out, seed, png);
    if (audit->parsed()) return run_audit(dir, folds, json_out);
    if (score->parsed())
      return run_score(dir, predictions, split_name, json_out);
    if (parse->parsed()) return run_parse(caption);
    if (check->parsed()) return run_check_config(config_path);
  } catch (const ParseFailure& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
