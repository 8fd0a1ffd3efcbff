// Command-line front end. Talks to the library only through neuronalg.h.
#include <glob.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neuronalg/neuronalg.h"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kFatal = 1, kPartial = 2, kUsage = 64 };

const std::set<std::string> kImageExts{".png", ".tif", ".tiff", ".jpg", ".jpeg", ".bmp", ".pgm", ".ppm"};

struct Failure {
  int code;
  std::string message;
};

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

void check(nalg_status s, const std::string& what) {
  if (s != NALG_OK) {
    throw Failure{kFatal, what + ": " + nalg_last_error()};
  }
}

struct ConfigDeleter {
  void operator()(nalg_config* c) const { nalg_config_free(c); }
};
struct ImageDeleter {
  void operator()(nalg_image* i) const { nalg_image_free(i); }
};
struct ResultDeleter {
  void operator()(nalg_result* r) const { nalg_result_free(r); }
};
struct BatchDeleter {
  void operator()(nalg_batch* b) const { nalg_batch_free(b); }
};
struct DatasetDeleter {
  void operator()(nalg_dataset* d) const { nalg_dataset_free(d); }
};
struct ReportDeleter {
  void operator()(nalg_report* r) const { nalg_report_free(r); }
};
using ConfigPtr = std::unique_ptr<nalg_config, ConfigDeleter>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  nalg_string_free(s);
  return out;
}

void print_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) std::cout << line << '\n';
  }
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON config file (overrides NEURONALG_CONFIG)");
  cmd->add_option("--seed", o.seed, "seed for noise and any randomized step");
  cmd->add_option("--jobs", o.jobs, "worker threads, 0 = one per core")->check(CLI::NonNegativeNumber);
}

// Flag wins over the environment; both fall back to built-in defaults.
ConfigPtr resolve_config(const CommonOptions& o) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv("NEURONALG_CONFIG"); env && *env) path = env;
  }
  nalg_config* raw = nullptr;
  if (path.empty()) {
    check(nalg_config_create(&raw), "config");
  } else {
    check(nalg_config_load(path.c_str(), &raw), "config " + path);
  }
  ConfigPtr cfg(raw);
  if (o.seed) check(nalg_config_set_seed(cfg.get(), *o.seed), "seed");
  if (o.jobs) check(nalg_config_set_jobs(cfg.get(), *o.jobs), "jobs");
  return cfg;
}

void write_resolved(const nalg_config* cfg, const fs::path& dir) {
  char* json = nullptr;
  check(nalg_config_to_json(cfg, &json), "config");
  const std::string text = take_string(json);
  fs::create_directories(dir);
  const fs::path p = dir / "resolved_config.json";
  std::ofstream out(p);
  out << text << '\n';
  if (!out) throw Failure{kFatal, "cannot write " + p.string()};
  std::cout << p.string() << '\n';
}

bool has_glob_chars(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

std::vector<std::string> expand_inputs(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const std::string& a : args) {
    if (fs::is_directory(a)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(a)) {
        if (e.is_regular_file() && kImageExts.count(lower_ext(e.path()))) files.push_back(e.path().string());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (has_glob_chars(a)) {
      glob_t g{};
      if (glob(a.c_str(), 0, nullptr, &g) == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
      }
      globfree(&g);
    } else {
      out.push_back(a);
    }
  }
  return out;
}

int cmd_segment(const std::vector<std::string>& inputs, const std::string& out_dir,
                const CommonOptions& common, bool overlays, bool snapshots) {
  const std::vector<std::string> paths = expand_inputs(inputs);
  if (paths.empty()) throw Failure{kFatal, "no inputs"};
  ConfigPtr cfg = resolve_config(common);
  if (snapshots) check(nalg_config_set_snapshots(cfg.get(), 1), "snapshots");
  write_resolved(cfg.get(), out_dir);

  std::vector<const char*> cpaths;
  for (const auto& p : paths) cpaths.push_back(p.c_str());
  nalg_batch* raw = nullptr;
  check(nalg_segment_batch(cpaths.data(), cpaths.size(), cfg.get(), &raw), "segment");
  std::unique_ptr<nalg_batch, BatchDeleter> batch(raw);

  std::size_t failed = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    nalg_status st = NALG_OK;
    const char* msg = nullptr;
    const nalg_result* r = nullptr;
    check(nalg_batch_item(batch.get(), i, &st, &msg, &r), "batch");
    if (r == nullptr) {
      ++failed;
      std::cerr << "error: " << paths[i] << ": " << msg << '\n';
      continue;
    }
    const std::string stem = fs::path(paths[i]).stem().string();
    const fs::path labels = fs::path(out_dir) / (stem + "_labels.png");
    const fs::path mask = fs::path(out_dir) / (stem + "_mask.png");
    try {
      check(nalg_result_write_labels(r, labels.c_str()), "write");
      check(nalg_result_write_binary(r, mask.c_str()), "write");
      std::cout << labels.string() << '\n' << mask.string() << '\n';
      if (overlays) {
        const fs::path ov = fs::path(out_dir) / (stem + "_overlay.png");
        check(nalg_result_write_overlay(r, ov.c_str()), "write");
        std::cout << ov.string() << '\n';
      }
      if (snapshots) {
        char* written = nullptr;
        const fs::path dir = fs::path(out_dir) / (stem + "_stages");
        check(nalg_result_write_snapshots(r, dir.c_str(), &written), "snapshots");
        print_lines(take_string(written));
      }
      nalg_result_info info{};
      nalg_result_get_info(r, &info);
      if (info.empty_foreground) std::cerr << "warning: " << paths[i] << ": empty foreground\n";
      if (info.non_converged_objects > 0) {
        std::cerr << "warning: " << paths[i] << ": " << info.non_converged_objects
                  << " object(s) with non-converged agents\n";
      }
    } catch (const Failure& f) {
      ++failed;
      std::cerr << "error: " << paths[i] << ": " << f.message << '\n';
    }
  }
  if (failed == 0) return kOk;
  return failed == paths.size() ? kFatal : kPartial;
}

std::map<std::string, fs::path> stems_in(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = lower_ext(e.path());
    if (kImageExts.count(ext) || ext == ".txt") {
      auto [it, fresh] = out.emplace(e.path().stem().string(), e.path());
      if (!fresh && ext == ".txt") it->second = e.path();
    }
  }
  return out;
}

int cmd_evaluate(const std::string& pred, const std::string& truth, const std::string& out_csv) {
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
  std::size_t failed = 0;
  if (fs::is_directory(pred) != fs::is_directory(truth)) {
    throw Failure{kUsage, "--pred and --truth must both be files or both be directories"};
  }
  if (fs::is_directory(pred)) {
    const auto p = stems_in(pred);
    const auto t = stems_in(truth);
    for (const auto& [stem, path] : p) {
      auto it = t.find(stem);
      if (it == t.end()) {
        std::cerr << "error: no ground truth for " << path.string() << '\n';
        ++failed;
        continue;
      }
      pairs.push_back({stem, {path, it->second}});
    }
  } else {
    pairs.push_back({fs::path(pred).stem().string(), {pred, truth}});
  }
  if (pairs.empty()) throw Failure{kFatal, "no inputs"};

  std::ostringstream csv;
  csv << "# aggregation: unweighted per-image mean\n";
  csv << "image,tp,fp,fn,tn,iou,f1,accuracy,sensitivity,specificity\n";
  double sums[5] = {0, 0, 0, 0, 0};
  std::size_t ok = 0;
  for (const auto& [stem, files] : pairs) {
    nalg_metrics m{};
    if (nalg_evaluate_masks(files.first.c_str(), files.second.c_str(), &m) != NALG_OK) {
      std::cerr << "error: " << stem << ": " << nalg_last_error() << '\n';
      ++failed;
      continue;
    }
    char row[512];
    std::snprintf(row, sizeof row, "%s,%llu,%llu,%llu,%llu,%.6f,%.6f,%.6f,%.6f,%.6f\n", stem.c_str(),
                  static_cast<unsigned long long>(m.tp), static_cast<unsigned long long>(m.fp),
                  static_cast<unsigned long long>(m.fn), static_cast<unsigned long long>(m.tn), m.iou,
                  m.f1, m.accuracy, m.sensitivity, m.specificity);
    csv << row;
    const double v[5] = {m.iou, m.f1, m.accuracy, m.sensitivity, m.specificity};
    for (int k = 0; k < 5; ++k) sums[k] += v[k];
    ++ok;
  }
  if (ok > 0) {
    char row[256];
    const double n = static_cast<double>(ok);
    std::snprintf(row, sizeof row, "mean,,,,,%.6f,%.6f,%.6f,%.6f,%.6f\n", sums[0] / n, sums[1] / n,
                  sums[2] / n, sums[3] / n, sums[4] / n);
    csv << row;
  }
  if (out_csv.empty()) {
    std::cout << csv.str();
  } else {
    if (fs::path(out_csv).has_parent_path()) fs::create_directories(fs::path(out_csv).parent_path());
    std::ofstream out(out_csv);
    out << csv.str();
    if (!out) throw Failure{kFatal, "cannot write " + out_csv};
    std::cout << out_csv << '\n';
  }
  if (ok == 0) return kFatal;
  return failed == 0 ? kOk : kPartial;
}

int cmd_sweep(const std::string& kind, const std::string& root, const std::vector<double>& levels,
              const std::string& out_dir, const CommonOptions& common, bool overlays) {
  ConfigPtr cfg = resolve_config(common);
  write_resolved(cfg.get(), out_dir);
  nalg_dataset* raw_ds = nullptr;
  check(nalg_dataset_load(root.c_str(), kind.c_str(), &raw_ds), "dataset");
  std::unique_ptr<nalg_dataset, DatasetDeleter> ds(raw_ds);
  for (std::size_t i = 0; i < nalg_dataset_warning_count(ds.get()); ++i) {
    std::cerr << "warning: " << nalg_dataset_warning(ds.get(), i) << '\n';
  }
  const std::size_t issues = nalg_dataset_issue_count(ds.get());
  for (std::size_t i = 0; i < issues; ++i) {
    const char* path = nullptr;
    const char* msg = nullptr;
    nalg_dataset_issue(ds.get(), i, &path, nullptr, &msg);
    std::cerr << "error: skipped " << path << ": " << msg << '\n';
  }
  std::uint64_t seed = 0;
  check(nalg_config_get_seed(cfg.get(), &seed), "seed");
  const std::string ov = (fs::path(out_dir) / "overlays").string();
  nalg_report* raw_rep = nullptr;
  check(nalg_sweep_run(ds.get(), levels.data(), levels.size(), cfg.get(), seed,
                       overlays ? ov.c_str() : nullptr, &raw_rep),
        "sweep");
  std::unique_ptr<nalg_report, ReportDeleter> rep(raw_rep);
  char* written = nullptr;
  check(nalg_report_write(rep.get(), out_dir.c_str(), &written), "report");
  print_lines(take_string(written));
  return issues == 0 ? kOk : kPartial;
}

int cmd_inspect(const std::string& image, int stage, const std::string& out_dir,
                const CommonOptions& common) {
  ConfigPtr cfg = resolve_config(common);
  write_resolved(cfg.get(), out_dir);
  nalg_image* raw = nullptr;
  check(nalg_image_load(image.c_str(), &raw), image);
  std::unique_ptr<nalg_image, ImageDeleter> img(raw);
  char* written = nullptr;
  check(nalg_inspect_stage(img.get(), cfg.get(), stage, out_dir.c_str(), &written), "inspect");
  print_lines(take_string(written));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell segmentation with spiking neuronal agents"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nalg_version()));

  CommonOptions seg_common;
  std::vector<std::string> seg_inputs;
  std::string seg_out;
  bool seg_overlays = false;
  bool seg_snapshots = false;
  CLI::App* seg = app.add_subcommand("segment", "segment images into label and mask PNGs");
  seg->add_option("inputs", seg_inputs, "image files, directories or glob patterns")->required();
  seg->add_option("--out", seg_out, "output directory")->required();
  seg->add_flag("--overlays", seg_overlays, "also write boundary overlays");
  seg->add_flag("--snapshots", seg_snapshots, "also write every intermediate stage");
  add_common(seg, seg_common);

  std::string ev_pred, ev_truth, ev_out;
  CLI::App* ev = app.add_subcommand("evaluate", "score predicted masks against ground truth");
  ev->add_option("--pred", ev_pred, "predicted mask/label image or directory")->required();
  ev->add_option("--truth", ev_truth, "ground-truth image/.txt file or directory")->required();
  ev->add_option("--out", ev_out, "CSV file (default: stdout)");

  CommonOptions sw_common;
  std::string sw_kind, sw_root, sw_out;
  std::vector<double> sw_levels{100.0, 40.1, 32.7, 26.9, 21.1, 15.7};
  bool sw_overlays = false;
  CLI::App* sw = app.add_subcommand("sweep", "PSNR noise sweep over a dataset");
  sw->add_option("--dataset", sw_kind, "neuroblastoma, nucleusseg or isbi2009")
      ->required()
      ->check(CLI::IsMember({"neuroblastoma", "nucleusseg", "isbi2009"}));
  sw->add_option("--root", sw_root, "dataset root with images/ and ground_truth/")->required();
  sw->add_option("--levels", sw_levels, "comma-separated PSNR levels in dB")
      ->delimiter(',')
      ->check(CLI::Range(1e-9, 100.0));
  sw->add_option("--out", sw_out, "output directory")->required();
  sw->add_flag("--overlays", sw_overlays, "write one overlay per image and level");
  add_common(sw, sw_common);

  CommonOptions in_common;
  std::string in_image, in_out;
  int in_stage = 0;
  CLI::App* in = app.add_subcommand("inspect", "write the output of one pipeline stage");
  in->add_option("image", in_image, "input image")->required();
  in->add_option("--stage", in_stage, "stage 1..6")->required()->check(CLI::Range(1, 6));
  in->add_option("--out", in_out, "output directory")->required();
  add_common(in, in_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (seg->parsed()) return cmd_segment(seg_inputs, seg_out, seg_common, seg_overlays, seg_snapshots);
    if (ev->parsed()) return cmd_evaluate(ev_pred, ev_truth, ev_out);
    if (sw->parsed()) return cmd_sweep(sw_kind, sw_root, sw_levels, sw_out, sw_common, sw_overlays);
    if (in->parsed()) return cmd_inspect(in_image, in_stage, in_out, in_common);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFatal;
  }
  return kUsage;
}
