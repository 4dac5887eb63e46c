// g4dc command line tool. Talks to the codec exclusively through the C API
// in g4dc/g4dc.h; exit codes: 0 ok, 2 validation, 3 format/corruption, 4 io.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "g4dc/g4dc.h"

namespace {

using json = nlohmann::json;

struct CliError {
  int code;
  std::string message;
};

void check(g4dc_status st) {
  if (st != G4DC_OK) throw CliError{st == G4DC_ERR_INTERNAL ? 1 : st, g4dc_last_error()};
}

std::string takeString(char* s) {
  std::string out = s ? s : "";
  g4dc_string_free(s);
  return out;
}

struct SceneHandle {
  g4dc_scene* p = nullptr;
  ~SceneHandle() { g4dc_scene_free(p); }
};
struct ContainerHandle {
  g4dc_container* p = nullptr;
  ~ContainerHandle() { g4dc_container_free(p); }
};

// Encoder options shared by the encode/sweep/ablate commands. Precedence:
// preset defaults < config file < command line flags.
struct EncodeOptions {
  int level = 3;
  uint64_t seed = 42;
  int waveletLevels = -1;  // -1: keep preset value
  bool noWavelet = false;
  double lambdaR = -1;
  long codebookSize = -1;
  std::string configPath;
  std::map<std::string, std::string> extra;  // raw config-file pairs

  void addFlags(CLI::App* cmd) {
    cmd->add_option("--level", level, "compression level 1..6")->check(CLI::Range(1, 6));
    cmd->add_option("--seed", seed, "deterministic pipeline seed");
    cmd->add_option("--wavelet-levels", waveletLevels, "trajectory transform depth (0..8)");
    cmd->add_flag("--no-wavelet", noWavelet, "store raw keyframe positions");
    cmd->add_option("--lambda-r", lambdaR, "rate loss weight");
    cmd->add_option("--codebook-size", codebookSize, "codewords per attribute group");
    cmd->add_option("--config", configPath, "key = value config file");
  }

  // Lines of "key = value"; '#' starts a comment.
  static std::map<std::string, std::string> parseConfigFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError{4, "cannot open config file " + path};
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r");
        size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (!key.empty()) kv[key] = value;
    }
    return kv;
  }

  std::string toConfigJson() const {
    json j;
    j["level"] = level;
    if (!configPath.empty()) {
      for (const auto& [key, value] : parseConfigFile(configPath)) {
        try {
          j[key] = json::parse(value);  // numbers / bools
        } catch (const json::exception&) {
          j[key] = value;  // plain strings
        }
      }
    }
    j["seed"] = seed;
    if (noWavelet)
      j["wavelet_levels"] = 0;
    else if (waveletLevels >= 0)
      j["wavelet_levels"] = waveletLevels;
    if (lambdaR >= 0) j["lambda_r"] = lambdaR;
    if (codebookSize >= 0) j["codebook_size"] = codebookSize;
    return j.dump();
  }
};

uint64_t fileSize(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw CliError{4, "cannot open " + path};
  return static_cast<uint64_t>(in.tellg());
}

void writeText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CliError{4, "cannot open " + path + " for writing"};
  out << text;
  if (!out) throw CliError{4, "cannot write " + path};
}

const char* kSectionOrder[] = {"header",    "gaussian_mask", "sh_mask",
                               "sort_idx",  "indexes",       "f_masked",
                               "mu_disp",   "mu_0",          "codebooks",
                               "logits",    "opacity_centers", "beta_var",
                               "base_opacities"};

std::string reportTable(const json& rep) {
  std::ostringstream out;
  uint64_t total = rep["total_bytes"].get<uint64_t>();
  char line[128];
  std::snprintf(line, sizeof(line), "%-16s %12s %8s\n", "section", "bytes", "percent");
  out << line;
  for (const char* name : kSectionOrder) {
    uint64_t b = rep["sections"][name].get<uint64_t>();
    std::snprintf(line, sizeof(line), "%-16s %12" PRIu64 " %7.2f%%\n", name, b,
                  total ? 100.0 * b / total : 0.0);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-16s %12" PRIu64 " %7.2f%%\n", "total", total, 100.0);
  out << line;
  uint64_t s0 = rep["static_original"].get<uint64_t>(), s1 = rep["static_kept"].get<uint64_t>();
  uint64_t d0 = rep["dynamic_original"].get<uint64_t>(),
           d1 = rep["dynamic_kept"].get<uint64_t>();
  std::snprintf(line, sizeof(line),
                "points: static %" PRIu64 " -> %" PRIu64 " (pruned %" PRIu64
                "), dynamic %" PRIu64 " -> %" PRIu64 " (pruned %" PRIu64 ")\n",
                s0, s1, s0 - s1, d0, d1, d0 - d1);
  out << line;
  return out.str();
}

std::string metricNumber(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v.get<double>());
  return buf;
}

struct SweepRow {
  int level;
  uint64_t size;
  json report;
  json metrics;
};

std::string sweepCsvHeader() {
  std::string h = "# g4dc sweep csv v1\nlevel,size_bytes";
  for (const char* name : kSectionOrder) h += std::string(",") + name + "_bytes";
  h += ",psnr_db,ssim,traj_psnr_db,static_kept,static_pruned,dynamic_kept,dynamic_pruned\n";
  return h;
}

std::string sweepCsvRow(const SweepRow& r) {
  std::string row = std::to_string(r.level) + "," + std::to_string(r.size);
  for (const char* name : kSectionOrder)
    row += "," + std::to_string(r.report["sections"][name].get<uint64_t>());
  uint64_t s0 = r.report["static_original"].get<uint64_t>(),
           s1 = r.report["static_kept"].get<uint64_t>();
  uint64_t d0 = r.report["dynamic_original"].get<uint64_t>(),
           d1 = r.report["dynamic_kept"].get<uint64_t>();
  row += "," + metricNumber(r.metrics["psnr_db"]) + "," + metricNumber(r.metrics["ssim"]) +
         "," + metricNumber(r.metrics["traj_psnr_db"]);
  row += "," + std::to_string(s1) + "," + std::to_string(s0 - s1) + "," +
         std::to_string(d1) + "," + std::to_string(d0 - d1) + "\n";
  return row;
}

SweepRow runOnePoint(const SceneHandle& scene, int level, const std::string& configJson,
                     uint64_t seed, const std::string& dumpPath = "") {
  ContainerHandle container;
  check(g4dc_encode(scene.p, configJson.c_str(), &container.p));
  if (!dumpPath.empty()) check(g4dc_container_write(container.p, dumpPath.c_str()));
  char* rep = nullptr;
  check(g4dc_size_report(container.p, &rep));
  char* met = nullptr;
  check(g4dc_probe_metrics(scene.p, container.p, seed, 64, &met));
  SweepRow row;
  row.level = level;
  row.report = json::parse(takeString(rep));
  row.metrics = json::parse(takeString(met));
  row.size = row.report["total_bytes"].get<uint64_t>();
  return row;
}

// --- commands ---------------------------------------------------------------

int cmdGen(const std::string& outPath, const std::string& preset, uint64_t seed,
           long statics, long dynamics, long frames, long interval, int shDegree) {
  json cfg = json::object();
  if (!preset.empty()) cfg["preset"] = preset;
  if (statics >= 0) cfg["statics"] = statics;
  if (dynamics >= 0) cfg["dynamics"] = dynamics;
  if (frames >= 0) cfg["frames"] = frames;
  if (interval >= 0) cfg["interval"] = interval;
  if (shDegree >= 0) cfg["sh_degree"] = shDegree;
  SceneHandle scene;
  check(g4dc_scene_generate(cfg.dump().c_str(), seed, &scene.p));
  check(g4dc_scene_save(scene.p, outPath.c_str()));
  char* info = nullptr;
  check(g4dc_scene_info(scene.p, &info));
  std::printf("wrote %s: %s\n", outPath.c_str(), takeString(info).c_str());
  return 0;
}

int cmdEncode(const std::string& inPath, const std::string& outPath, const EncodeOptions& opt,
              const std::string& csvPath) {
  SceneHandle scene;
  check(g4dc_scene_load(inPath.c_str(), &scene.p));
  ContainerHandle container;
  std::string cfg = opt.toConfigJson();
  check(g4dc_encode(scene.p, cfg.c_str(), &container.p));
  check(g4dc_container_write(container.p, outPath.c_str()));
  char* rep = nullptr;
  check(g4dc_size_report(container.p, &rep));
  json report = json::parse(takeString(rep));
  std::printf("%s", reportTable(report).c_str());
  std::printf("raw scene: %" PRIu64 " bytes, container: %" PRIu64 " bytes (%.2fx)\n",
              fileSize(inPath), fileSize(outPath),
              static_cast<double>(fileSize(inPath)) / fileSize(outPath));
  if (!csvPath.empty()) {
    std::string csv = "# g4dc size csv v1\nsection,bytes\n";
    for (const char* name : kSectionOrder)
      csv += std::string(name) + "," +
             std::to_string(report["sections"][name].get<uint64_t>()) + "\n";
    writeText(csvPath, csv);
  }
  return 0;
}

int cmdDecode(const std::string& inPath, const std::string& outPath) {
  ContainerHandle container;
  check(g4dc_container_read(inPath.c_str(), &container.p));
  SceneHandle scene;
  check(g4dc_decode(container.p, &scene.p));
  check(g4dc_scene_save(scene.p, outPath.c_str()));
  std::printf("wrote %s\n", outPath.c_str());
  return 0;
}

int cmdInspect(const std::string& inPath, bool asJson) {
  ContainerHandle container;
  check(g4dc_container_read(inPath.c_str(), &container.p));
  char* rep = nullptr;
  check(g4dc_size_report(container.p, &rep));
  std::string text = takeString(rep);
  if (asJson)
    std::printf("%s\n", text.c_str());
  else
    std::printf("%s", reportTable(json::parse(text)).c_str());
  return 0;
}

int cmdSweep(const std::string& inPath, const EncodeOptions& opt,
             const std::vector<int>& levels, const std::string& csvPath,
             const std::string& dumpDir) {
  SceneHandle scene;
  check(g4dc_scene_load(inPath.c_str(), &scene.p));
  if (!dumpDir.empty()) std::filesystem::create_directories(dumpDir);
  std::string csv = sweepCsvHeader();
  for (int level : levels) {
    EncodeOptions o = opt;
    o.level = level;
    std::string dumpPath =
        dumpDir.empty() ? "" : dumpDir + "/level_" + std::to_string(level) + ".g4c";
    SweepRow row = runOnePoint(scene, level, o.toConfigJson(), opt.seed, dumpPath);
    csv += sweepCsvRow(row);
    std::printf("level %d: %" PRIu64 " bytes, psnr %s dB\n", level, row.size,
                metricNumber(row.metrics["psnr_db"]).c_str());
  }
  if (!csvPath.empty()) writeText(csvPath, csv);
  return 0;
}

int cmdAblateOpacity(const std::string& inPath, const EncodeOptions& opt,
                     const std::string& csvPath) {
  SceneHandle scene;
  check(g4dc_scene_load(inPath.c_str(), &scene.p));
  struct Row {
    const char* name;
    bool as, ad, centers, widths;
  };
  const Row rows[] = {{"none", false, false, false, false},
                      {"alpha_s", true, false, false, false},
                      {"alpha_s+alpha_d", true, true, false, false},
                      {"+centers", true, true, true, false},
                      {"+variances", true, true, true, true}};
  std::string csv =
      "# g4dc opacity ablation csv v1\npolicy,size_bytes,psnr_db,ssim,traj_psnr_db\n";
  for (const Row& r : rows) {
    json cfg = json::parse(opt.toConfigJson());
    cfg["quantize_alpha_static"] = r.as;
    cfg["quantize_alpha_dynamic"] = r.ad;
    cfg["quantize_window_centers"] = r.centers;
    cfg["quantize_edge_widths"] = r.widths;
    SweepRow row = runOnePoint(scene, opt.level, cfg.dump(), opt.seed);
    csv += std::string(r.name) + "," + std::to_string(row.size) + "," +
           metricNumber(row.metrics["psnr_db"]) + "," + metricNumber(row.metrics["ssim"]) +
           "," + metricNumber(row.metrics["traj_psnr_db"]) + "\n";
    std::printf("%-16s %" PRIu64 " bytes, psnr %s dB\n", r.name, row.size,
                metricNumber(row.metrics["psnr_db"]).c_str());
  }
  if (!csvPath.empty()) writeText(csvPath, csv);
  return 0;
}

int cmdAblateWavelet(const std::string& inPath, const EncodeOptions& opt,
                     const std::string& csvPath) {
  SceneHandle scene;
  check(g4dc_scene_load(inPath.c_str(), &scene.p));
  char* infoRaw = nullptr;
  check(g4dc_scene_info(scene.p, &infoRaw));
  uint64_t keyframes = json::parse(takeString(infoRaw))["keyframes"].get<uint64_t>();
  auto storedRows = [&](int depth) {  // ceil over the padded length
    uint64_t block = 1ull << depth;
    return (keyframes + block - 1) / block;
  };

  std::string csv =
      "# g4dc wavelet ablation csv v1\n"
      "depth,size_bytes,f_masked_bytes,psnr_db,ssim,traj_psnr_db\n";
  uint64_t prevFm = 0;
  uint64_t prevKept = 0;
  for (int depth = 1; depth <= 3; ++depth) {
    EncodeOptions o = opt;
    o.waveletLevels = depth;
    o.noWavelet = false;
    SweepRow row = runOnePoint(scene, opt.level, o.toConfigJson(), opt.seed);
    uint64_t fm = row.report["sections"]["f_masked"].get<uint64_t>();
    uint64_t kept = row.report["dynamic_kept"].get<uint64_t>();
    // Fixed-width coefficients: the payload tracks the retained row count
    // exactly whenever both depths kept the same points.
    if (depth > 1 && prevKept == kept &&
        fm * storedRows(depth - 1) != prevFm * storedRows(depth))
      throw CliError{1, "trajectory payload off the retained-fraction ratio at depth " +
                            std::to_string(depth)};
    prevFm = fm;
    prevKept = kept;
    csv += std::to_string(depth) + "," + std::to_string(row.size) + "," +
           std::to_string(fm) + "," + metricNumber(row.metrics["psnr_db"]) + "," +
           metricNumber(row.metrics["ssim"]) + "," +
           metricNumber(row.metrics["traj_psnr_db"]) + "\n";
    std::printf("depth %d: %" PRIu64 " bytes (f_masked %" PRIu64 "), psnr %s dB\n", depth,
                row.size, fm, metricNumber(row.metrics["psnr_db"]).c_str());
  }
  if (!csvPath.empty()) writeText(csvPath, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"g4dc: rate-distortion optimized codec for dynamic Gaussian scenes"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic scene (.g4s)");
  std::string genOut, genPreset;
  uint64_t genSeed = 42;
  long genStatics = -1, genDynamics = -1, genFrames = -1, genInterval = -1;
  int genSh = -1;
  gen->add_option("output", genOut, "output .g4s path")->required();
  gen->add_option("--preset", genPreset, "standard | orbits | events");
  gen->add_option("--seed", genSeed, "generator seed");
  gen->add_option("--statics", genStatics, "static Gaussian count");
  gen->add_option("--dynamics", genDynamics, "dynamic Gaussian count");
  gen->add_option("--frames", genFrames, "frame count");
  gen->add_option("--interval", genInterval, "keyframe interval");
  gen->add_option("--sh-degree", genSh, "max SH degree 0..3");

  // encode
  auto* enc = app.add_subcommand("encode", "compress a scene into a .g4c container");
  std::string encIn, encOut, encCsv;
  EncodeOptions encOpt;
  enc->add_option("input", encIn, "input .g4s scene")->required();
  enc->add_option("output", encOut, "output .g4c container")->required();
  encOpt.addFlags(enc);
  enc->add_option("--csv", encCsv, "write the size table as CSV");

  // decode
  auto* dec = app.add_subcommand("decode", "decompress a container back to a scene");
  std::string decIn, decOut;
  dec->add_option("input", decIn, "input .g4c container")->required();
  dec->add_option("output", decOut, "output .g4s scene")->required();

  // inspect
  auto* ins = app.add_subcommand("inspect", "print the per-section size report");
  std::string insIn;
  bool insJson = false;
  ins->add_option("input", insIn, "input .g4c container")->required();
  ins->add_flag("--json", insJson, "emit JSON instead of a table");

  // sweep
  auto* swp = app.add_subcommand("sweep", "encode at several levels and report RD points");
  std::string swpIn, swpCsv, swpDump, swpLevels = "1,2,3,4,5,6";
  EncodeOptions swpOpt;
  swp->add_option("input", swpIn, "input .g4s scene")->required();
  swpOpt.addFlags(swp);
  swp->add_option("--levels", swpLevels, "comma-separated levels (default 1,2,3,4,5,6)");
  swp->add_option("--csv", swpCsv, "output CSV path");
  swp->add_option("--dump-dir", swpDump, "also write each level's container here");

  // ablate-opacity
  auto* abo = app.add_subcommand("ablate-opacity", "quantization policy ladder");
  std::string aboIn, aboCsv;
  EncodeOptions aboOpt;
  abo->add_option("input", aboIn, "input .g4s scene")->required();
  aboOpt.addFlags(abo);
  abo->add_option("--csv", aboCsv, "output CSV path");

  // ablate-wavelet
  auto* abw = app.add_subcommand("ablate-wavelet", "decomposition depth ladder (1..3)");
  std::string abwIn, abwCsv;
  EncodeOptions abwOpt;
  abw->add_option("input", abwIn, "input .g4s scene")->required();
  abwOpt.addFlags(abw);
  abw->add_option("--csv", abwCsv, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmdGen(genOut, genPreset, genSeed, genStatics, genDynamics, genFrames,
                    genInterval, genSh);
    if (enc->parsed()) return cmdEncode(encIn, encOut, encOpt, encCsv);
    if (dec->parsed()) return cmdDecode(decIn, decOut);
    if (ins->parsed()) return cmdInspect(insIn, insJson);
    if (swp->parsed()) {
      std::vector<int> levels;
      std::stringstream ss(swpLevels);
      std::string item;
      while (std::getline(ss, item, ',')) {
        int lv = std::stoi(item);
        if (lv < 1 || lv > 6) throw CliError{2, "levels must be in 1..6"};
        levels.push_back(lv);
      }
      if (levels.empty()) throw CliError{2, "no levels given"};
      return cmdSweep(swpIn, swpOpt, levels, swpCsv, swpDump);
    }
    if (abo->parsed()) return cmdAblateOpacity(aboIn, aboOpt, aboCsv);
    if (abw->parsed()) return cmdAblateWavelet(abwIn, abwOpt, abwCsv);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
