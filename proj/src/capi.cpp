#include "g4dc/g4dc.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>

#include <json.hpp>

#include "error.hpp"
#include "pipeline.hpp"
#include "render.hpp"
#include "scene_io.hpp"
#include "synth.hpp"

using namespace g4dc;

struct g4dc_scene {
  GaussianScene scene;
};
struct g4dc_container {
  CompressedContainer container;
};

namespace {

thread_local std::string tlsError;

g4dc_status fail(g4dc_status code, const char* what) {
  tlsError = what ? what : "unknown error";
  return code;
}

template <typename Fn>
g4dc_status guarded(Fn&& fn) {
  try {
    fn();
    return G4DC_OK;
  } catch (const ValidationError& e) {
    return fail(G4DC_ERR_VALIDATION, e.what());
  } catch (const FormatError& e) {
    return fail(G4DC_ERR_FORMAT, e.what());
  } catch (const IoError& e) {
    return fail(G4DC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(G4DC_ERR_INTERNAL, e.what());
  }
}

char* dupString(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

SynthConfig synthConfigFromJson(const char* text) {
  SynthConfig cfg;
  if (!text || !*text) return cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scene config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("scene config must be a JSON object");
  if (j.contains("preset")) {
    std::string p = j["preset"].get<std::string>();
    if (p == "standard") {
      cfg = SynthConfig{};
    } else if (p == "orbits") {
      cfg.staticCount = 300;
      cfg.dynamicCount = 600;
      cfg.clutterFraction = 0.3;
      cfg.eventFraction = 0.0;
      cfg.maxOrbitCycles = 0.02;
    } else if (p == "events") {
      cfg.staticCount = 400;
      cfg.dynamicCount = 300;
      cfg.clutterFraction = 0.3;
      cfg.eventFraction = 1.0;
    } else {
      throw ValidationError("scene config: unknown preset '" + p + "'");
    }
  }
  try {
    for (auto& [key, value] : j.items()) {
      if (key == "preset") {
      } else if (key == "statics") {
        cfg.staticCount = value.get<uint32_t>();
      } else if (key == "dynamics") {
        cfg.dynamicCount = value.get<uint32_t>();
      } else if (key == "frames") {
        cfg.frames = value.get<uint32_t>();
      } else if (key == "interval") {
        cfg.keyframeInterval = value.get<uint32_t>();
      } else if (key == "sh_degree") {
        cfg.shDegree = value.get<int>();
      } else if (key == "clutter_fraction") {
        cfg.clutterFraction = value.get<double>();
      } else if (key == "event_fraction") {
        cfg.eventFraction = value.get<double>();
      } else if (key == "max_orbit_cycles") {
        cfg.maxOrbitCycles = value.get<double>();
      } else {
        throw ValidationError("scene config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scene config: ") + e.what());
  }
  return cfg;
}

std::string jsonNumber(double v) {
  if (std::isinf(v)) return "\"inf\"";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

extern "C" {

uint32_t g4dc_version(void) { return 1; }

const char* g4dc_last_error(void) { return tlsError.c_str(); }

void g4dc_string_free(char* s) { delete[] s; }

g4dc_status g4dc_scene_load(const char* path, g4dc_scene** out) {
  if (!path || !out) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] { *out = new g4dc_scene{readSceneFile(path)}; });
}

g4dc_status g4dc_scene_save(const g4dc_scene* scene, const char* path) {
  if (!scene || !path) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] { writeSceneFile(scene->scene, path); });
}

g4dc_status g4dc_scene_generate(const char* config_json, uint64_t seed, g4dc_scene** out) {
  if (!out) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] {
    SynthConfig cfg = synthConfigFromJson(config_json);
    *out = new g4dc_scene{generateSyntheticScene(cfg, seed)};
  });
}

g4dc_status g4dc_scene_info(const g4dc_scene* scene, char** out_json) {
  if (!scene || !out_json) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] {
    const GaussianScene& s = scene->scene;
    nlohmann::json j;
    j["statics"] = s.statics.size();
    j["dynamics"] = s.dynamics.size();
    j["frames"] = s.timestamps.size();
    j["keyframes"] = s.keyframeCount();
    j["keyframe_interval"] = s.keyframeInterval;
    j["duration"] = s.duration;
    j["sh_degree"] = s.maxShDegree;
    *out_json = dupString(j.dump());
  });
}

void g4dc_scene_free(g4dc_scene* scene) { delete scene; }

g4dc_status g4dc_encode(const g4dc_scene* scene, const char* config_json,
                        g4dc_container** out) {
  if (!scene || !out) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] {
    EncodeConfig cfg = (config_json && *config_json) ? EncodeConfig::fromJson(config_json)
                                                     : EncodeConfig::preset(3);
    EncodeOutcome outcome = encodeScene(scene->scene, cfg);
    *out = new g4dc_container{std::move(outcome.container)};
  });
}

g4dc_status g4dc_decode(const g4dc_container* container, g4dc_scene** out) {
  if (!container || !out) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] { *out = new g4dc_scene{decodeScene(container->container)}; });
}

g4dc_status g4dc_container_read(const char* path, g4dc_container** out) {
  if (!path || !out) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] { *out = new g4dc_container{readContainer(path)}; });
}

g4dc_status g4dc_container_write(const g4dc_container* container, const char* path) {
  if (!container || !path) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] { writeContainer(container->container, path); });
}

g4dc_status g4dc_size_report(const g4dc_container* container, char** out_json) {
  if (!container || !out_json) return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] { *out_json = dupString(sizeReport(container->container).toJson()); });
}

void g4dc_container_free(g4dc_container* container) { delete container; }

g4dc_status g4dc_probe_metrics(const g4dc_scene* reference, const g4dc_container* container,
                               uint64_t probe_seed, int probe_size, char** out_json) {
  if (!reference || !container || !out_json)
    return fail(G4DC_ERR_VALIDATION, "null argument");
  return guarded([&] {
    const GaussianScene& ref = reference->scene;
    GaussianScene decoded = decodeScene(container->container);
    std::vector<ProbeCamera> probes = makeProbeSet(ref, probe_seed, probe_size);
    std::vector<Image> truth = renderProbes(ref, probes);
    std::vector<Image> test = renderProbes(decoded, probes);
    double psnrDb = probePsnr(test, truth);
    double ssimV = probeSsim(test, truth);

    // Trajectory fidelity over surviving dynamics, matched through the mask.
    std::vector<uint8_t> keep = gaussianKeepBits(container->container);
    if (keep.size() != ref.totalGaussians())
      throw ValidationError("reference scene does not match the container's point counts");
    std::vector<Vec3> orig, recon;
    size_t cursor = 0;
    for (size_t i = 0; i < ref.dynamics.size(); ++i) {
      if (!keep[ref.statics.size() + i]) continue;
      if (cursor >= decoded.dynamics.size()) throw FormatError("mask/dynamics mismatch");
      const auto& a = ref.dynamics[i].keyPositions;
      const auto& b = decoded.dynamics[cursor++].keyPositions;
      for (size_t j = 0; j < a.size(); ++j) {
        orig.push_back(Vec3(a[j]));
        recon.push_back(Vec3(b[j]));
      }
    }
    double trajDb = orig.empty() ? std::numeric_limits<double>::infinity()
                                 : trajectoryPsnr(orig, recon, sceneExtent(ref));
    std::string j = "{\"psnr_db\":" + jsonNumber(psnrDb) + ",\"ssim\":" + jsonNumber(ssimV) +
                    ",\"traj_psnr_db\":" + jsonNumber(trajDb) + "}";
    *out_json = dupString(j);
  });
}

}  // extern "C"
