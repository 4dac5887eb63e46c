#pragma once

#include <vector>

#include "image.hpp"
#include "scene.hpp"

namespace g4dc {

// Pinhole probe camera; pose maps world points into camera space as
// x_cam = rot * (x_world - position), looking down +z.
struct ProbeCamera {
  Mat3 rot = Mat3::identity();
  Vec3 position;
  double fx = 64, fy = 64, cx = 32, cy = 32;
  int width = 64, height = 64;
  double time = 0;
};

// Depth-sorted alpha compositing of the scene at cam.time; deterministic
// for identical inputs (ties sort by Gaussian id). Pixels clamp to [0, 1];
// empty scenes render the black background.
Image render(const GaussianScene& scene, const ProbeCamera& cam);

// 10*log10(1/MSE) over RGB; identical images return +infinity.
double psnr(const Image& a, const Image& b);

inline bool psnrIsInf(double v) { return std::isinf(v); }

// PSNR of keyframe trajectories (flattened positions) normalized by the
// scene extent: -10*log10(mean ||dp||^2 / extent^2).
double trajectoryPsnr(const std::vector<Vec3>& original,
                      const std::vector<Vec3>& reconstructed, double sceneExtent);

// Diagonal of the bounding box of all content over all keyframes.
double sceneExtent(const GaussianScene& scene);

// Fixed probe rig: 8 cameras on a ring around the scene at 4 timestamps.
// Deterministic given (scene bounds, seed, imageSize).
std::vector<ProbeCamera> makeProbeSet(const GaussianScene& scene, uint64_t seed,
                                      int imageSize);

// Renders every probe; parallel across cameras, capped by G4C_THREADS.
std::vector<Image> renderProbes(const GaussianScene& scene,
                                const std::vector<ProbeCamera>& probes);

// Mean probe-set distortion (L1 + D-SSIM mix) of a candidate scene against
// reference renders.
double probeDistortion(const GaussianScene& candidate,
                       const std::vector<ProbeCamera>& probes,
                       const std::vector<Image>& reference, double lambdaDssim);

// Global PSNR across concatenated probe images.
double probePsnr(const std::vector<Image>& a, const std::vector<Image>& b);
double probeSsim(const std::vector<Image>& a, const std::vector<Image>& b);

// Visibility-weighted importance per Gaussian (statics then dynamics): mean
// over probes of effective opacity times projected ellipse area.
std::vector<double> computeImportance(const GaussianScene& scene,
                                      const std::vector<ProbeCamera>& probes);

}  // namespace g4dc
