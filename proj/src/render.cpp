#include "render.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

#include "error.hpp"
#include "rate.hpp"

namespace g4dc {

namespace {

constexpr double kAlphaSkip = 1.0 / 4096.0;
constexpr double kTransmittanceStop = 1e-4;
constexpr double kNearPlane = 0.05;
constexpr double kLowPass = 0.3;  // pixel-space covariance floor

// Real spherical harmonics basis constants (degree <= 3).
constexpr double kSh0 = 0.28209479177387814;
constexpr double kSh1 = 0.4886025119029199;
constexpr double kSh2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                            -1.0925484305920792, 0.5462742152960396};
constexpr double kSh3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                            0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                            -0.5900435899266435};

Vec3 evalSh(const std::vector<Vec3f>& sh, int degree, const Vec3& dir) {
  Vec3 c = kSh0 * Vec3(sh[0]);
  if (degree >= 1 && sh.size() >= 4) {
    double x = dir.x, y = dir.y, z = dir.z;
    c += -kSh1 * y * Vec3(sh[1]);
    c += kSh1 * z * Vec3(sh[2]);
    c += -kSh1 * x * Vec3(sh[3]);
    if (degree >= 2 && sh.size() >= 9) {
      double xx = x * x, yy = y * y, zz = z * z, xy = x * y, yz = y * z, xz = x * z;
      c += kSh2[0] * xy * Vec3(sh[4]);
      c += kSh2[1] * yz * Vec3(sh[5]);
      c += kSh2[2] * (2 * zz - xx - yy) * Vec3(sh[6]);
      c += kSh2[3] * xz * Vec3(sh[7]);
      c += kSh2[4] * (xx - yy) * Vec3(sh[8]);
      if (degree >= 3 && sh.size() >= 16) {
        c += kSh3[0] * y * (3 * xx - yy) * Vec3(sh[9]);
        c += kSh3[1] * xy * z * Vec3(sh[10]);
        c += kSh3[2] * y * (4 * zz - xx - yy) * Vec3(sh[11]);
        c += kSh3[3] * z * (2 * zz - 3 * xx - 3 * yy) * Vec3(sh[12]);
        c += kSh3[4] * x * (4 * zz - xx - yy) * Vec3(sh[13]);
        c += kSh3[5] * z * (xx - yy) * Vec3(sh[14]);
        c += kSh3[6] * x * (xx - 3 * yy) * Vec3(sh[15]);
      }
    }
  }
  c += Vec3{0.5, 0.5, 0.5};
  return {std::clamp(c.x, 0.0, 1.0), std::clamp(c.y, 0.0, 1.0), std::clamp(c.z, 0.0, 1.0)};
}

struct Splat {
  double depth;
  size_t id;
  double u, v;          // pixel center
  double ia, ib, ic;    // inverse 2D covariance (a, b; b, c)
  double alpha;
  Vec3 color;
  int x0, x1, y0, y1;   // inclusive pixel bounds
};

// Projects one Gaussian; returns false if it cannot contribute.
bool projectGaussian(const ProbeCamera& cam, const Vec3& mean, const Mat3& cov3d,
                     double alpha, const std::vector<Vec3f>& sh, int shDegree, size_t id,
                     Splat* out) {
  if (alpha < kAlphaSkip) return false;
  Vec3 pc = cam.rot * (mean - cam.position);
  if (pc.z < kNearPlane) return false;
  double z = pc.z, z2 = z * z;
  double u = cam.fx * pc.x / z + cam.cx;
  double v = cam.fy * pc.y / z + cam.cy;

  // EWA-style first-order projection: S = J * cov * J^T with
  // J = [[j00, 0, j02], [0, j11, j12]].
  Mat3 cov = cam.rot * cov3d * cam.rot.transposed();
  double j00 = cam.fx / z, j02 = -cam.fx * pc.x / z2;
  double j11 = cam.fy / z, j12 = -cam.fy * pc.y / z2;
  double r0x = j00 * cov.m[0][0] + j02 * cov.m[2][0];
  double r0y = j00 * cov.m[0][1] + j02 * cov.m[2][1];
  double r0z = j00 * cov.m[0][2] + j02 * cov.m[2][2];
  double r1y = j11 * cov.m[1][1] + j12 * cov.m[2][1];
  double r1z = j11 * cov.m[1][2] + j12 * cov.m[2][2];
  double sa = r0x * j00 + r0z * j02 + kLowPass;
  double sb = r0y * j11 + r0z * j12;
  double sc = r1y * j11 + r1z * j12 + kLowPass;

  double det = sa * sc - sb * sb;
  if (det <= 1e-18) return false;
  double inv = 1.0 / det;

  out->depth = z;
  out->id = id;
  out->u = u;
  out->v = v;
  out->ia = sc * inv;
  out->ib = -sb * inv;
  out->ic = sa * inv;
  out->alpha = std::min(alpha, 1.0);
  Vec3 dir = mean - cam.position;
  double n = dir.norm();
  out->color = evalSh(sh, shDegree, n > 0 ? dir / n : Vec3{0, 0, 1});

  double mid = 0.5 * (sa + sc);
  double eig = mid + std::sqrt(std::max(mid * mid - det, 0.0));
  double radius = 3.0 * std::sqrt(eig);
  out->x0 = std::max(0, static_cast<int>(std::floor(u - radius)));
  out->x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(u + radius)));
  out->y0 = std::max(0, static_cast<int>(std::floor(v - radius)));
  out->y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(v + radius)));
  return out->x0 <= out->x1 && out->y0 <= out->y1;
}

std::vector<Splat> gatherSplats(const GaussianScene& scene, const ProbeCamera& cam) {
  std::vector<Splat> splats;
  splats.reserve(scene.totalGaussians());
  Splat s;
  for (size_t i = 0; i < scene.statics.size(); ++i) {
    const StaticGaussian& g = scene.statics[i];
    Vec3 mean = staticPositionAt(g, std::clamp(cam.time, 0.0, (double)scene.duration),
                                 scene.duration);
    Mat3 cov = covarianceOf(Vec3(g.scale), Quat(g.rotation).normalized());
    if (projectGaussian(cam, mean, cov, g.opacity, g.sh, scene.maxShDegree, i, &s))
      splats.push_back(s);
  }
  for (size_t i = 0; i < scene.dynamics.size(); ++i) {
    const DynamicGaussian& g = scene.dynamics[i];
    double t = std::clamp(cam.time, 0.0, (double)scene.duration);
    double alpha = g.baseOpacity * temporalOpacityAt(g, t);
    if (alpha < kAlphaSkip) continue;
    Vec3 mean = dynamicPositionAt(g, t, scene);
    Quat rot = dynamicRotationAt(g, t, scene);
    Mat3 cov = covarianceOf(Vec3(g.scale), rot);
    if (projectGaussian(cam, mean, cov, alpha, g.sh, scene.maxShDegree,
                        scene.statics.size() + i, &s))
      splats.push_back(s);
  }
  std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id < b.id;
  });
  return splats;
}

}  // namespace

Image render(const GaussianScene& scene, const ProbeCamera& cam) {
  if (cam.width <= 0 || cam.height <= 0) throw ValidationError("camera image size invalid");
  Image img(cam.width, cam.height);
  std::vector<Splat> splats = gatherSplats(scene, cam);

  const size_t n = img.pixelCount();
  std::vector<double> acc(n * 3, 0.0);
  std::vector<double> transmittance(n, 1.0);

  // Splat-major compositing: splats arrive sorted front-to-back, so each
  // pixel sees its contributions in depth order.
  for (const Splat& s : splats) {
    for (int y = s.y0; y <= s.y1; ++y) {
      for (int x = s.x0; x <= s.x1; ++x) {
        size_t p = static_cast<size_t>(y) * cam.width + x;
        double T = transmittance[p];
        if (T < kTransmittanceStop) continue;
        double dx = (x + 0.5) - s.u;
        double dy = (y + 0.5) - s.v;
        double q = s.ia * dx * dx + 2.0 * s.ib * dx * dy + s.ic * dy * dy;
        if (q > 18.0) continue;  // beyond ~3 sigma
        double a = s.alpha * std::exp(-0.5 * q);
        if (a < kAlphaSkip) continue;
        acc[p * 3 + 0] += T * a * s.color.x;
        acc[p * 3 + 1] += T * a * s.color.y;
        acc[p * 3 + 2] += T * a * s.color.z;
        transmittance[p] = T * (1.0 - a);
      }
    }
  }
  for (size_t i = 0; i < n * 3; ++i)
    img.px[i] = static_cast<float>(std::clamp(acc[i], 0.0, 1.0));
  return img;
}

double psnr(const Image& a, const Image& b) {
  if (!a.sameShape(b)) throw ValidationError("psnr: image shape mismatch");
  double mse = 0;
  for (size_t i = 0; i < a.px.size(); ++i) {
    double d = static_cast<double>(a.px[i]) - b.px[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.px.size());
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double trajectoryPsnr(const std::vector<Vec3>& original,
                      const std::vector<Vec3>& reconstructed, double sceneExtent) {
  if (original.size() != reconstructed.size())
    throw ValidationError("trajectory psnr: shape mismatch");
  if (!(sceneExtent > 0)) throw ValidationError("trajectory psnr: extent must be positive");
  if (original.empty()) return std::numeric_limits<double>::infinity();
  double mse = 0;
  for (size_t i = 0; i < original.size(); ++i)
    mse += (original[i] - reconstructed[i]).norm2();
  mse /= static_cast<double>(original.size());
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sceneExtent * sceneExtent / mse);
}

double sceneExtent(const GaussianScene& scene) {
  Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
  bool any = false;
  auto grow = [&](const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    any = true;
  };
  for (const auto& g : scene.statics) {
    grow(Vec3(g.pivot));
    grow(Vec3(g.pivot) + Vec3(g.drift));
  }
  for (const auto& g : scene.dynamics)
    for (const auto& p : g.keyPositions) grow(Vec3(p));
  if (!any) return 1.0;
  double d = (hi - lo).norm();
  return d > 0 ? d : 1.0;
}

std::vector<ProbeCamera> makeProbeSet(const GaussianScene& scene, uint64_t seed,
                                      int imageSize) {
  if (imageSize < 8 || imageSize > 256)
    throw ValidationError("probe image size must be in [8, 256]");
  // Scene-fitted ring: center on the content, radius from its extent.
  Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
  bool any = false;
  auto grow = [&](const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    any = true;
  };
  for (const auto& g : scene.statics) grow(Vec3(g.pivot));
  for (const auto& g : scene.dynamics)
    for (const auto& p : g.keyPositions) grow(Vec3(p));
  Vec3 center = any ? (lo + hi) * 0.5 : Vec3{0, 0, 0};
  double radius = any ? std::max((hi - lo).norm() * 0.9, 1.0) : 4.0;

  Rng rng(seed);
  double azimuthJitter = rng.range(0.0, 0.25);
  double elevation = rng.range(0.25, 0.45);  // radians above the horizontal

  const double L = scene.duration;
  const double times[4] = {0.10 * L, 0.37 * L, 0.63 * L, 0.90 * L};

  std::vector<ProbeCamera> probes;
  for (int ci = 0; ci < 8; ++ci) {
    double az = 2.0 * 3.14159265358979323846 * (ci / 8.0 + azimuthJitter);
    Vec3 offset{radius * std::cos(az) * std::cos(elevation),
                radius * std::sin(az) * std::cos(elevation), radius * std::sin(elevation)};
    Vec3 eye = center + offset;
    // Build look-at basis: camera z toward the center.
    Vec3 fwd = (center - eye);
    fwd = fwd / fwd.norm();
    Vec3 upWorld{0, 0, 1};
    Vec3 right{fwd.y * upWorld.z - fwd.z * upWorld.y, fwd.z * upWorld.x - fwd.x * upWorld.z,
               fwd.x * upWorld.y - fwd.y * upWorld.x};
    double rn = right.norm();
    if (rn < 1e-9) {
      right = {1, 0, 0};
      rn = 1;
    }
    right = right / rn;
    Vec3 down{fwd.y * right.z - fwd.z * right.y, fwd.z * right.x - fwd.x * right.z,
              fwd.x * right.y - fwd.y * right.x};
    ProbeCamera cam;
    cam.rot.m[0][0] = right.x;
    cam.rot.m[0][1] = right.y;
    cam.rot.m[0][2] = right.z;
    cam.rot.m[1][0] = down.x;
    cam.rot.m[1][1] = down.y;
    cam.rot.m[1][2] = down.z;
    cam.rot.m[2][0] = fwd.x;
    cam.rot.m[2][1] = fwd.y;
    cam.rot.m[2][2] = fwd.z;
    cam.position = eye;
    cam.width = cam.height = imageSize;
    double focal = imageSize * 1.1;  // ~49 degree field of view
    cam.fx = cam.fy = focal;
    cam.cx = imageSize * 0.5;
    cam.cy = imageSize * 0.5;
    for (double t : times) {
      cam.time = t;
      probes.push_back(cam);
    }
  }
  return probes;
}

namespace {
int threadCap() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("G4C_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v < 256) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return static_cast<int>(hw);
}
}  // namespace

std::vector<Image> renderProbes(const GaussianScene& scene,
                                const std::vector<ProbeCamera>& probes) {
  std::vector<Image> out(probes.size());
  int threads = std::min<int>(threadCap(), static_cast<int>(probes.size()));
  if (threads <= 1) {
    for (size_t i = 0; i < probes.size(); ++i) out[i] = render(scene, probes[i]);
    return out;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= probes.size()) break;
      out[i] = render(scene, probes[i]);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

double probeDistortion(const GaussianScene& candidate,
                       const std::vector<ProbeCamera>& probes,
                       const std::vector<Image>& reference, double lambdaDssim) {
  std::vector<Image> imgs = renderProbes(candidate, probes);
  double sum = 0;
  for (size_t i = 0; i < imgs.size(); ++i)
    sum += distortionLoss(imgs[i], reference[i], lambdaDssim);
  return sum / static_cast<double>(imgs.size());
}

double probePsnr(const std::vector<Image>& a, const std::vector<Image>& b) {
  if (a.size() != b.size()) throw ValidationError("probe psnr: probe count mismatch");
  double mse = 0;
  size_t total = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].sameShape(b[i])) throw ValidationError("probe psnr: image shape mismatch");
    for (size_t j = 0; j < a[i].px.size(); ++j) {
      double d = static_cast<double>(a[i].px[j]) - b[i].px[j];
      mse += d * d;
    }
    total += a[i].px.size();
  }
  if (total == 0) return std::numeric_limits<double>::infinity();
  mse /= static_cast<double>(total);
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double probeSsim(const std::vector<Image>& a, const std::vector<Image>& b) {
  if (a.size() != b.size() || a.empty())
    throw ValidationError("probe ssim: probe count mismatch");
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) sum += ssim(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

std::vector<double> computeImportance(const GaussianScene& scene,
                                      const std::vector<ProbeCamera>& probes) {
  const size_t n = scene.totalGaussians();
  std::vector<double> importance(n, 0.0);
  for (const ProbeCamera& cam : probes) {
    double t = std::clamp(cam.time, 0.0, (double)scene.duration);
    auto accumulate = [&](size_t id, const Vec3& mean, const Mat3& cov, double alpha) {
      if (alpha < kAlphaSkip) return;
      Vec3 pc = cam.rot * (mean - cam.position);
      if (pc.z < kNearPlane) return;
      Mat3 c = cam.rot * cov * cam.rot.transposed();
      double z = pc.z, z2 = z * z;
      double j00 = cam.fx / z, j02 = -cam.fx * pc.x / z2;
      double j11 = cam.fy / z, j12 = -cam.fy * pc.y / z2;
      double sa = j00 * (j00 * c.m[0][0] + j02 * c.m[2][0]) +
                  j02 * (j00 * c.m[0][2] + j02 * c.m[2][2]) + kLowPass;
      double sc = j11 * (j11 * c.m[1][1] + j12 * c.m[2][1]) +
                  j12 * (j11 * c.m[1][2] + j12 * c.m[2][2]) + kLowPass;
      double sb = j11 * (j00 * c.m[0][1] + j02 * c.m[2][1]) +
                  j12 * (j00 * c.m[0][2] + j02 * c.m[2][2]);
      double det = std::max(sa * sc - sb * sb, 0.0);
      // Rough frustum check at the projected center.
      double u = cam.fx * pc.x / z + cam.cx;
      double v = cam.fy * pc.y / z + cam.cy;
      double margin = 3.0 * std::sqrt(std::max(sa, sc));
      if (u < -margin || u > cam.width + margin || v < -margin || v > cam.height + margin)
        return;
      importance[id] += alpha * 3.14159265358979323846 * std::sqrt(det);
    };
    for (size_t i = 0; i < scene.statics.size(); ++i) {
      const StaticGaussian& g = scene.statics[i];
      accumulate(i, staticPositionAt(g, t, scene.duration),
                 covarianceOf(Vec3(g.scale), Quat(g.rotation).normalized()), g.opacity);
    }
    for (size_t i = 0; i < scene.dynamics.size(); ++i) {
      const DynamicGaussian& g = scene.dynamics[i];
      double alpha = g.baseOpacity * temporalOpacityAt(g, t);
      if (alpha < kAlphaSkip) continue;
      accumulate(scene.statics.size() + i, dynamicPositionAt(g, t, scene),
                 covarianceOf(Vec3(g.scale), dynamicRotationAt(g, t, scene)), alpha);
    }
  }
  for (double& v : importance) v /= static_cast<double>(probes.size());
  return importance;
}

void writePpm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  for (size_t i = 0; i < img.px.size(); ++i) {
    float v = std::clamp(img.px[i], 0.f, 1.f);
    out.put(static_cast<char>(std::lround(v * 255.f)));
  }
  if (!out) throw IoError("cannot write " + path);
}

}  // namespace g4dc
