#include "scene_io.hpp"

#include <fstream>

#include "bytes.hpp"
#include "error.hpp"

namespace g4dc {

namespace {
constexpr char kMagic[4] = {'G', '4', 'D', 'S'};
constexpr uint16_t kVersion = 1;

void putVec3(ByteWriter& w, const Vec3f& v) {
  w.f32(v.x);
  w.f32(v.y);
  w.f32(v.z);
}
Vec3f getVec3(ByteReader& r) {
  Vec3f v;
  v.x = r.f32();
  v.y = r.f32();
  v.z = r.f32();
  return v;
}
void putQuat(ByteWriter& w, const Quatf& q) {
  w.f32(q.w);
  w.f32(q.x);
  w.f32(q.y);
  w.f32(q.z);
}
Quatf getQuat(ByteReader& r) {
  Quatf q;
  q.w = r.f32();
  q.x = r.f32();
  q.y = r.f32();
  q.z = r.f32();
  return q;
}
}  // namespace

std::vector<uint8_t> readFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  in.seekg(0, std::ios::end);
  std::streamoff n = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(n));
  if (n > 0) in.read(reinterpret_cast<char*>(bytes.data()), n);
  if (!in) throw IoError("cannot read " + path);
  return bytes;
}

void writeFileBytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + path);
}

std::vector<uint8_t> sceneToBytes(const GaussianScene& scene) {
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u16(kVersion);
  w.u32(static_cast<uint32_t>(scene.statics.size()));
  w.u32(static_cast<uint32_t>(scene.dynamics.size()));
  w.f32(scene.duration);
  w.u32(scene.keyframeInterval);
  w.u32(static_cast<uint32_t>(scene.timestamps.size()));
  w.u32(static_cast<uint32_t>(scene.keyframeCount()));
  w.u8(static_cast<uint8_t>(scene.maxShDegree));
  w.u8(0);
  w.u8(0);
  w.u8(0);
  for (float t : scene.timestamps) w.f32(t);

  const size_t shLen = static_cast<size_t>(shCoeffCount(scene.maxShDegree));
  for (const auto& g : scene.statics) {
    putVec3(w, g.pivot);
    putVec3(w, g.drift);
    putVec3(w, g.scale);
    putQuat(w, g.rotation);
    w.f32(g.opacity);
    for (size_t i = 0; i < shLen; ++i) putVec3(w, g.sh[i]);
  }
  const size_t kf = scene.keyframeCount();
  for (const auto& g : scene.dynamics) {
    for (size_t i = 0; i < kf; ++i) putVec3(w, g.keyPositions[i]);
    for (size_t i = 0; i < kf; ++i) putQuat(w, g.keyRotations[i]);
    putVec3(w, g.scale);
    w.f32(g.baseOpacity);
    w.f32(g.plateauStart);
    w.f32(g.plateauEnd);
    w.f32(g.riseWidth);
    w.f32(g.fallWidth);
    for (size_t i = 0; i < shLen; ++i) putVec3(w, g.sh[i]);
  }
  return w.take();
}

GaussianScene sceneFromBytes(const uint8_t* data, size_t size) {
  ByteReader r(data, size);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a scene file (bad magic)");
  uint16_t version = r.u16();
  if (version != kVersion)
    throw FormatError("unsupported scene file version " + std::to_string(version));

  GaussianScene scene;
  uint32_t staticCount = r.u32();
  uint32_t dynamicCount = r.u32();
  scene.duration = r.f32();
  scene.keyframeInterval = r.u32();
  uint32_t frameCount = r.u32();
  uint32_t keyframeCount = r.u32();
  scene.maxShDegree = r.u8();
  r.u8();
  r.u8();
  r.u8();
  if (scene.maxShDegree < 0 || scene.maxShDegree > kMaxShDegree)
    throw FormatError("scene file: SH degree out of range");
  scene.timestamps.resize(frameCount);
  for (uint32_t i = 0; i < frameCount; ++i) scene.timestamps[i] = r.f32();
  if (scene.keyframeCount() != keyframeCount)
    throw FormatError("scene file: keyframe count inconsistent with timestamps");

  const size_t shLen = static_cast<size_t>(shCoeffCount(scene.maxShDegree));
  scene.statics.resize(staticCount);
  for (auto& g : scene.statics) {
    g.pivot = getVec3(r);
    g.drift = getVec3(r);
    g.scale = getVec3(r);
    g.rotation = getQuat(r);
    g.opacity = r.f32();
    g.sh.resize(shLen);
    for (size_t i = 0; i < shLen; ++i) g.sh[i] = getVec3(r);
  }
  scene.dynamics.resize(dynamicCount);
  for (auto& g : scene.dynamics) {
    g.keyPositions.resize(keyframeCount);
    for (uint32_t i = 0; i < keyframeCount; ++i) g.keyPositions[i] = getVec3(r);
    g.keyRotations.resize(keyframeCount);
    for (uint32_t i = 0; i < keyframeCount; ++i) g.keyRotations[i] = getQuat(r);
    g.scale = getVec3(r);
    g.baseOpacity = r.f32();
    g.plateauStart = r.f32();
    g.plateauEnd = r.f32();
    g.riseWidth = r.f32();
    g.fallWidth = r.f32();
    g.sh.resize(shLen);
    for (size_t i = 0; i < shLen; ++i) g.sh[i] = getVec3(r);
  }
  if (r.remaining() != 0) throw FormatError("scene file: trailing bytes");
  return scene;
}

void writeSceneFile(const GaussianScene& scene, const std::string& path) {
  writeFileBytes(path, sceneToBytes(scene));
}

GaussianScene readSceneFile(const std::string& path) {
  std::vector<uint8_t> bytes = readFileBytes(path);
  return sceneFromBytes(bytes.data(), bytes.size());
}

}  // namespace g4dc
