#pragma once

#include <string>
#include <vector>

#include "scene.hpp"

namespace g4dc {

// Uncompressed scene interchange format (.g4s): a flat little-endian binary
// file. Layout:
//   magic "G4DS", u16 version
//   u32 staticCount, u32 dynamicCount, f32 duration, u32 keyframeInterval,
//   u32 frameCount, u32 keyframeCount, u8 shDegree, u8[3] reserved
//   f32 timestamps[frameCount]
//   statics:  pivot.xyz drift.xyz scale.xyz rot.wxyz opacity sh[(k+1)^2 * 3]
//   dynamics: keyPositions[kf*3] keyRotations[kf*4] scale.xyz baseOpacity
//             plateauStart plateauEnd riseWidth fallWidth sh[(k+1)^2 * 3]
// All reals are f32.
std::vector<uint8_t> sceneToBytes(const GaussianScene& scene);
GaussianScene sceneFromBytes(const uint8_t* data, size_t size);

void writeSceneFile(const GaussianScene& scene, const std::string& path);
GaussianScene readSceneFile(const std::string& path);

}  // namespace g4dc
