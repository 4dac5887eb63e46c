#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace g4dc {

// Compressed container (.g4c) layout, little-endian throughout:
//   magic "G4DC", u16 version
//   u32 headerBytes, header blob
//   u32 sectionCount, per section: u8 id, u64 byteLength, u32 crc32
//   section payloads concatenated in id order
// The section table is validated against the file size before any payload is
// parsed; every payload carries a CRC32.
enum class Section : uint8_t {
  GaussianMask = 0,
  ShMask = 1,
  SortIdx = 2,
  Indexes = 3,
  FMasked = 4,
  MuDisp = 5,
  Mu0 = 6,
  Codebooks = 7,
  Logits = 8,
  OpacityCenters = 9,
  BetaVar = 10,
  BaseOpacities = 11,
};
inline constexpr size_t kSectionCount = 12;

const char* sectionName(Section s);

struct QuantRange {
  float lo = 0.f;
  float hi = 0.f;
};

struct ContainerHeader {
  uint32_t staticCountOriginal = 0;
  uint32_t staticCount = 0;
  uint32_t dynamicCountOriginal = 0;
  uint32_t dynamicCount = 0;
  float duration = 0.f;
  uint32_t keyframeInterval = 1;
  std::vector<float> timestamps;
  uint8_t maxShDegree = 3;
  uint8_t waveletLevels = 1;      // 0 = raw keyframe positions
  uint8_t keepDetailLevels = 0;
  uint8_t opacityPolicy = 0;      // OpacityPolicy bits
  uint8_t opacityBits = 8;
  uint8_t coeffBits = 16;
  QuantRange alphaStaticRange, alphaDynamicRange;
  QuantRange plateauStartRange, plateauEndRange;
  QuantRange riseWidthRange, fallWidthRange;
  std::array<QuantRange, 3> coeffRange;   // per axis, approximation / raw positions
  std::array<QuantRange, 3> detailRange;  // per axis, retained detail rows
  uint64_t seed = 0;
};

struct CompressedContainer {
  ContainerHeader header;
  std::array<std::vector<uint8_t>, kSectionCount> sections;

  std::vector<uint8_t>& section(Section s) { return sections[static_cast<size_t>(s)]; }
  const std::vector<uint8_t>& section(Section s) const {
    return sections[static_cast<size_t>(s)];
  }
};

std::vector<uint8_t> containerToBytes(const CompressedContainer& c);
CompressedContainer containerFromBytes(const uint8_t* data, size_t size);

void writeContainer(const CompressedContainer& c, const std::string& path);
CompressedContainer readContainer(const std::string& path);

struct SectionStat {
  std::string name;
  uint64_t bytes = 0;
  double percent = 0.0;
};

struct RateReport {
  std::vector<SectionStat> sections;  // header row first, then the 12 sections
  uint64_t totalBytes = 0;
  uint32_t staticOriginal = 0, staticKept = 0;
  uint32_t dynamicOriginal = 0, dynamicKept = 0;

  std::string toTable() const;
  std::string toJson() const;
  uint64_t sectionBytes(const std::string& name) const;
};

RateReport sizeReport(const CompressedContainer& c);

}  // namespace g4dc
