#include <doctest.h>

#include <cstdio>

#include "container.hpp"
#include "error.hpp"
#include "pipeline.hpp"
#include "scene_io.hpp"
#include "synth.hpp"

using namespace g4dc;

namespace {

EncodeConfig fastConfig() {
  EncodeConfig cfg = EncodeConfig::preset(3);
  cfg.lambdaGsPrune = 0;  // skip probe rendering in most container tests
  cfg.lambdaShPrune = 0;
  cfg.codebookSize = 16;
  cfg.ecvqIterations = 8;
  return cfg;
}

GaussianScene smallScene(uint64_t seed) {
  SynthConfig cfg;
  cfg.staticCount = 40;
  cfg.dynamicCount = 16;
  cfg.frames = 13;  // 7 keyframes at interval 2
  cfg.keyframeInterval = 2;
  return generateSyntheticScene(cfg, seed);
}

}  // namespace

TEST_CASE("containers round trip through bytes") {
  GaussianScene scene = smallScene(1);
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  std::vector<uint8_t> bytes = containerToBytes(c);
  CompressedContainer back = containerFromBytes(bytes.data(), bytes.size());
  CHECK(containerToBytes(back) == bytes);
  CHECK(back.header.staticCount == c.header.staticCount);
  CHECK(back.header.timestamps == c.header.timestamps);
}

TEST_CASE("decoded scenes match the in-memory decode bit for bit") {
  GaussianScene scene = smallScene(2);
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  GaussianScene direct = decodeScene(c);
  std::vector<uint8_t> bytes = containerToBytes(c);
  GaussianScene viaFile = decodeScene(containerFromBytes(bytes.data(), bytes.size()));
  CHECK(sceneToBytes(direct) == sceneToBytes(viaFile));
}

TEST_CASE("unknown magic raises a format error") {
  std::vector<uint8_t> bytes{'N', 'O', 'P', 'E', 1, 0};
  CHECK_THROWS_AS(containerFromBytes(bytes.data(), bytes.size()), FormatError);
}

TEST_CASE("unsupported versions raise a format error") {
  GaussianScene scene = smallScene(9);
  std::vector<uint8_t> bytes = containerToBytes(encodeScene(scene, fastConfig()).container);
  bytes[4] = 0x77;  // version little-endian low byte
  CHECK_THROWS_AS(containerFromBytes(bytes.data(), bytes.size()), FormatError);
}

TEST_CASE("every truncation of a container is detected") {
  GaussianScene scene = smallScene(3);
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  std::vector<uint8_t> bytes = containerToBytes(c);
  for (size_t cut = 0; cut < bytes.size(); ++cut) {
    CHECK_THROWS_AS(containerFromBytes(bytes.data(), cut), FormatError);
  }
}

TEST_CASE("single-byte corruption of a section payload is detected") {
  GaussianScene scene = smallScene(4);
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  std::vector<uint8_t> bytes = containerToBytes(c);
  // Find where payloads start: header block plus the section table.
  size_t headerBytes = 4 + 2 + 4;
  // u32 headerLen at offset 6.
  uint32_t hl = bytes[6] | (bytes[7] << 8) | (bytes[8] << 16) | (bytes[9] << 24);
  size_t payloadStart = headerBytes + hl + 4 + kSectionCount * 13;
  REQUIRE(payloadStart < bytes.size());
  size_t stride = std::max<size_t>(1, (bytes.size() - payloadStart) / 64);
  for (size_t pos = payloadStart; pos < bytes.size(); pos += stride) {
    std::vector<uint8_t> corrupted = bytes;
    corrupted[pos] ^= 0x40;
    CHECK_THROWS_AS(containerFromBytes(corrupted.data(), corrupted.size()), FormatError);
  }
}

TEST_CASE("section table inconsistent with the file size is reported") {
  GaussianScene scene = smallScene(5);
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  std::vector<uint8_t> bytes = containerToBytes(c);
  bytes.push_back(0);  // trailing garbage
  CHECK_THROWS_AS(containerFromBytes(bytes.data(), bytes.size()), FormatError);
}

TEST_CASE("size report accounts for every byte") {
  GaussianScene scene = smallScene(6);
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  RateReport rep = sizeReport(c);
  CHECK(rep.totalBytes == containerToBytes(c).size());
  uint64_t sum = 0;
  double pct = 0;
  for (const auto& s : rep.sections) {
    sum += s.bytes;
    pct += s.percent;
  }
  CHECK(sum == rep.totalBytes);
  CHECK(pct == doctest::Approx(100.0).epsilon(0.001));
}

TEST_CASE("empty scenes produce a headers-only container") {
  GaussianScene scene;
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  for (const auto& s : c.sections) CHECK(s.empty());
  GaussianScene back = decodeScene(c);
  CHECK(back.statics.empty());
  CHECK(back.dynamics.empty());
}

TEST_CASE("scenes without dynamics have an empty trajectory section") {
  SynthConfig cfg;
  cfg.staticCount = 25;
  cfg.dynamicCount = 0;
  cfg.frames = 5;
  cfg.keyframeInterval = 1;
  GaussianScene scene = generateSyntheticScene(cfg, 7);
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  CHECK(c.section(Section::FMasked).empty());
  CHECK(c.section(Section::BetaVar).empty());
  RateReport rep = sizeReport(c);
  CHECK(rep.sectionBytes("f_masked") == 0);
  GaussianScene back = decodeScene(c);
  CHECK(back.dynamics.empty());
  CHECK(back.statics.size() == 25);
}

TEST_CASE("container files round trip on disk") {
  GaussianScene scene = smallScene(8);
  CompressedContainer c = encodeScene(scene, fastConfig()).container;
  std::string path = "/tmp/g4dc_test_container.g4c";
  writeContainer(c, path);
  CompressedContainer back = readContainer(path);
  CHECK(containerToBytes(back) == containerToBytes(c));
  std::remove(path.c_str());
  CHECK_THROWS_AS(readContainer("/tmp/g4dc_does_not_exist.g4c"), IoError);
}
