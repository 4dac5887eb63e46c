#include "container.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>

#include "bytes.hpp"
#include "error.hpp"
#include "scene_io.hpp"

namespace g4dc {

namespace {
constexpr char kMagic[4] = {'G', '4', 'D', 'C'};
constexpr uint16_t kVersion = 1;

uint32_t crcOf(const std::vector<uint8_t>& bytes) {
  return static_cast<uint32_t>(
      crc32(0L, bytes.empty() ? Z_NULL : bytes.data(), static_cast<uInt>(bytes.size())));
}

void putRange(ByteWriter& w, const QuantRange& r) {
  w.f32(r.lo);
  w.f32(r.hi);
}
QuantRange getRange(ByteReader& r) {
  QuantRange q;
  q.lo = r.f32();
  q.hi = r.f32();
  return q;
}

std::vector<uint8_t> headerToBytes(const ContainerHeader& h) {
  ByteWriter w;
  w.u32(h.staticCountOriginal);
  w.u32(h.staticCount);
  w.u32(h.dynamicCountOriginal);
  w.u32(h.dynamicCount);
  w.f32(h.duration);
  w.u32(h.keyframeInterval);
  w.u32(static_cast<uint32_t>(h.timestamps.size()));
  for (float t : h.timestamps) w.f32(t);
  w.u8(h.maxShDegree);
  w.u8(h.waveletLevels);
  w.u8(h.keepDetailLevels);
  w.u8(h.opacityPolicy);
  w.u8(h.opacityBits);
  w.u8(h.coeffBits);
  w.u8(0);
  w.u8(0);
  putRange(w, h.alphaStaticRange);
  putRange(w, h.alphaDynamicRange);
  putRange(w, h.plateauStartRange);
  putRange(w, h.plateauEndRange);
  putRange(w, h.riseWidthRange);
  putRange(w, h.fallWidthRange);
  for (const auto& r : h.coeffRange) putRange(w, r);
  for (const auto& r : h.detailRange) putRange(w, r);
  w.u64(h.seed);
  return w.take();
}

ContainerHeader headerFromBytes(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes.data(), bytes.size());
  ContainerHeader h;
  h.staticCountOriginal = r.u32();
  h.staticCount = r.u32();
  h.dynamicCountOriginal = r.u32();
  h.dynamicCount = r.u32();
  h.duration = r.f32();
  h.keyframeInterval = r.u32();
  uint32_t frames = r.u32();
  if (static_cast<uint64_t>(frames) * 4 > bytes.size())
    throw FormatError("container header: frame count inconsistent with header size");
  h.timestamps.resize(frames);
  for (uint32_t i = 0; i < frames; ++i) h.timestamps[i] = r.f32();
  h.maxShDegree = r.u8();
  h.waveletLevels = r.u8();
  h.keepDetailLevels = r.u8();
  h.opacityPolicy = r.u8();
  h.opacityBits = r.u8();
  h.coeffBits = r.u8();
  r.u8();
  r.u8();
  h.alphaStaticRange = getRange(r);
  h.alphaDynamicRange = getRange(r);
  h.plateauStartRange = getRange(r);
  h.plateauEndRange = getRange(r);
  h.riseWidthRange = getRange(r);
  h.fallWidthRange = getRange(r);
  for (auto& q : h.coeffRange) q = getRange(r);
  for (auto& q : h.detailRange) q = getRange(r);
  h.seed = r.u64();
  if (r.remaining() != 0) throw FormatError("container header: trailing bytes");
  return h;
}

}  // namespace

const char* sectionName(Section s) {
  switch (s) {
    case Section::GaussianMask: return "gaussian_mask";
    case Section::ShMask: return "sh_mask";
    case Section::SortIdx: return "sort_idx";
    case Section::Indexes: return "indexes";
    case Section::FMasked: return "f_masked";
    case Section::MuDisp: return "mu_disp";
    case Section::Mu0: return "mu_0";
    case Section::Codebooks: return "codebooks";
    case Section::Logits: return "logits";
    case Section::OpacityCenters: return "opacity_centers";
    case Section::BetaVar: return "beta_var";
    case Section::BaseOpacities: return "base_opacities";
  }
  return "?";
}

std::vector<uint8_t> containerToBytes(const CompressedContainer& c) {
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u16(kVersion);
  std::vector<uint8_t> header = headerToBytes(c.header);
  w.u32(static_cast<uint32_t>(header.size()));
  w.bytes(header.data(), header.size());
  w.u32(static_cast<uint32_t>(kSectionCount));
  for (size_t i = 0; i < kSectionCount; ++i) {
    w.u8(static_cast<uint8_t>(i));
    w.u64(c.sections[i].size());
    w.u32(crcOf(c.sections[i]));
  }
  for (size_t i = 0; i < kSectionCount; ++i)
    w.bytes(c.sections[i].data(), c.sections[i].size());
  return w.take();
}

CompressedContainer containerFromBytes(const uint8_t* data, size_t size) {
  ByteReader r(data, size);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("not a compressed container (bad magic)");
  uint16_t version = r.u16();
  if (version != kVersion)
    throw FormatError("unsupported container version " + std::to_string(version));
  uint32_t headerBytes = r.u32();
  if (headerBytes > r.remaining())
    throw FormatError("container header extends past end of file");
  std::vector<uint8_t> headerBlob(headerBytes);
  r.bytes(headerBlob.data(), headerBytes);

  CompressedContainer c;
  c.header = headerFromBytes(headerBlob);

  uint32_t sectionCount = r.u32();
  if (sectionCount != kSectionCount)
    throw FormatError("container section count " + std::to_string(sectionCount) +
                      " != " + std::to_string(kSectionCount));
  struct Entry {
    uint64_t length;
    uint32_t crc;
  };
  std::array<Entry, kSectionCount> table{};
  uint64_t payload = 0;
  for (size_t i = 0; i < kSectionCount; ++i) {
    uint8_t id = r.u8();
    if (id != i) throw FormatError("container section table out of order");
    table[i].length = r.u64();
    table[i].crc = r.u32();
    payload += table[i].length;
  }
  if (payload != r.remaining())
    throw FormatError("section length table inconsistent with file size (expected " +
                      std::to_string(payload) + " payload bytes, have " +
                      std::to_string(r.remaining()) + ")");
  for (size_t i = 0; i < kSectionCount; ++i) {
    c.sections[i].resize(table[i].length);
    if (table[i].length > 0) r.bytes(c.sections[i].data(), table[i].length);
    if (crcOf(c.sections[i]) != table[i].crc)
      throw FormatError(std::string("checksum mismatch in section ") +
                        sectionName(static_cast<Section>(i)));
  }
  return c;
}

void writeContainer(const CompressedContainer& c, const std::string& path) {
  writeFileBytes(path, containerToBytes(c));
}

CompressedContainer readContainer(const std::string& path) {
  std::vector<uint8_t> bytes = readFileBytes(path);
  return containerFromBytes(bytes.data(), bytes.size());
}

RateReport sizeReport(const CompressedContainer& c) {
  RateReport rep;
  std::vector<uint8_t> full = containerToBytes(c);
  rep.totalBytes = full.size();
  uint64_t sectionsTotal = 0;
  for (const auto& s : c.sections) sectionsTotal += s.size();
  uint64_t headerBytes = rep.totalBytes - sectionsTotal;
  auto pct = [&](uint64_t b) {
    return rep.totalBytes ? 100.0 * static_cast<double>(b) / rep.totalBytes : 0.0;
  };
  rep.sections.push_back({"header", headerBytes, pct(headerBytes)});
  for (size_t i = 0; i < kSectionCount; ++i) {
    uint64_t b = c.sections[i].size();
    rep.sections.push_back({sectionName(static_cast<Section>(i)), b, pct(b)});
  }
  rep.staticOriginal = c.header.staticCountOriginal;
  rep.staticKept = c.header.staticCount;
  rep.dynamicOriginal = c.header.dynamicCountOriginal;
  rep.dynamicKept = c.header.dynamicCount;
  return rep;
}

uint64_t RateReport::sectionBytes(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return s.bytes;
  return 0;
}

std::string RateReport::toTable() const {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-16s %12s %8s\n", "section", "bytes", "percent");
  out += line;
  for (const auto& s : sections) {
    std::snprintf(line, sizeof(line), "%-16s %12llu %7.2f%%\n", s.name.c_str(),
                  static_cast<unsigned long long>(s.bytes), s.percent);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-16s %12llu %7.2f%%\n", "total",
                static_cast<unsigned long long>(totalBytes), 100.0);
  out += line;
  std::snprintf(line, sizeof(line),
                "points: static %u -> %u (pruned %u), dynamic %u -> %u (pruned %u)\n",
                staticOriginal, staticKept, staticOriginal - staticKept, dynamicOriginal,
                dynamicKept, dynamicOriginal - dynamicKept);
  out += line;
  return out;
}

std::string RateReport::toJson() const {
  std::string out = "{";
  out += "\"total_bytes\":" + std::to_string(totalBytes) + ",";
  out += "\"static_original\":" + std::to_string(staticOriginal) + ",";
  out += "\"static_kept\":" + std::to_string(staticKept) + ",";
  out += "\"dynamic_original\":" + std::to_string(dynamicOriginal) + ",";
  out += "\"dynamic_kept\":" + std::to_string(dynamicKept) + ",";
  out += "\"sections\":{";
  for (size_t i = 0; i < sections.size(); ++i) {
    if (i) out += ",";
    out += "\"" + sections[i].name + "\":" + std::to_string(sections[i].bytes);
  }
  out += "}}";
  return out;
}

}  // namespace g4dc
