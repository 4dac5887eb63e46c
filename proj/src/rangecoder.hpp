#pragma once

#include <cstdint>
#include <vector>

namespace g4dc {

// Byte-oriented carry-aware range coder over static frequency tables whose
// totals are normalized to 1 << 16. Streams are decoded with the exact table
// used for encoding.
class RangeEncoder {
 public:
  void encode(uint32_t cumFreq, uint32_t freq, uint32_t totFreq);
  std::vector<uint8_t> finish();

 private:
  void shiftLow();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cacheSize_ = 1;
  std::vector<uint8_t> bytes_;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t size);

  uint32_t decodeFreq(uint32_t totFreq);
  void decodeUpdate(uint32_t cumFreq, uint32_t freq);

 private:
  uint8_t nextByte();

  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

// Cumulative-frequency view of a count table (counts sum to 1 << 16).
struct SymbolTable {
  std::vector<uint32_t> counts;
  std::vector<uint32_t> cum;  // cum[j] = sum of counts below j; cum[m] = total
  uint32_t total = 0;

  static SymbolTable fromCounts(const std::vector<uint32_t>& counts);
  uint32_t findSymbol(uint32_t freq) const;
  size_t size() const { return counts.size(); }
};

std::vector<uint8_t> rangeEncode(const std::vector<uint32_t>& symbols, const SymbolTable& table);
std::vector<uint32_t> rangeDecode(const uint8_t* data, size_t size, const SymbolTable& table,
                                  size_t count);

// Model cost of a stream in bits: sum of -log2(count/total) per symbol.
double streamEntropyBits(const std::vector<uint32_t>& symbols, const SymbolTable& table);

}  // namespace g4dc
