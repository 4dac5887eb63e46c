#include "rangecoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace g4dc {

namespace {
constexpr uint32_t kTopValue = 1u << 24;
}

void RangeEncoder::encode(uint32_t cumFreq, uint32_t freq, uint32_t totFreq) {
  if (freq == 0) throw ValidationError("range encoder: zero-frequency symbol");
  range_ /= totFreq;
  low_ += static_cast<uint64_t>(cumFreq) * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    shiftLow();
    range_ <<= 8;
  }
}

void RangeEncoder::shiftLow() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t out = cache_;
    do {
      bytes_.push_back(static_cast<uint8_t>(out + carry));
      out = 0xFF;
    } while (--cacheSize_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cacheSize_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shiftLow();
  return std::move(bytes_);
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t size) : data_(data), size_(size) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | nextByte();
}

uint8_t RangeDecoder::nextByte() {
  if (pos_ >= size_)
    throw FormatError("range stream truncated at byte " + std::to_string(pos_));
  return data_[pos_++];
}

uint32_t RangeDecoder::decodeFreq(uint32_t totFreq) {
  range_ /= totFreq;
  uint32_t f = code_ / range_;
  if (f >= totFreq) throw FormatError("range stream corrupt (frequency overflow)");
  return f;
}

void RangeDecoder::decodeUpdate(uint32_t cumFreq, uint32_t freq) {
  code_ -= cumFreq * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | nextByte();
    range_ <<= 8;
  }
}

SymbolTable SymbolTable::fromCounts(const std::vector<uint32_t>& counts) {
  SymbolTable t;
  t.counts = counts;
  t.cum.resize(counts.size() + 1);
  t.cum[0] = 0;
  for (size_t j = 0; j < counts.size(); ++j) t.cum[j + 1] = t.cum[j] + counts[j];
  t.total = t.cum.back();
  if (t.total == 0) throw ValidationError("symbol table: empty");
  return t;
}

uint32_t SymbolTable::findSymbol(uint32_t freq) const {
  // Last j with cum[j] <= freq.
  auto it = std::upper_bound(cum.begin(), cum.end(), freq);
  return static_cast<uint32_t>(it - cum.begin()) - 1;
}

std::vector<uint8_t> rangeEncode(const std::vector<uint32_t>& symbols,
                                 const SymbolTable& table) {
  if (symbols.empty()) return {};
  RangeEncoder enc;
  for (uint32_t s : symbols) {
    if (s >= table.size()) throw ValidationError("range encode: symbol outside table");
    if (table.counts[s] == 0) throw ValidationError("range encode: zero-probability symbol");
    enc.encode(table.cum[s], table.counts[s], table.total);
  }
  return enc.finish();
}

std::vector<uint32_t> rangeDecode(const uint8_t* data, size_t size, const SymbolTable& table,
                                  size_t count) {
  std::vector<uint32_t> out;
  if (count == 0) return out;
  out.reserve(count);
  RangeDecoder dec(data, size);
  for (size_t i = 0; i < count; ++i) {
    uint32_t f = dec.decodeFreq(table.total);
    uint32_t s = table.findSymbol(f);
    dec.decodeUpdate(table.cum[s], table.counts[s]);
    out.push_back(s);
  }
  return out;
}

double streamEntropyBits(const std::vector<uint32_t>& symbols, const SymbolTable& table) {
  double bits = 0;
  for (uint32_t s : symbols) {
    double p = static_cast<double>(table.counts[s]) / table.total;
    bits += -std::log2(p);
  }
  return bits;
}

}  // namespace g4dc
