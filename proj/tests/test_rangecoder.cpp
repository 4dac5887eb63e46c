#include <doctest.h>

#include <cmath>
#include <vector>

#include "error.hpp"
#include "math.hpp"
#include "rangecoder.hpp"

using namespace g4dc;

namespace {

std::vector<uint32_t> uniformCounts(size_t m) {
  std::vector<uint32_t> c(m, (1u << 16) / static_cast<uint32_t>(m));
  uint32_t total = 0;
  for (uint32_t v : c) total += v;
  c[0] += (1u << 16) - total;
  return c;
}

std::vector<uint32_t> skewedCounts(double p0, size_t m) {
  std::vector<uint32_t> c(m, 0);
  uint32_t first = static_cast<uint32_t>(p0 * (1u << 16));
  c[0] = first;
  uint32_t rest = (1u << 16) - first;
  for (size_t j = 1; j < m; ++j) c[j] = rest / (m - 1);
  uint32_t total = 0;
  for (uint32_t v : c) total += v;
  c[1] += (1u << 16) - total;
  return c;
}

}  // namespace

TEST_CASE("empty stream encodes to an empty payload and decodes back") {
  SymbolTable t = SymbolTable::fromCounts(uniformCounts(16));
  std::vector<uint32_t> empty;
  std::vector<uint8_t> bytes = rangeEncode(empty, t);
  CHECK(bytes.empty());
  CHECK(rangeDecode(bytes.data(), bytes.size(), t, 0).empty());
}

TEST_CASE("all byte values round trip") {
  SymbolTable t = SymbolTable::fromCounts(uniformCounts(256));
  std::vector<uint32_t> symbols;
  for (int rep = 0; rep < 10; ++rep)
    for (uint32_t s = 0; s < 256; ++s) symbols.push_back(s);
  std::vector<uint8_t> bytes = rangeEncode(symbols, t);
  std::vector<uint32_t> back = rangeDecode(bytes.data(), bytes.size(), t, symbols.size());
  CHECK(back == symbols);
}

TEST_CASE("uniform 256-symbol streams code to about one byte per symbol") {
  Rng rng(2);
  SymbolTable t = SymbolTable::fromCounts(uniformCounts(256));
  std::vector<uint32_t> symbols(10000);
  for (auto& s : symbols) s = static_cast<uint32_t>(rng.index(256));
  std::vector<uint8_t> bytes = rangeEncode(symbols, t);
  CHECK(bytes.size() >= 10000);
  CHECK(bytes.size() <= 10200);  // within 2%
}

TEST_CASE("highly skewed streams approach their tiny entropy") {
  SymbolTable t = SymbolTable::fromCounts(skewedCounts(0.99, 8));
  std::vector<uint32_t> symbols(10000, 0);
  std::vector<uint8_t> bytes = rangeEncode(symbols, t);
  double hBits = streamEntropyBits(symbols, t);
  // -log2(p0) per symbol with p0 as coded.
  CHECK(hBits / symbols.size() == doctest::Approx(-std::log2(t.counts[0] / 65536.0)));
  CHECK(8.0 * bytes.size() >= hBits);
  CHECK(bytes.size() <= 1.02 * hBits / 8 + 64);
}

TEST_CASE("coded length is within [H, 1.02H + 64 bytes] on random tables") {
  Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    size_t m = 2 + rng.index(255);
    // Random positive counts normalized to 1<<16 by largest remainder.
    std::vector<double> weights(m);
    double sum = 0;
    for (double& w : weights) {
      w = std::pow(rng.uniform(), 3.0) + 1e-4;
      sum += w;
    }
    std::vector<uint32_t> counts(m, 1);
    uint32_t assigned = static_cast<uint32_t>(m);
    for (size_t j = 0; j + 1 < m; ++j) {
      uint32_t extra = static_cast<uint32_t>(weights[j] / sum * ((1u << 16) - m));
      counts[j] += extra;
      assigned += extra;
    }
    counts[m - 1] += (1u << 16) - assigned;
    SymbolTable t = SymbolTable::fromCounts(counts);

    std::vector<uint32_t> symbols(10000);
    for (auto& s : symbols) {
      uint32_t f = static_cast<uint32_t>(rng.index(1u << 16));
      s = t.findSymbol(f);  // samples approximately by the table
    }
    std::vector<uint8_t> bytes = rangeEncode(symbols, t);
    double hBytes = streamEntropyBits(symbols, t) / 8.0;
    CHECK(static_cast<double>(bytes.size()) >= hBytes);
    CHECK(static_cast<double>(bytes.size()) <= 1.02 * hBytes + 64.0);
    std::vector<uint32_t> back = rangeDecode(bytes.data(), bytes.size(), t, symbols.size());
    CHECK(back == symbols);
  }
}

TEST_CASE("random streams always round trip exactly") {
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    size_t m = 2 + rng.index(64);
    SymbolTable t = SymbolTable::fromCounts(uniformCounts(m));
    size_t n = 1 + rng.index(2000);
    std::vector<uint32_t> symbols(n);
    for (auto& s : symbols) s = static_cast<uint32_t>(rng.index(m));
    std::vector<uint8_t> bytes = rangeEncode(symbols, t);
    CHECK(rangeDecode(bytes.data(), bytes.size(), t, n) == symbols);
  }
}

TEST_CASE("truncated streams raise a format error, not silent output") {
  Rng rng(55);
  SymbolTable t = SymbolTable::fromCounts(uniformCounts(256));
  std::vector<uint32_t> symbols(500);
  for (auto& s : symbols) s = static_cast<uint32_t>(rng.index(256));
  std::vector<uint8_t> bytes = rangeEncode(symbols, t);
  // Prefixes within the flush slack of the end may still decode; anything
  // shorter must run out of bytes and throw.
  for (size_t cut = 0; cut + 12 < bytes.size(); cut += 7) {
    CHECK_THROWS_AS(rangeDecode(bytes.data(), cut, t, symbols.size()), FormatError);
  }
}

TEST_CASE("zero-probability symbols are rejected at encode time") {
  std::vector<uint32_t> counts = uniformCounts(4);
  counts[3] = 0;
  counts[0] += (1u << 16) - (counts[0] + counts[1] + counts[2]);
  SymbolTable t = SymbolTable::fromCounts(counts);
  std::vector<uint32_t> symbols{3};
  CHECK_THROWS_AS(rangeEncode(symbols, t), ValidationError);
}

TEST_CASE("single-symbol tables code long streams into the flush bytes only") {
  SymbolTable t = SymbolTable::fromCounts({1u << 16});
  std::vector<uint32_t> symbols(5000, 0);
  std::vector<uint8_t> bytes = rangeEncode(symbols, t);
  // Only renormalization truncation loss plus the flush.
  CHECK(bytes.size() <= 16);
  CHECK(rangeDecode(bytes.data(), bytes.size(), t, symbols.size()) == symbols);
}
