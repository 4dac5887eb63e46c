#include <doctest.h>

#include <cstdint>
#include <string>

#include "bytes.hpp"
#include "container.hpp"
#include "pipeline.hpp"
#include "scene_io.hpp"

// Checked-in golden containers with frozen digests of their decoded scenes.
// Decoding avoids transcendental math, so these must reproduce exactly on
// any platform.

using namespace g4dc;

namespace {

uint64_t fnv1a64(const std::vector<uint8_t>& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Golden {
  const char* file;
  uint64_t digest;
  size_t decodedBytes;
};

constexpr Golden kGolden[] = {
    {"fixture_a.g4c", 0x9991621693177528ULL, 28370},
    {"fixture_b.g4c", 0xa8ceef003a573915ULL, 24366},
    {"fixture_c.g4c", 0x1cbd1182b43a9ae1ULL, 8418},
};

}  // namespace

TEST_CASE("golden containers decode to their frozen digests") {
  for (const Golden& g : kGolden) {
    CAPTURE(g.file);
    CompressedContainer c = readContainer(std::string(G4DC_FIXTURE_DIR) + "/" + g.file);
    std::vector<uint8_t> bytes = sceneToBytes(decodeScene(c));
    CHECK(bytes.size() == g.decodedBytes);
    CHECK(fnv1a64(bytes) == g.digest);
  }
}

TEST_CASE("golden containers re-serialize to their own bytes") {
  for (const Golden& g : kGolden) {
    std::vector<uint8_t> raw = readFileBytes(std::string(G4DC_FIXTURE_DIR) + "/" + g.file);
    CompressedContainer c = containerFromBytes(raw.data(), raw.size());
    CHECK(containerToBytes(c) == raw);
  }
}
