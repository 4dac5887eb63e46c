#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bytes.hpp"

// Drives the installed CLI binary end to end. G4DC_CLI_PATH is injected by
// the build; tests run in a scratch directory under /tmp.

namespace {

const char* kCli = G4DC_CLI_PATH;

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  std::string cmd = std::string("\"") + kCli + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  char buf[512];
  while (size_t n = fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

std::string scratch(const std::string& name) { return "/tmp/g4dc_cli_" + name; }

std::vector<uint8_t> slurp(const std::string& path) { return g4dc::readFileBytes(path); }

}  // namespace

TEST_CASE("cli: gen/encode/inspect/decode round trip") {
  std::string scene = scratch("a.g4s");
  Result gen = run("gen " + scene + " --statics 60 --dynamics 20 --frames 9 --seed 3");
  CHECK(gen.code == 0);
  CHECK(gen.out.find("wrote") != std::string::npos);

  std::string container = scratch("a.g4c");
  Result enc = run("encode " + scene + " " + container +
                   " --level 2 --seed 3 --codebook-size 16");
  CHECK(enc.code == 0);
  CHECK(enc.out.find("f_masked") != std::string::npos);
  CHECK(enc.out.find("points:") != std::string::npos);

  Result ins = run("inspect " + container);
  CHECK(ins.code == 0);
  CHECK(ins.out.find("total") != std::string::npos);
  Result insJson = run("inspect " + container + " --json");
  CHECK(insJson.code == 0);
  CHECK(insJson.out.find("\"total_bytes\"") != std::string::npos);

  std::string decoded = scratch("a_dec.g4s");
  Result dec = run("decode " + container + " " + decoded);
  CHECK(dec.code == 0);

  // Determinism: a second encode of the same scene is byte-identical.
  std::string container2 = scratch("a2.g4c");
  Result enc2 = run("encode " + scene + " " + container2 +
                    " --level 2 --seed 3 --codebook-size 16");
  CHECK(enc2.code == 0);
  CHECK(slurp(container) == slurp(container2));

  // Decoding the same container twice gives identical scene files.
  std::string decoded2 = scratch("a_dec2.g4s");
  REQUIRE(run("decode " + container + " " + decoded2).code == 0);
  CHECK(slurp(decoded) == slurp(decoded2));
}

TEST_CASE("cli: exit codes distinguish error classes") {
  CHECK(run("decode /tmp/g4dc_missing_in.g4c /tmp/out.g4s").code == 4);
  CHECK(run("gen /tmp/g4dc_bad.g4s --frames 1").code == 2);
  CHECK(run("nonsense-subcommand").code == 2);

  // A truncated container is a format error (3).
  std::string scene = scratch("b.g4s");
  std::string container = scratch("b.g4c");
  REQUIRE(run("gen " + scene + " --statics 20 --dynamics 5 --frames 9 --seed 4").code == 0);
  REQUIRE(run("encode " + scene + " " + container + " --level 3 --seed 4").code == 0);
  std::vector<uint8_t> bytes = slurp(container);
  bytes.resize(bytes.size() / 2);
  g4dc::writeFileBytes(container + ".trunc", bytes);
  Result dec = run("decode " + container + ".trunc /tmp/out.g4s");
  CHECK(dec.code == 3);
  CHECK(dec.out.find("error:") != std::string::npos);
}

TEST_CASE("cli: sweep produces an ordered, self-consistent csv") {
  std::string scene = scratch("c.g4s");
  REQUIRE(run("gen " + scene + " --statics 80 --dynamics 30 --frames 17 --seed 5").code == 0);
  std::string csv = scratch("c.csv");
  Result swp = run("sweep " + scene + " --levels 2,4 --seed 5 --csv " + csv);
  CHECK(swp.code == 0);

  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("#", 0) == 0);  // schema comment
  std::getline(in, line);          // header
  CHECK(line.find("level,size_bytes") == 0);
  int rows = 0;
  long prevLevel = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() >= 21);
    long level = std::stol(fields[0]);
    CHECK(level > prevLevel);
    prevLevel = level;
    // size equals the sum of the per-section columns.
    long long size = std::stoll(fields[1]);
    long long sum = 0;
    for (int i = 2; i <= 14; ++i) sum += std::stoll(fields[i]);
    CHECK(sum == size);
  }
  CHECK(rows == 2);
}

TEST_CASE("cli: config file overrides preset, flags override config") {
  std::string scene = scratch("d.g4s");
  REQUIRE(run("gen " + scene + " --statics 30 --dynamics 10 --frames 9 --seed 6").code == 0);
  std::string cfgPath = scratch("d.cfg");
  {
    std::ofstream cfg(cfgPath);
    cfg << "# comment line\n";
    cfg << "codebook_size = 8\n";
    cfg << "wavelet_levels = 0\n";
  }
  std::string c1 = scratch("d1.g4c");
  REQUIRE(run("encode " + scene + " " + c1 + " --level 3 --seed 6 --config " + cfgPath)
              .code == 0);
  // Flag overrides the config file's wavelet_levels.
  std::string c2 = scratch("d2.g4c");
  REQUIRE(run("encode " + scene + " " + c2 + " --level 3 --seed 6 --config " + cfgPath +
              " --wavelet-levels 1")
              .code == 0);
  CHECK(slurp(c1) != slurp(c2));

  Result bad = run("encode " + scene + " " + c1 + " --config /tmp/g4dc_missing.cfg");
  CHECK(bad.code == 4);
}

TEST_CASE("cli: ablation commands emit their csv schemas") {
  std::string scene = scratch("e.g4s");
  REQUIRE(
      run("gen " + scene + " --statics 40 --dynamics 16 --frames 9 --seed 7").code == 0);

  std::string csvO = scratch("e_op.csv");
  Result abo = run("ablate-opacity " + scene + " --seed 7 --csv " + csvO);
  CHECK(abo.code == 0);
  std::ifstream inO(csvO);
  std::string line;
  std::getline(inO, line);
  CHECK(line.find("opacity ablation") != std::string::npos);
  int rows = 0;
  while (std::getline(inO, line))
    if (!line.empty() && line[0] != 'p') ++rows;
  CHECK(rows == 5);

  std::string csvW = scratch("e_wav.csv");
  Result abw = run("ablate-wavelet " + scene + " --seed 7 --csv " + csvW);
  CHECK(abw.code == 0);
  std::ifstream inW(csvW);
  std::getline(inW, line);
  CHECK(line.find("wavelet ablation") != std::string::npos);
}
