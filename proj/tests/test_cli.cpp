#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code;
  std::string out;
};

CmdResult runCli(const std::string &args) {
  fs::path tmp = fs::temp_directory_path() / "hfl_cli_out.txt";
  std::string cmd = std::string(HFL_CLI_PATH) + " " + args + " > " +
                    tmp.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  std::ifstream in(tmp);
  std::ostringstream os;
  os << in.rdbuf();
  return {WEXITSTATUS(rc), os.str()};
}

fs::path workDir() {
  auto d = fs::temp_directory_path() / "hfl_cli_work";
  fs::create_directories(d);
  return d;
}

} // namespace

TEST_CASE("cli: usage errors exit 1, component errors exit 2") {
  CHECK(runCli("nosuchcommand").code == 1);
  CHECK(runCli("analyze").code == 1);
  CHECK(runCli("analyze /nonexistent.ir").code == 2);

  auto d = workDir();
  std::ofstream bad(d / "bad.ir");
  bad << "func main(entry=b0) {\nb0:\n  br v, b0, b0\n}\n";
  bad.close();
  CHECK(runCli("analyze " + (d / "bad.ir").string()).code == 2);
}

TEST_CASE("cli: gen, analyze and replay fit together") {
  auto d = workDir();
  auto bench = (d / "bench").string();
  auto gen = runCli("gen --out " + bench + " --rng 11");
  REQUIRE(gen.code == 0);

  auto labels = runCli("analyze --labels " + bench + "/prog.ir");
  CHECK(labels.code == 0);
  CHECK(labels.out.find("UnsignedOverflow") != std::string::npos);

  auto reach = runCli("analyze --reach " + bench + "/prog.ir");
  CHECK(reach.code == 0);
  CHECK(reach.out.find("main:b0 ") != std::string::npos);
  // stable output for golden files
  CHECK(runCli("analyze --reach " + bench + "/prog.ir").out == reach.out);

  // replay every manifest ground truth: its bug id appears as a violation
  std::ifstream mf(bench + "/manifest.csv");
  std::string line;
  std::getline(mf, line);
  int checked = 0;
  while (std::getline(mf, line)) {
    if (line.empty()) continue;
    std::string id = line.substr(0, line.find(','));
    std::string hexBytes = line.substr(line.rfind(',') + 1);
    std::vector<uint8_t> bytes;
    for (size_t i = 0; i + 1 < hexBytes.size(); i += 2)
      bytes.push_back(static_cast<uint8_t>(
          std::stoi(hexBytes.substr(i, 2), nullptr, 16)));
    auto seedPath = d / ("gt" + id + ".bin");
    std::ofstream sf(seedPath, std::ios::binary);
    sf.write(reinterpret_cast<const char *>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    sf.close();
    auto rep = runCli("replay " + bench + "/prog.ir " + seedPath.string());
    CHECK(rep.code == 0);
    CHECK(rep.out.find("violation label=" + id) != std::string::npos);
    ++checked;
  }
  CHECK(checked == 2);
}

TEST_CASE("cli: deterministic runs produce byte-identical stats") {
  auto d = workDir();
  auto bench = (d / "bench_det").string();
  REQUIRE(runCli("gen --out " + bench + " --rng 21").code == 0);

  std::string args = "run " + bench + "/prog.ir --policy savior --rounds 4 "
                     "--rng 7 --deterministic --fuzz-execs 400";
  auto a = runCli(args);
  auto b = runCli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("\"round\":1") != std::string::npos);
  CHECK(a.out.find("\"policy\":\"savior\"") != std::string::npos);
}

TEST_CASE("cli: score dumps per-seed terms") {
  auto d = workDir();
  auto bench = (d / "bench_sc").string();
  REQUIRE(runCli("gen --out " + bench + " --rng 31").code == 0);
  auto seedDir = d / "sc_seeds";
  fs::create_directories(seedDir);
  std::ofstream(seedDir / "a", std::ios::binary) << std::string(8, '\0');
  std::ofstream(seedDir / "b", std::ios::binary) << std::string("\x01\x02", 2);

  auto sc = runCli("score " + bench + "/prog.ir --seeds " + seedDir.string());
  CHECK(sc.code == 0);
  CHECK(sc.out.find("seed=1") != std::string::npos);
  CHECK(sc.out.find("score=") != std::string::npos);
  CHECK(sc.out.find("branch main:") != std::string::npos);
}

TEST_CASE("cli: config file values are overridable by flags") {
  auto d = workDir();
  auto bench = (d / "bench_cfg").string();
  REQUIRE(runCli("gen --out " + bench + " --rng 41").code == 0);
  auto cfgPath = d / "campaign.cfg";
  std::ofstream cfg(cfgPath);
  cfg << "rounds = 2\nrng = 3\nfuzz-execs = 300\n";
  cfg.close();

  auto countRounds = [](const std::string &out) {
    int n = 0;
    for (size_t pos = 0; (pos = out.find("{\"round\":", pos)) != std::string::npos;
         ++pos)
      ++n;
    return n;
  };
  auto viaConfig = runCli("run " + bench + "/prog.ir --deterministic --config " +
                          cfgPath.string());
  REQUIRE(viaConfig.code == 0);
  CHECK(countRounds(viaConfig.out) == 2);

  auto overridden = runCli("run " + bench + "/prog.ir --deterministic --config " +
                           cfgPath.string() + " --rounds 3");
  REQUIRE(overridden.code == 0);
  CHECK(countRounds(overridden.out) == 3);
}

TEST_CASE("cli: plotdata flattens stats into CSV") {
  auto d = workDir();
  auto bench = (d / "bench_pd").string();
  REQUIRE(runCli("gen --out " + bench + " --rng 51").code == 0);
  auto outDir = (d / "pd_out").string();
  REQUIRE(runCli("run " + bench + "/prog.ir --deterministic --rounds 2 "
                 "--fuzz-execs 200 --out " + outDir)
              .code == 0);
  auto pd = runCli("plotdata " + outDir + "/stats.jsonl");
  REQUIRE(pd.code == 0);
  CHECK(pd.out.find("file,round,policy,") == 0);
  CHECK(pd.out.find("stats.jsonl,1,savior,") != std::string::npos);
}

TEST_CASE("cli: HFL_SEED_DIR overrides the seed store location") {
  auto d = workDir();
  auto bench = (d / "bench_env").string();
  REQUIRE(runCli("gen --out " + bench + " --rng 61").code == 0);
  auto envDir = d / "env_seeds";
  fs::remove_all(envDir);
  std::string cmd = "HFL_SEED_DIR=" + envDir.string() + " " + HFL_CLI_PATH +
                    " run " + bench + "/prog.ir --deterministic --rounds 1 "
                    "--fuzz-execs 100 --out " + (d / "env_out").string() +
                    " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(envDir / "queue"));
  bool anySeed = false;
  for (auto &e : fs::directory_iterator(envDir / "queue")) anySeed |= e.is_regular_file();
  CHECK(anySeed);
}

TEST_CASE("cli: reach dump shows the fan-out root count") {
  auto d = workDir();
  std::ofstream ir(d / "fig.ir");
  ir << R"(
input 4
func main(entry=b0) {
b0:
  v0 = in.u8 0
  u = in.u8 1
  c = cmp.ult v0, 16
  br c, b1, b2
b1:
  c1 = cmp.ult v0, 8
  br c1, b3, b4
b2:
  c2 = cmp.ult v0, 64
  br c2, b5, b6
b3:
  v1 = add.u8 u, u
  jmp b7
b4:
  jmp b7
b5:
  v2 = mul.u8 u, 2
  jmp b8
b6:
  jmp b8
b7:
  ret
b8:
  v3 = shl.8 u, u
  ret
}
)";
  ir.close();
  auto reach = runCli("analyze --reach " + (d / "fig.ir").string());
  REQUIRE(reach.code == 0);
  CHECK(reach.out.find("main:b0 3\n") != std::string::npos);
}

TEST_CASE("cli: infeasible benchmark generation and policies") {
  auto d = workDir();
  auto inf = (d / "inf").string();
  REQUIRE(runCli("gen --out " + inf + " --infeasible --input-len 1").code == 0);
  auto labels = runCli("analyze --labels " + inf + "/prog.ir");
  CHECK(labels.out.find("OOB") != std::string::npos);
  CHECK(labels.out.find("live") != std::string::npos); // survives trimming

  // smallest policy runs end to end
  auto bench = (d / "bench_pol").string();
  REQUIRE(runCli("gen --out " + bench + " --rng 71").code == 0);
  auto sm = runCli("run " + bench + "/prog.ir --policy smallest "
                   "--deterministic --rounds 2 --fuzz-execs 200");
  REQUIRE(sm.code == 0);
  CHECK(sm.out.find("\"policy\":\"smallest\"") != std::string::npos);
  auto rd = runCli("run " + bench + "/prog.ir --policy random "
                   "--deterministic --rounds 2 --fuzz-execs 200");
  CHECK(rd.out.find("\"policy\":\"random\"") != std::string::npos);

  // replay honors a tiny budget
  std::ofstream seed(d / "tiny.bin", std::ios::binary);
  seed << std::string(4, '\0');
  seed.close();
  auto rep = runCli("replay " + bench + "/prog.ir " + (d / "tiny.bin").string() +
                    " --budget 5");
  CHECK(rep.out.find("budget-exhausted") != std::string::npos);
}
